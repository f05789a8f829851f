"""Scenario orchestration."""
from .scenarios import ScenarioRunner, run_scenario

__all__ = ["ScenarioRunner", "run_scenario"]
