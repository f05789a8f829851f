"""
Robustness Scans

Final-state fidelity while one parameter is scaled around its baseline value.
"""

import logging
from dataclasses import replace
from typing import Optional

import numpy as np
import pandas as pd

from config.settings import ROBUSTNESS_PARAMETERS, TARGET_ANGLE_BY_SCENARIO
from src.dynamics.propagator import IntegratorOptions
from src.model.parameters import GeometryParams, PhysicalParams
from .scan import evaluate_many

logger = logging.getLogger(__name__)


def _scaled(geometry: GeometryParams, physics: PhysicalParams, parameter: str, factor: float):
    if parameter == "v":
        return geometry.with_velocity(geometry.v1 * factor), physics
    if parameter in ("d", "z0"):
        return replace(geometry, **{parameter: getattr(geometry, parameter) * factor}), physics
    return geometry, replace(physics, **{parameter: getattr(physics, parameter) * factor})


def robustness_table(geometry: GeometryParams, physics: PhysicalParams, parameter: str,
                     relative_range: float, steps: int, scenario: str = "stirap",
                     opts: Optional[IntegratorOptions] = None,
                     workers: Optional[int] = None) -> pd.DataFrame:
    """
    Scan parameter * (1 + s), s evenly spaced in [-relative_range, +relative_range].

    Args:
        geometry: Baseline geometry
        physics: Baseline couplings
        parameter: One of v, Omega0, G0, d, z0 (v scales both atom speeds)
        relative_range: Half-width of the relative scan, in [0, 1]
        steps: Number of scan points (1 gives the baseline only)
        scenario: "stirap" (target |g2,g1,0>) or "half_stirap" (target angle pi/4)
        opts: Integrator options
        workers: Process count for the cell evaluations

    Returns:
        Table with columns factor, value, valid, fidelity plus final populations
    """
    if parameter not in ROBUSTNESS_PARAMETERS:
        raise ValueError(f"parameter must be one of {ROBUSTNESS_PARAMETERS} (got {parameter!r})")
    if scenario not in TARGET_ANGLE_BY_SCENARIO:
        raise ValueError(f"scenario must be one of {tuple(TARGET_ANGLE_BY_SCENARIO)} (got {scenario!r})")
    if not 0.0 <= relative_range <= 1.0:
        raise ValueError(f"relative_range must lie in [0, 1] (got {relative_range!r})")
    if steps < 1:
        raise ValueError(f"steps must be >= 1 (got {steps!r})")

    factors = np.array([1.0]) if steps == 1 else np.linspace(1.0 - relative_range, 1.0 + relative_range, steps)
    baseline = geometry.v1 if parameter == "v" else getattr(geometry if parameter in ("d", "z0") else physics, parameter)
    tasks = []
    for k, f in enumerate(factors):
        g, p = _scaled(geometry, physics, parameter, float(f))
        tasks.append(({"k": k, "factor": float(f), "value": baseline * float(f)}, g, p))

    logger.info(f"Robustness scan of {parameter} over +/-{relative_range:.0%} in {steps} step(s) ({scenario})")
    rows = evaluate_many(tasks, opts, TARGET_ANGLE_BY_SCENARIO[scenario], workers)
    table = pd.DataFrame(rows).sort_values("k", kind="stable").reset_index(drop=True)
    front = ["factor", "value", "valid", "fidelity"]
    return table[front + [c for c in table.columns if c not in front and c != "k"]]


def robustness_scan(geometry: GeometryParams, physics: PhysicalParams, parameter: str,
                    relative_range: float, steps: int, scenario: str = "stirap",
                    opts: Optional[IntegratorOptions] = None,
                    workers: Optional[int] = None) -> np.ndarray:
    """Final-state fidelity per scan point (NaN where integration failed)."""
    table = robustness_table(geometry, physics, parameter, relative_range, steps, scenario, opts, workers)
    return table["fidelity"].to_numpy(dtype=float)
