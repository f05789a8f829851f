"""Time evolution of the effective and full models."""
from .states import StateVector, initial_state, populations
from .propagator import (
    IntegratorOptions,
    IntegrationError,
    SimulationTrace,
    propagate,
    propagate_full,
)
from .losses import with_losses

__all__ = [
    "StateVector",
    "initial_state",
    "populations",
    "IntegratorOptions",
    "IntegrationError",
    "SimulationTrace",
    "propagate",
    "propagate_full",
    "with_losses",
]
