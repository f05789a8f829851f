"""
Decoherence Exposure

First-order loss probabilities from the transient population of the decaying
states: Gamma * integral(P_e1 + P_e2) dt and kappa * integral(P_photon) dt.
"""

from dataclasses import dataclass

from scipy.integrate import trapezoid

from src.dynamics.propagator import SimulationTrace
from src.model.parameters import PhysicalParams


@dataclass(frozen=True)
class ExposureMetrics:
    excited_exposure: float
    photon_exposure: float

    @property
    def total(self) -> float:
        return self.excited_exposure + self.photon_exposure


def exposure_metrics(trace: SimulationTrace, physics: PhysicalParams) -> ExposureMetrics:
    """Trapezoidal loss estimates on the trace's output grid."""
    pops = trace.populations
    excited = pops @ trace.basis.excited_count
    photons = pops @ trace.basis.photon_count
    return ExposureMetrics(
        excited_exposure=float(physics.Gamma * trapezoid(excited, trace.times)),
        photon_exposure=float(physics.kappa * trapezoid(photons, trace.times)),
    )
