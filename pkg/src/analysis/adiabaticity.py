"""
Adiabaticity Diagnostics

Pulse-area products Omega0*T_L and G0*T_C, and the instantaneous eigenvalues
of the effective Hamiltonian along a time grid.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from config.settings import ADIABATICITY_THRESHOLD
from src.model.hamiltonians import effective_hamiltonian
from src.model.parameters import GeometryParams, PhysicalParams
from src.model.pulses import pulses_at

logger = logging.getLogger(__name__)

# products within this relative distance of the threshold count as reaching it
_THRESHOLD_RTOL = 1e-12


class NumericalError(Exception):
    """Raised when an eigen-solve fails; carries the offending time."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


@dataclass(frozen=True)
class AdiabaticityReport:
    """Adiabaticity products and verdict ("pass" when both reach the threshold)."""
    product_L: float
    product_C: float
    T_L: float
    T_C: float
    verdict: str

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def adiabaticity_check(geometry: GeometryParams, physics: PhysicalParams) -> AdiabaticityReport:
    """
    Compare Omega0*T_L and G0*T_C (T = waist / v) with the threshold 10 (inclusive).
    """
    T_L = geometry.transit_laser
    T_C = geometry.transit_cavity
    product_L = physics.Omega0 * T_L
    product_C = physics.G0 * T_C
    limit = ADIABATICITY_THRESHOLD * (1.0 - _THRESHOLD_RTOL)
    verdict = "pass" if product_L >= limit and product_C >= limit else "warn"
    if verdict == "warn":
        logger.warning(
            f"Adiabaticity products below {ADIABATICITY_THRESHOLD:g}: "
            f"Omega0*T_L = {product_L:.3g}, G0*T_C = {product_C:.3g}"
        )
    return AdiabaticityReport(product_L=product_L, product_C=product_C, T_L=T_L, T_C=T_C, verdict=verdict)


def eigen_gap_trace(geometry: GeometryParams, physics: PhysicalParams, times) -> np.ndarray:
    """
    Sorted eigenvalues of the effective Hamiltonian at each time.

    Args:
        geometry: Trajectory geometry
        physics: Couplings
        times: 1-D array of times (s)

    Returns:
        Array (n_times, 5), ascending per row

    Raises:
        NumericalError: If the symmetric eigen-solve fails at some time
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    H = effective_hamiltonian(pulses_at(geometry, physics, times))
    try:
        return np.linalg.eigvalsh(H)
    except np.linalg.LinAlgError:
        pass
    values = np.empty((len(times), 5))
    for i, (t, Hi) in enumerate(zip(times, H)):
        try:
            values[i] = scipy.linalg.eigvalsh(Hi)
        except (np.linalg.LinAlgError, ValueError) as e:
            raise NumericalError(f"Eigen-solve failed at t={t:.6g} s: {e}", time=float(t)) from e
    return values
