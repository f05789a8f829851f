"""
Dark-State Analysis Module

Two-atom dark state of the effective Hamiltonian, its overlap with a
simulated trajectory, the mixing angle reached at the end of the pulses and
the fractional-STIRAP limit conditions.
"""

import logging
import warnings
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from config.settings import (
    MIXING_ANGLE_DECAY_FRACTION,
    MIXING_ANGLE_MAX_DRIFT,
    FSTIRAP_INITIAL_ANGLE_MAX,
    CAVITY_DOMINANCE_MIN,
)
from src.dynamics.propagator import IntegratorOptions, SimulationTrace, integration_window, propagate
from src.dynamics.states import StateVector, initial_state
from src.model.basis import G1G2_0, G2G1_0, SUBSPACE_S, FULL_SPACE, embed_in_full
from src.model.hamiltonians import EffectiveHamiltonian, effective_hamiltonian
from src.model.parameters import GeometryParams, PhysicalParams
from src.model.pulses import PulseSnapshot, pulses_at

logger = logging.getLogger(__name__)

# Samples used to locate peaks and decay times of the laser pulses
ANGLE_GRID_SAMPLES = 20001


class UndefinedDarkStateError(Exception):
    """Raised when G1*Omega2, Omega1*Omega2 and G2*Omega1 all vanish."""
    pass


class NonFractionalGeometryWarning(UserWarning):
    """The late-time laser ratio is not stationary, so no constant mixing angle exists."""
    pass


@dataclass(frozen=True)
class DarkStateReport:
    """Normalized dark state, its normalization constant and ||Heff D||."""
    vector: StateVector
    normalization: float
    residual: float


@dataclass(frozen=True)
class MixingAngleReport:
    """
    Mixing angle at the end of the pulse sequence.

    `source` is "laser_ratio" (stationary late-time Omega1/Omega2) or
    "final_state" (final amplitudes of a simulated run).
    """
    angle: float
    evaluation_time: float
    drift: float
    stationary: bool
    source: str = "laser_ratio"


@dataclass(frozen=True)
class FStirapConditions:
    """The three limit conditions of fractional STIRAP."""
    initial_angle: float
    initial_ok: bool
    mixing: MixingAngleReport
    cavity_dominance: float
    cavity_ok: bool

    @property
    def satisfied(self) -> bool:
        return self.initial_ok and self.mixing.stationary and self.cavity_ok


def _dark_components(Omega1, G1, G2, Omega2) -> np.ndarray:
    """Unnormalized (G1 Om2, 0, -Om1 Om2, 0, G2 Om1), last axis of length 5."""
    Omega1, G1, G2, Omega2 = (np.asarray(v, dtype=float) for v in (Omega1, G1, G2, Omega2))
    zero = np.zeros_like(Omega1)
    return np.stack([G1 * Omega2, zero, -Omega1 * Omega2, zero, G2 * Omega1], axis=-1)


def _normalize_rows(v: np.ndarray):
    """Scale-safe normalization; returns (unit vectors, norms) with NaN rows where v = 0."""
    scale = np.max(np.abs(v), axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        scaled = v / scale
        norms = np.linalg.norm(scaled, axis=-1, keepdims=True) * scale
        unit = scaled / np.linalg.norm(scaled, axis=-1, keepdims=True)
    return unit, norms[..., 0]


def dark_state(snapshot: PulseSnapshot) -> DarkStateReport:
    """
    Zero-eigenvalue dark state C (G1 Om2 |g1,g2,0> - Om1 Om2 |g2,g2,1> + G2 Om1 |g2,g1,0>).

    C = (G1^2 Om2^2 + Om1^2 Om2^2 + G2^2 Om1^2)^(-1/2). The excited-atom
    components are exactly zero.

    Raises:
        UndefinedDarkStateError: If all three products vanish
    """
    raw = _dark_components(snapshot.Omega1, snapshot.G1, snapshot.G2, snapshot.Omega2)
    if raw.ndim != 1:
        raise ValueError("dark_state expects a scalar snapshot; use snapshot.at(i)")
    if not np.any(raw):
        raise UndefinedDarkStateError(
            f"Dark state undefined at t={snapshot.t!r}: G1*Omega2, Omega1*Omega2 and G2*Omega1 are all zero"
        )
    unit, norm = _normalize_rows(raw)
    residual = float(np.linalg.norm(effective_hamiltonian(snapshot) @ unit))
    return DarkStateReport(
        vector=StateVector(SUBSPACE_S, unit),
        normalization=float(1.0 / norm),
        residual=residual,
    )


def dark_overlap(trace: SimulationTrace, geometry: GeometryParams, physics: PhysicalParams) -> np.ndarray:
    """
    |<D(t)|psi(t)>|^2 on the trace grid; stored on the trace and returned.

    Times where the dark state is undefined get NaN.
    """
    s = pulses_at(geometry, physics, trace.times)
    unit, _ = _normalize_rows(_dark_components(s.Omega1, s.G1, s.G2, s.Omega2))
    if trace.basis == FULL_SPACE:
        unit = embed_in_full(unit)
    elif trace.basis != SUBSPACE_S:
        raise ValueError(f"No dark state for the {trace.basis.name} basis")
    overlap = np.abs(np.einsum("ij,ij->i", np.conj(unit), trace.amplitudes)) ** 2
    trace.dark_overlap = overlap
    return overlap


def _laser_grid(geometry: GeometryParams, physics: PhysicalParams):
    start, end = integration_window(geometry)
    span = end - start
    times = np.linspace(start, end + 0.5 * span, ANGLE_GRID_SAMPLES)
    s = pulses_at(geometry, physics, times)
    return times, np.asarray(s.Omega1), np.asarray(s.Omega2), np.asarray(s.G1), np.asarray(s.G2)


def _decayed(pulse: np.ndarray, fraction: float) -> np.ndarray:
    peak = pulse.max()
    if peak == 0:
        return np.ones_like(pulse, dtype=bool)
    return pulse <= fraction * peak


def _ratio(a: float, b: float) -> float:
    if a == 0:
        return 0.0
    if b == 0:
        return float("inf")
    return a / b


def _laser_ratio_report(geometry: GeometryParams, physics: PhysicalParams) -> MixingAngleReport:
    """arctan(Omega1/Omega2) where both laser pulses have decayed to 1e-3 of peak, with its drift."""
    times, om1, om2, _, _ = _laser_grid(geometry, physics)
    after_peaks = times >= max(times[np.argmax(om1)], times[np.argmax(om2)])
    both_decayed = _decayed(om1, MIXING_ANGLE_DECAY_FRACTION) & _decayed(om2, MIXING_ANGLE_DECAY_FRACTION)
    candidates = np.flatnonzero(after_peaks & both_decayed)
    i_eval = int(candidates[0]) if candidates.size else len(times) - 1
    t_eval = float(times[i_eval])
    i_late = min(len(times) - 1, int(np.searchsorted(times, t_eval + geometry.transit_laser)))

    r0 = _ratio(om1[i_eval], om2[i_eval])
    r1 = _ratio(om1[i_late], om2[i_late])
    if r0 == r1:
        drift = 0.0
    elif r0 == 0 or np.isinf(r0):
        drift = float("inf")
    else:
        drift = abs(r1 - r0) / r0
    angle = float(np.arctan2(om1[i_eval], om2[i_eval])) if (om1[i_eval] or om2[i_eval]) else 0.0
    return MixingAngleReport(
        angle=angle,
        evaluation_time=t_eval,
        drift=float(drift),
        stationary=bool(drift <= MIXING_ANGLE_MAX_DRIFT),
        source="laser_ratio",
    )


def final_state_angle(psi: StateVector) -> float:
    """arctan(|<g2,g1,0|psi>| / |<g1,g2,0|psi>|) in [0, pi/2]."""
    return float(np.arctan2(abs(psi.amplitude(G2G1_0)), abs(psi.amplitude(G1G2_0))))


def mixing_angle_report(geometry: GeometryParams, physics: PhysicalParams,
                        trace: Optional[SimulationTrace] = None,
                        opts: Optional[IntegratorOptions] = None) -> MixingAngleReport:
    """
    Mixing angle reached at the end of the pulse sequence.

    When the late-time ratio Omega1/Omega2 is stationary the angle is
    arctan(Omega1/Omega2) at the time both laser pulses have decayed to 1e-3
    of peak. Otherwise the ratio runs off (for d != 0 it grows without bound
    while the state has already frozen), and the angle is read from the final
    amplitudes, arctan(|c(g2,g1,0)| / |c(g1,g2,0)|), of `trace` or of a
    loss-free effective-model run from |g1,g2,0>.

    Args:
        geometry: Trajectory and beam geometry
        physics: Peak couplings (loss rates are ignored)
        trace: Simulated trace to read the final state from
        opts: Integrator options for the internal run

    Returns:
        MixingAngleReport; `drift` and `stationary` always describe the laser ratio
    """
    ratio = _laser_ratio_report(geometry, physics)
    if ratio.stationary:
        return ratio
    if trace is None:
        trace = propagate(EffectiveHamiltonian(geometry, physics), initial_state(), opts)
    return replace(
        ratio,
        angle=final_state_angle(trace.final_state),
        evaluation_time=float(trace.times[-1]),
        source="final_state",
    )


def mixing_angle(geometry: GeometryParams, physics: PhysicalParams) -> float:
    """
    Mixing angle reached at the end of the pulse sequence (rad).

    Emits NonFractionalGeometryWarning when the late-time laser ratio drifts by
    more than 10 %; the angle then comes from the simulated final state.
    """
    report = mixing_angle_report(geometry, physics)
    if not report.stationary:
        message = (
            f"Laser ratio Omega1/Omega2 is not stationary at late times "
            f"(relative drift {report.drift:.3g}); mixing angle {report.angle:.4f} rad taken from the final state"
        )
        logger.warning(message)
        warnings.warn(message, NonFractionalGeometryWarning, stacklevel=2)
    return report.angle


def fstirap_conditions(geometry: GeometryParams, physics: PhysicalParams) -> FStirapConditions:
    """
    Evaluate the three fractional-STIRAP limit conditions.

    - early times: Omega1/Omega2 -> 0 (angle at the first time a laser pulse
      exceeds 1e-3 of its peak)
    - late times: constant ratio (mixing angle report)
    - during the interaction: G1, G2 >> Omega1, Omega2 (minimum of
      min(G1, G2) / max(Omega1, Omega2) while a laser pulse exceeds 1e-2 of Omega0)
    """
    times, om1, om2, g1, g2 = _laser_grid(geometry, physics)
    rising = ~(_decayed(om1, MIXING_ANGLE_DECAY_FRACTION) & _decayed(om2, MIXING_ANGLE_DECAY_FRACTION))
    idx = np.flatnonzero(rising)
    if idx.size:
        i0 = int(idx[0])
        initial_angle = float(np.arctan2(om1[i0], om2[i0]))
    else:
        initial_angle = 0.0

    active = np.maximum(om1, om2) >= 1e-2 * physics.Omega0
    if active.any():
        dominance = float(np.min(np.minimum(g1, g2)[active] / np.maximum(om1, om2)[active]))
    else:
        dominance = float("inf")

    return FStirapConditions(
        initial_angle=initial_angle,
        initial_ok=initial_angle <= FSTIRAP_INITIAL_ANGLE_MAX,
        mixing=_laser_ratio_report(geometry, physics),
        cavity_dominance=dominance,
        cavity_ok=dominance >= CAVITY_DOMINANCE_MIN,
    )
