"""
Trajectory & Pulse Synthesis Module

Turns the atom trajectories and the Gaussian mode/beam profiles into the four
time-dependent Rabi frequencies seen by the atoms, plus the detuning and
resonant-approximation diagnostics.

Time convention: `pulses_at` uses a clock whose origin is the instant atom 1
crosses the cavity centre; `atom_position` and `optical_phase` take the raw
trajectory time of the atom equations.
"""

import logging
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
import pandas as pd

from config.settings import DETUNING_GUARD_RATIO, RWA_WARN_RATIO
from .parameters import GeometryParams, PhysicalParams

logger = logging.getLogger(__name__)

TimeLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class PulseSnapshot:
    """
    Instantaneous Rabi frequencies (rad/s) at time t.

    Fields are floats for a scalar time or equally-shaped arrays for a time
    grid. `doppler` is the common Doppler shift k*v1*sin(theta1) that sits on
    the diagonal of the effective Hamiltonian.
    """
    t: TimeLike
    Omega1: TimeLike
    G1: TimeLike
    G2: TimeLike
    Omega2: TimeLike
    Delta: float = 0.0
    doppler: float = 0.0

    def at(self, index: int) -> "PulseSnapshot":
        """Scalar snapshot for one sample of a vectorized snapshot."""
        return PulseSnapshot(
            t=float(np.asarray(self.t)[index]),
            Omega1=float(np.asarray(self.Omega1)[index]),
            G1=float(np.asarray(self.G1)[index]),
            G2=float(np.asarray(self.G2)[index]),
            Omega2=float(np.asarray(self.Omega2)[index]),
            Delta=self.Delta,
            doppler=self.doppler,
        )


@dataclass(frozen=True)
class DetuningReport:
    """Four-photon detuning and its resonance guard."""
    delta: float
    limit: float
    guard_tripped: bool


@dataclass(frozen=True)
class RWAReport:
    """Resonant-approximation validity ratios (should all be << 1)."""
    coupling_ratio: float
    doppler_ratio: float
    valid: bool


def atom_position(geometry: GeometryParams, atom: int, t: TimeLike) -> Tuple[TimeLike, TimeLike, TimeLike]:
    """
    Coordinates of an atom at trajectory time t.

    Atom 1 moves in the plane z = z0 starting from (-x0, -y0); atom 2 moves in
    the plane z = 0 starting from (x0, -y0) and is delayed by tau.

    Args:
        geometry: Trajectory parameters
        atom: 1 or 2
        t: Time (s), scalar or array

    Returns:
        Tuple (x, y, z) in metres
    """
    t = np.asarray(t, dtype=float) if np.ndim(t) else float(t)
    g = geometry
    if atom == 1:
        x = -g.x0 + g.v1 * t * np.cos(g.theta1)
        y = -g.y0 + g.v1 * t * g.sin_theta1
        z = g.z0 + 0.0 * t
        return x, y, z
    if atom == 2:
        s = t - g.tau
        x = g.x0 + g.v2 * s * g.cos_theta2
        y = -g.y0 + g.v2 * s * g.sin_theta2
        z = 0.0 * s
        return x, y, z
    raise ValueError(f"atom must be 1 or 2 (got {atom!r})")


def optical_phase(geometry: GeometryParams, physics: PhysicalParams, atom: int, t: TimeLike) -> TimeLike:
    """
    Optical phase of the laser seen by an atom (rad).

    phi1(t) = wL t - k v1 t sin(theta1);  phi2(t - tau) = wL t - k v2 (t - tau) sin(theta2)
    """
    g = geometry
    omega_l = physics.resonance(g)
    if atom == 1:
        return omega_l * t - g.k * g.v1 * t * g.sin_theta1
    if atom == 2:
        return omega_l * t - g.k * g.v2 * (t - g.tau) * g.sin_theta2
    raise ValueError(f"atom must be 1 or 2 (got {atom!r})")


def doppler_phase(geometry: GeometryParams, atom: int, t: TimeLike) -> TimeLike:
    """Optical phase with the carrier wL*t removed (rad)."""
    g = geometry
    if atom == 1:
        return -g.k * g.v1 * t * g.sin_theta1
    if atom == 2:
        return -g.k * g.v2 * (t - g.tau) * g.sin_theta2
    raise ValueError(f"atom must be 1 or 2 (got {atom!r})")


def cavity_coupling(physics: PhysicalParams, geometry: GeometryParams, x, y, z) -> TimeLike:
    """TEM00 atom-cavity coupling G0 exp(-(x^2 + y^2)/W_C^2) cos(2 pi z / lambda)."""
    w = geometry.waist_cavity
    return physics.G0 * np.exp(-(np.square(x) + np.square(y)) / w ** 2) * np.cos(2.0 * np.pi * np.asarray(z) / geometry.wavelength)


def laser_coupling(physics: PhysicalParams, geometry: GeometryParams, x, z) -> TimeLike:
    """Laser Rabi frequency Omega0 exp(-(x^2 + z^2)/W_L^2), x measured from the beam axis."""
    w = geometry.waist_laser
    return physics.Omega0 * np.exp(-(np.square(x) + np.square(z)) / w ** 2)


def pulses_at(geometry: GeometryParams, physics: PhysicalParams, t: TimeLike) -> PulseSnapshot:
    """
    The four Rabi frequencies at clock time t.

    Positions come from `atom_position` shifted so that t = 0 is the cavity
    crossing of atom 1; atom 2 crosses at t = tau for equal speeds. The laser
    beam axis sits at x = d.

    Args:
        geometry: Trajectory and beam geometry
        physics: Peak couplings
        t: Clock time (s), scalar or array

    Returns:
        PulseSnapshot with (Omega1, G1, G2, Omega2)
    """
    t_clock = np.asarray(t, dtype=float) if np.ndim(t) else float(t)
    t_traj = t_clock + geometry.time_origin

    x1, y1, z1 = atom_position(geometry, 1, t_traj)
    x2, y2, z2 = atom_position(geometry, 2, t_traj)

    G1 = cavity_coupling(physics, geometry, x1, y1, z1)
    G2 = cavity_coupling(physics, geometry, x2, y2, z2)
    Omega1 = laser_coupling(physics, geometry, x1 - geometry.d, z1)
    Omega2 = laser_coupling(physics, geometry, x2 - geometry.d, z2)

    if np.ndim(t_clock) == 0:
        Omega1, G1, G2, Omega2 = (float(v) for v in (Omega1, G1, G2, Omega2))

    return PulseSnapshot(
        t=t_clock,
        Omega1=Omega1,
        G1=G1,
        G2=G2,
        Omega2=Omega2,
        Delta=four_photon_detuning(geometry, physics).delta,
        doppler=geometry.k * geometry.v1 * geometry.sin_theta1,
    )


def pulse_table(geometry: GeometryParams, physics: PhysicalParams, times: np.ndarray) -> pd.DataFrame:
    """Rabi frequencies on a time grid as a table (columns t, Omega1, G1, G2, Omega2)."""
    s = pulses_at(geometry, physics, np.asarray(times, dtype=float))
    return pd.DataFrame({
        "t": s.t,
        "Omega1": s.Omega1,
        "G1": s.G1,
        "G2": s.G2,
        "Omega2": s.Omega2,
    })


def four_photon_detuning(geometry: GeometryParams, physics: PhysicalParams) -> DetuningReport:
    """
    Detuning between |g1,g2,0> and |g2,g1,0>: Delta = k (v1 sin(theta1) - v2 sin(theta2)).

    The guard trips when |Delta| > min(Omega0, G0) / 100; it is a warning only.
    """
    g = geometry
    delta = g.k * (g.v1 * g.sin_theta1 - g.v2 * g.sin_theta2)
    limit = min(physics.Omega0, physics.G0) * DETUNING_GUARD_RATIO
    return DetuningReport(delta=delta, limit=limit, guard_tripped=abs(delta) > limit)


def rwa_validity(geometry: GeometryParams, physics: PhysicalParams) -> RWAReport:
    """
    Check |Omega0|, |G0| << omega_e, omega_C, |dphi_i/dt| and k v sin(theta) << omega_L.

    Reported as a warning only; the effective model is exact in the rotating frame.
    """
    g = geometry
    omega = physics.resonance(g)
    doppler1 = g.k * g.v1 * g.sin_theta1
    doppler2 = g.k * g.v2 * g.sin_theta2
    phase_rates = (abs(omega - doppler1), abs(omega - doppler2))
    smallest = min(omega, *phase_rates)
    coupling_ratio = max(physics.Omega0, physics.G0) / smallest if smallest > 0 else float("inf")
    doppler_ratio = max(abs(doppler1), abs(doppler2)) / omega
    valid = coupling_ratio <= RWA_WARN_RATIO and doppler_ratio <= RWA_WARN_RATIO
    if not valid:
        logger.warning(
            f"Resonant approximation questionable: coupling ratio {coupling_ratio:.3g}, "
            f"Doppler ratio {doppler_ratio:.3g}"
        )
    return RWAReport(coupling_ratio=coupling_ratio, doppler_ratio=doppler_ratio, valid=valid)
