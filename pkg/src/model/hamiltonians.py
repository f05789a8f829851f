"""
Hamiltonian Builders

- Effective (rotating-frame) Hamiltonian on the five-state subspace S
- Projected Hamiltonian P H P and the frame rotation R linking the two
- Full 18-state Hamiltonian (lab frame and interaction picture)

All builders accept a scalar time or a 1-D time grid; a grid returns a stack
of matrices with the time axis first. Units are rad/s, hbar = 1.
"""

from typing import Union

import numpy as np

from .basis import Basis, SUBSPACE_S, FULL_SPACE
from .parameters import GeometryParams, PhysicalParams
from .pulses import PulseSnapshot, pulses_at, optical_phase, doppler_phase

TimeLike = Union[float, np.ndarray]

FRAMES = ("interaction", "lab")


def effective_hamiltonian(snapshot: PulseSnapshot) -> np.ndarray:
    """
    Real symmetric chain Hamiltonian in the rotating frame.

    Off-diagonal chain (Omega1, G1, G2, Omega2); diagonal
    (0, k v1 sin(theta1), k v1 sin(theta1), k v1 sin(theta1), Delta).

    Args:
        snapshot: Pulse values (scalar or vectorized)

    Returns:
        Array of shape (5, 5) or (n, 5, 5)
    """
    om1 = np.asarray(snapshot.Omega1, dtype=float)
    shape = om1.shape
    H = np.zeros(shape + (5, 5))
    chain = (om1, np.asarray(snapshot.G1, dtype=float), np.asarray(snapshot.G2, dtype=float),
             np.asarray(snapshot.Omega2, dtype=float))
    for i, value in enumerate(chain):
        H[..., i, i + 1] = value
        H[..., i + 1, i] = value
    H[..., 1, 1] = snapshot.doppler
    H[..., 2, 2] = snapshot.doppler
    H[..., 3, 3] = snapshot.doppler
    H[..., 4, 4] = snapshot.Delta
    return H


def projected_hamiltonian(geometry: GeometryParams, physics: PhysicalParams, t: TimeLike) -> np.ndarray:
    """
    Subspace Hamiltonian P H P with the optical phases and bare energies.

    Phase convention as printed: e^{+i phi1} at (1,2) and e^{-i phi2} at (4,5).
    """
    s = pulses_at(geometry, physics, t)
    omega = physics.resonance(geometry)
    phi1 = np.asarray(optical_phase(geometry, physics, 1, s.t))
    phi2 = np.asarray(optical_phase(geometry, physics, 2, s.t))
    shape = phi1.shape
    H = np.zeros(shape + (5, 5), dtype=complex)
    H[..., 0, 1] = s.Omega1 * np.exp(1j * phi1)
    H[..., 1, 0] = s.Omega1 * np.exp(-1j * phi1)
    H[..., 1, 2] = H[..., 2, 1] = s.G1
    H[..., 2, 3] = H[..., 3, 2] = s.G2
    H[..., 3, 4] = s.Omega2 * np.exp(-1j * phi2)
    H[..., 4, 3] = s.Omega2 * np.exp(1j * phi2)
    H[..., 1, 1] = H[..., 2, 2] = H[..., 3, 3] = omega
    return H


def rotation(geometry: GeometryParams, physics: PhysicalParams, t: TimeLike) -> np.ndarray:
    """Diagonal frame rotation R = diag(1, e^{-i phi1}, e^{-i phi1}, e^{-i phi1}, e^{-i (phi1 - phi2)})."""
    phi1 = np.asarray(optical_phase(geometry, physics, 1, t))
    phi2 = np.asarray(optical_phase(geometry, physics, 2, t))
    diag = np.stack([
        np.ones_like(phi1, dtype=complex),
        np.exp(-1j * phi1),
        np.exp(-1j * phi1),
        np.exp(-1j * phi1),
        np.exp(-1j * (phi1 - phi2)),
    ], axis=-1)
    return diag[..., :, None] * np.eye(5)


def rotation_rate(geometry: GeometryParams, physics: PhysicalParams) -> np.ndarray:
    """Diagonal of -i R^dagger dR/dt (time independent)."""
    g = geometry
    omega = physics.resonance(g)
    dphi1 = omega - g.k * g.v1 * g.sin_theta1
    dphi2 = omega - g.k * g.v2 * g.sin_theta2
    return np.array([0.0, -dphi1, -dphi1, -dphi1, -(dphi1 - dphi2)])


def _atom_operators():
    """Single-atom operators on (g1, e, g2)."""
    P_e = np.zeros((3, 3))
    P_e[1, 1] = 1.0
    s_g1e = np.zeros((3, 3))
    s_g1e[0, 1] = 1.0   # |g1><e|
    s_eg2 = np.zeros((3, 3))
    s_eg2[1, 2] = 1.0   # |e><g2|
    return P_e, s_g1e, s_eg2


def _full_space_operators():
    """Operator templates on atom1 x atom2 x photon{0,1}."""
    I3 = np.eye(3)
    I2 = np.eye(2)
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    n = np.diag([0.0, 1.0])
    P_e, s_g1e, s_eg2 = _atom_operators()

    def on_atom1(op):
        return np.kron(np.kron(op, I3), I2)

    def on_atom2(op):
        return np.kron(np.kron(I3, op), I2)

    a_full = np.kron(np.kron(I3, I3), a)
    cavity_1 = a_full @ on_atom1(s_eg2)
    cavity_2 = a_full @ on_atom2(s_eg2)
    return {
        "excited": on_atom1(P_e) + on_atom2(P_e),
        "photons": np.kron(np.kron(I3, I3), n),
        "cavity_1": cavity_1 + cavity_1.T,
        "cavity_2": cavity_2 + cavity_2.T,
        "laser_1": on_atom1(s_g1e),
        "laser_2": on_atom2(s_g1e),
    }


_OPS = _full_space_operators()


def _assemble_full(s: PulseSnapshot, phase1, phase2, bare_energy: float) -> np.ndarray:
    c1 = np.asarray(s.Omega1) * np.exp(1j * np.asarray(phase1))
    c2 = np.asarray(s.Omega2) * np.exp(1j * np.asarray(phase2))
    H = (
        np.multiply.outer(np.asarray(s.G1, dtype=complex), _OPS["cavity_1"])
        + np.multiply.outer(np.asarray(s.G2, dtype=complex), _OPS["cavity_2"])
        + np.multiply.outer(c1, _OPS["laser_1"])
        + np.multiply.outer(np.conj(c1), _OPS["laser_1"].T)
        + np.multiply.outer(c2, _OPS["laser_2"])
        + np.multiply.outer(np.conj(c2), _OPS["laser_2"].T)
    )
    if bare_energy:
        H = H + bare_energy * (_OPS["excited"] + _OPS["photons"])
    return H


def full_hamiltonian(geometry: GeometryParams, physics: PhysicalParams, t: TimeLike) -> np.ndarray:
    """
    Two-atom + single-mode Hamiltonian on the 18-state space (lab frame).

    Photon number is truncated to {0, 1}; the laser phases e^{+/- i phi_i(t)}
    are explicit.
    """
    s = pulses_at(geometry, physics, t)
    phi1 = optical_phase(geometry, physics, 1, s.t)
    phi2 = optical_phase(geometry, physics, 2, s.t)
    return _assemble_full(s, phi1, phi2, physics.resonance(geometry))


def interaction_hamiltonian(geometry: GeometryParams, physics: PhysicalParams, t: TimeLike) -> np.ndarray:
    """
    Full Hamiltonian in the interaction picture of omega (sum |e><e| + a^dagger a).

    The laser phases reduce to their Doppler part; populations are identical
    to the lab frame.
    """
    s = pulses_at(geometry, physics, t)
    return _assemble_full(s, doppler_phase(geometry, 1, s.t), doppler_phase(geometry, 2, s.t), 0.0)


class EffectiveHamiltonian:
    """Time -> effective Hamiltonian on subspace S (vectorized over time grids)."""

    basis: Basis = SUBSPACE_S

    def __init__(self, geometry: GeometryParams, physics: PhysicalParams):
        self.geometry = geometry
        self.physics = physics

    def __call__(self, t: TimeLike) -> np.ndarray:
        return effective_hamiltonian(pulses_at(self.geometry, self.physics, t))


class FullHamiltonian:
    """Time -> 18-state Hamiltonian in the requested frame."""

    basis: Basis = FULL_SPACE

    def __init__(self, geometry: GeometryParams, physics: PhysicalParams, frame: str = "interaction"):
        if frame not in FRAMES:
            raise ValueError(f"frame must be one of {FRAMES} (got {frame!r})")
        self.geometry = geometry
        self.physics = physics
        self.frame = frame

    def __call__(self, t: TimeLike) -> np.ndarray:
        if self.frame == "lab":
            return full_hamiltonian(self.geometry, self.physics, t)
        return interaction_hamiltonian(self.geometry, self.physics, t)
