"""
State Vectors

Complex amplitudes over a labelled basis, with constructors for the initial
states used by the scenarios.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Mapping

import numpy as np

from src.model.basis import Basis, SUBSPACE_S, FULL_SPACE, G1G2_0, G2G2_0, embed_in_full

NORM_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class StateVector:
    """Amplitudes over a basis; unit norm at construction unless check_norm is False."""
    basis: Basis
    amplitudes: np.ndarray
    check_norm: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != len(self.basis):
            raise ValueError(
                f"{len(amps)} amplitudes given for the {len(self.basis)}-state {self.basis.name} basis"
            )
        object.__setattr__(self, "amplitudes", amps)
        if self.check_norm and abs(self.norm - 1.0) > NORM_TOLERANCE:
            raise ValueError(f"State is not normalized (norm = {self.norm:.12g})")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def amplitude(self, label: str) -> complex:
        return complex(self.amplitudes[self.basis.index(label)])

    @classmethod
    def basis_state(cls, basis: Basis, label: str) -> "StateVector":
        amps = np.zeros(len(basis), dtype=complex)
        amps[basis.index(label)] = 1.0
        return cls(basis, amps)

    @classmethod
    def from_mapping(cls, basis: Basis, amplitudes: Mapping[str, complex], normalize: bool = False) -> "StateVector":
        """Build a state from {label: amplitude}; unlisted states are zero."""
        amps = np.zeros(len(basis), dtype=complex)
        for label, value in amplitudes.items():
            amps[basis.index(label)] = value
        if normalize:
            n = np.linalg.norm(amps)
            if n == 0:
                raise ValueError("Cannot normalize the zero vector")
            amps = amps / n
        return cls(basis, amps)


def initial_state(alpha: complex = 1.0, beta: complex = 0.0) -> StateVector:
    """
    alpha |g1,g2,0> + beta |g2,g2,0>.

    With beta = 0 this is the subspace-S start state; otherwise |g2,g2,0> lies
    outside S and the state lives in the full 18-state space.
    """
    weight = abs(alpha) ** 2 + abs(beta) ** 2
    if not math.isclose(weight, 1.0, abs_tol=NORM_TOLERANCE):
        raise ValueError(f"|alpha|^2 + |beta|^2 must equal 1 (got {weight:.12g})")
    if beta == 0:
        return StateVector.from_mapping(SUBSPACE_S, {G1G2_0: alpha})
    return StateVector.from_mapping(FULL_SPACE, {G1G2_0: alpha, G2G2_0: beta})


def populations(psi: StateVector) -> Dict[str, float]:
    """
    Probability per basis label, |<label|psi>|^2.

    The values sum to ||psi||^2.
    """
    probs = np.abs(psi.amplitudes) ** 2
    return {label: float(p) for label, p in zip(psi.basis.labels, probs)}


def to_full_space(psi: StateVector) -> StateVector:
    """Lift a subspace-S state into the 18-state space (identity for full-space states)."""
    if psi.basis == FULL_SPACE:
        return psi
    if psi.basis != SUBSPACE_S:
        raise ValueError(f"Cannot lift a state of the {psi.basis.name} basis")
    return StateVector(FULL_SPACE, embed_in_full(psi.amplitudes), check_norm=psi.check_norm)
