"""
Basis Labels

Labels are "A1,A2,n" with A in {g1, e, g2} and n the cavity photon number.
The five-state subspace S keeps the row/column order of the projected
Hamiltonian; the full space is the 18-state product {g1,e,g2}^2 x {0,1}.
"""

from dataclasses import dataclass, field
from itertools import product
from typing import Dict, Tuple

import numpy as np

ATOM_LEVELS: Tuple[str, ...] = ("g1", "e", "g2")
PHOTON_NUMBERS: Tuple[int, ...] = (0, 1)

G1G2_0 = "g1,g2,0"
EG2_0 = "e,g2,0"
G2G2_1 = "g2,g2,1"
G2E_0 = "g2,e,0"
G2G1_0 = "g2,g1,0"
G2G2_0 = "g2,g2,0"

INTERMEDIATE_LABELS: Tuple[str, ...] = (EG2_0, G2G2_1, G2E_0)


@dataclass(frozen=True)
class Basis:
    """Ordered set of basis labels with level bookkeeping."""
    name: str
    labels: Tuple[str, ...]
    _index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {label: i for i, label in enumerate(self.labels)})

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label: str) -> bool:
        return label in self._index

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"'{label}' is not a state of the {self.name} basis") from None

    @staticmethod
    def _split(label: str) -> Tuple[str, str, int]:
        a1, a2, n = label.split(",")
        return a1, a2, int(n)

    @property
    def excited_count(self) -> np.ndarray:
        """Number of excited atoms per basis state."""
        return np.array([sum(a == "e" for a in self._split(lbl)[:2]) for lbl in self.labels], dtype=float)

    @property
    def photon_count(self) -> np.ndarray:
        """Cavity photon number per basis state."""
        return np.array([self._split(lbl)[2] for lbl in self.labels], dtype=float)

    def ground_qubit_indices(self) -> Dict[Tuple[int, int, int], int]:
        """
        Map (qubit1, qubit2, n) -> basis index for states with both atoms in a ground level.

        Qubit value 0 is g1, value 1 is g2.
        """
        qubit = {"g1": 0, "g2": 1}
        out = {}
        for i, lbl in enumerate(self.labels):
            a1, a2, n = self._split(lbl)
            if a1 in qubit and a2 in qubit:
                out[(qubit[a1], qubit[a2], n)] = i
        return out


SUBSPACE_S = Basis("subspace-S", (G1G2_0, EG2_0, G2G2_1, G2E_0, G2G1_0))

FULL_SPACE = Basis(
    "full",
    tuple(f"{a1},{a2},{n}" for a1, a2, n in product(ATOM_LEVELS, ATOM_LEVELS, PHOTON_NUMBERS)),
)

# Positions of the S states inside the full space
S_IN_FULL = np.array([FULL_SPACE.index(lbl) for lbl in SUBSPACE_S.labels])


def column_order(basis: Basis) -> Tuple[str, ...]:
    """Labels with the S states first (in S order), then the rest in basis order."""
    head = tuple(lbl for lbl in SUBSPACE_S.labels if lbl in basis)
    return head + tuple(lbl for lbl in basis.labels if lbl not in head)


def basis_for_dimension(dim: int) -> Basis:
    """Basis matching a Hamiltonian dimension (5 or 18)."""
    if dim == len(SUBSPACE_S):
        return SUBSPACE_S
    if dim == len(FULL_SPACE):
        return FULL_SPACE
    raise ValueError(f"No labelled basis of dimension {dim}")


def embed_in_full(amplitudes: np.ndarray) -> np.ndarray:
    """Embed subspace-S amplitudes (last axis of length 5) into the 18-state space."""
    amplitudes = np.asarray(amplitudes)
    out = np.zeros(amplitudes.shape[:-1] + (len(FULL_SPACE),), dtype=complex)
    out[..., S_IN_FULL] = amplitudes
    return out
