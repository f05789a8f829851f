"""
Fidelity & Entanglement

Overlap with the target cos(theta)|g1,g2,0> + sin(theta)|g2,g1,0> and the
Wootters concurrence of the two atomic qubits {g1, g2} with the cavity traced
out.
"""

import numpy as np

from config.settings import CONCURRENCE_MIN_WEIGHT
from src.dynamics.states import StateVector, to_full_space
from src.model.basis import G1G2_0, G2G1_0

_SIGMA_Y = np.array([[0.0, -1j], [1j, 0.0]])
_SIGMA_YY = np.kron(_SIGMA_Y, _SIGMA_Y)


class UndefinedConcurrenceError(Exception):
    """Raised when the state has (almost) no weight in the two-qubit ground subspace."""
    pass


def target_fidelity(psi: StateVector, theta: float) -> float:
    """|<target(theta)|psi>|^2 with target = cos(theta)|g1,g2,0> + sin(theta)|g2,g1,0>."""
    overlap = np.cos(theta) * psi.amplitude(G1G2_0) + np.sin(theta) * psi.amplitude(G2G1_0)
    return float(abs(overlap) ** 2)


def qubit_density_matrix(psi: StateVector):
    """
    Two-qubit density matrix of the ground levels (g1 -> 0, g2 -> 1), cavity traced out.

    Returns:
        Tuple (rho, weight): rho renormalized to unit trace, weight its trace before renormalizing
    """
    full = to_full_space(psi)
    index = full.basis.ground_qubit_indices()
    rho = np.zeros((4, 4), dtype=complex)
    for n in (0, 1):
        block = np.array([full.amplitudes[index[(q1, q2, n)]] for q1 in (0, 1) for q2 in (0, 1)])
        rho += np.outer(block, np.conj(block))
    weight = float(np.real(np.trace(rho)))
    if weight < CONCURRENCE_MIN_WEIGHT:
        raise UndefinedConcurrenceError(
            f"Only {weight:.3g} of the state lies in the two-qubit ground subspace"
        )
    return rho / weight, weight


def concurrence(psi: StateVector) -> float:
    """
    Wootters concurrence of the projected two-qubit state.

    C = max(0, l1 - l2 - l3 - l4), l_i the decreasing square roots of the
    eigenvalues of rho (sy x sy) rho* (sy x sy).
    """
    rho, _ = qubit_density_matrix(psi)
    rho_tilde = rho @ _SIGMA_YY @ np.conj(rho) @ _SIGMA_YY
    evals = np.sort(np.abs(np.real(np.linalg.eigvals(rho_tilde))))[::-1]
    lam = np.sqrt(evals)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))
