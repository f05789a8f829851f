"""
Non-Hermitian Loss Diagnostic

Adds -i Gamma/2 per excited atom and -i kappa/2 per cavity photon to a
Hamiltonian. Evolution under the result is the no-jump branch of a quantum
trajectory: the norm decreases and 1 - ||psi(t_end)||^2 estimates the
probability that a spontaneous emission or a cavity photon loss occurred.
"""

import numpy as np

from src.model.basis import basis_for_dimension
from src.model.parameters import PhysicalParams
from .propagator import HamiltonianFn


class LossyHamiltonian:
    """H(t) - i (Gamma/2) N_excited - i (kappa/2) N_photon."""

    def __init__(self, hamiltonian_fn: HamiltonianFn, kappa: float, Gamma: float, basis=None):
        if kappa < 0 or Gamma < 0:
            raise ValueError(f"Loss rates must be >= 0 (got kappa={kappa!r}, Gamma={Gamma!r})")
        self.inner = hamiltonian_fn
        self.kappa = kappa
        self.Gamma = Gamma
        self.basis = basis or getattr(hamiltonian_fn, "basis", None)
        self.geometry = getattr(hamiltonian_fn, "geometry", None)
        self._decay = None
        if self.basis is not None:
            self._decay = self._decay_diagonal(self.basis)

    def _decay_diagonal(self, basis) -> np.ndarray:
        return 0.5 * self.Gamma * basis.excited_count + 0.5 * self.kappa * basis.photon_count

    def __call__(self, t) -> np.ndarray:
        H = np.asarray(self.inner(t), dtype=complex)
        decay = self._decay
        if decay is None:
            decay = self._decay_diagonal(basis_for_dimension(H.shape[-1]))
        if not decay.any():
            return H
        return H - 1j * np.diag(decay)


def with_losses(hamiltonian_fn: HamiltonianFn, physics: PhysicalParams) -> HamiltonianFn:
    """
    Wrap a Hamiltonian with the decay rates of `physics`.

    With kappa = Gamma = 0 the wrapped callable returns the original matrices.
    """
    return LossyHamiltonian(hamiltonian_fn, physics.kappa, physics.Gamma)
