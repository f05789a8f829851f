"""
Schrodinger Propagator

Integrates i d|psi>/dt = H(t)|psi> for the effective (5-state) or full
(18-state) model and records populations on a fixed output grid.

Backends:
- "rk4": classical 4th-order Runge-Kutta with a fixed step. The RK4 update is
  linear in psi, so the step matrices are built for a whole block of steps at
  once and multiplied into one propagator per output interval.
- "adaptive": scipy's DOP853 with dense sampling at the output grid.

Every accepted run passes a refinement test: the populations of the run and
of a run with half the step (or 16x tighter tolerances) differ by less than
the convergence tolerance at every output time.
"""

import math
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Optional

import numpy as np
import pandas as pd
from scipy.integrate import solve_ivp

from config.settings import (
    INTEGRATION_WINDOW_WAISTS,
    STEPS_PER_RADIAN,
    CONVERGENCE_TOLERANCE,
    MAX_REFINEMENTS,
    OUTPUT_SAMPLES,
    ADAPTIVE_RTOL,
    ADAPTIVE_ATOL,
    ADAPTIVE_TOLERANCE_DIVISOR,
    PROPAGATOR_BLOCK_BYTES,
)
from src.model.basis import Basis, column_order
from src.model.hamiltonians import FullHamiltonian
from src.model.parameters import GeometryParams, PhysicalParams
from .states import StateVector

logger = logging.getLogger(__name__)

HamiltonianFn = Callable[[np.ndarray], np.ndarray]

METHODS = ("rk4", "adaptive")


class IntegrationError(Exception):
    """Raised when the refinement test cannot be met."""

    def __init__(self, message: str, achieved_tolerance: float = float("nan")):
        super().__init__(message)
        self.achieved_tolerance = achieved_tolerance


@dataclass(frozen=True)
class IntegratorOptions:
    """
    Integration window, step control and output sampling.

    t_start/t_end default to the pulse window of the geometry; step defaults to
    1 / (50 max_t ||H(t)||). The convergence tolerance is the largest accepted
    population change when the step is halved.
    """
    t_start: Optional[float] = None
    t_end: Optional[float] = None
    step: Optional[float] = None
    method: str = "rk4"
    convergence_tolerance: float = CONVERGENCE_TOLERANCE
    max_refinements: int = MAX_REFINEMENTS
    output_samples: int = OUTPUT_SAMPLES
    check_convergence: bool = True
    rtol: float = ADAPTIVE_RTOL
    atol: float = ADAPTIVE_ATOL

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS} (got {self.method!r})")
        if self.t_start is not None and self.t_end is not None and not self.t_end > self.t_start:
            raise ValueError(f"t_end must be > t_start (got {self.t_start!r}, {self.t_end!r})")
        if self.step is not None and not self.step > 0:
            raise ValueError(f"step must be > 0 (got {self.step!r})")
        if self.output_samples < 2:
            raise ValueError(f"output_samples must be >= 2 (got {self.output_samples!r})")
        if self.max_refinements < 1:
            raise ValueError(f"max_refinements must be >= 1 (got {self.max_refinements!r})")
        if not self.convergence_tolerance > 0:
            raise ValueError(f"convergence_tolerance must be > 0 (got {self.convergence_tolerance!r})")

    @property
    def adaptive(self) -> bool:
        return self.method == "adaptive"

    def resolved(self, geometry: Optional[GeometryParams]) -> "IntegratorOptions":
        """Fill a missing window from the geometry's default pulse window."""
        if self.t_start is not None and self.t_end is not None:
            return self
        if geometry is None:
            raise ValueError("t_start/t_end are required when the Hamiltonian carries no geometry")
        start, end = integration_window(geometry)
        return replace(
            self,
            t_start=start if self.t_start is None else self.t_start,
            t_end=end if self.t_end is None else self.t_end,
        )


@dataclass
class SimulationTrace:
    """Sampled evolution: amplitudes, populations, norm and dark-state overlap."""
    times: np.ndarray
    amplitudes: np.ndarray
    basis: Basis
    steps_per_sample: int = 0
    achieved_tolerance: float = float("nan")
    dark_overlap: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.dark_overlap is None:
            self.dark_overlap = np.full(len(self.times), np.nan)

    @property
    def populations(self) -> np.ndarray:
        """|amplitude|^2, shape (n_times, n_states)."""
        return np.abs(self.amplitudes) ** 2

    @property
    def norm(self) -> np.ndarray:
        """||psi(t)||."""
        return np.linalg.norm(self.amplitudes, axis=1)

    @property
    def final_state(self) -> StateVector:
        return StateVector(self.basis, self.amplitudes[-1], check_norm=False)

    def population(self, label: str) -> np.ndarray:
        return self.populations[:, self.basis.index(label)]

    def final_populations(self) -> Dict[str, float]:
        last = self.populations[-1]
        return {label: float(p) for label, p in zip(self.basis.labels, last)}

    def to_frame(self) -> pd.DataFrame:
        """
        Table with columns t, P(<label>) per basis state, norm and dark_overlap.

        The five S-state columns come first in S order; full-space runs append
        the other 13 labels after them. The norm column holds ||psi||^2 (the
        total probability), i.e. the sum of the population columns.
        """
        pops = self.populations
        data = {"t": self.times}
        for label in column_order(self.basis):
            data[f"P({label})"] = pops[:, self.basis.index(label)]
        data["norm"] = pops.sum(axis=1)
        data["dark_overlap"] = self.dark_overlap
        return pd.DataFrame(data)


def integration_window(geometry: GeometryParams):
    """
    Window with every pulse below 1e-6 of its peak at both ends.

    t_start = min(-5 W_C/v, tau - 5 W_C/v, (-d - 5 W_L)/v + min(0, tau)), and
    symmetrically for t_end.
    """
    g = geometry
    v = min(g.v1, g.v2)
    n = INTEGRATION_WINDOW_WAISTS
    d = abs(g.d)
    t_start = min(-n * g.waist_cavity / v, g.tau - n * g.waist_cavity / v, (-d - n * g.waist_laser) / v + min(0.0, g.tau))
    t_end = max(n * g.waist_cavity / v, g.tau + n * g.waist_cavity / v, (d + n * g.waist_laser) / v + max(0.0, g.tau))
    return t_start, t_end


def _evaluate(hamiltonian_fn: HamiltonianFn, times: np.ndarray, dim: int) -> np.ndarray:
    """Hamiltonian on a time grid; constant (2-D) results are broadcast."""
    H = np.asarray(hamiltonian_fn(times))
    if H.ndim == 2:
        H = np.broadcast_to(H, (len(times),) + H.shape)
    if H.shape != (len(times), dim, dim):
        raise ValueError(f"Hamiltonian has shape {H.shape[1:]}, state dimension is {dim}")
    return H


def _max_row_norm(H: np.ndarray) -> float:
    """max_t ||H(t)||_inf (largest absolute row sum)."""
    return float(np.abs(H).sum(axis=-1).max())


def _rk4_step_matrices(H0: np.ndarray, Hm: np.ndarray, H1: np.ndarray, h: float) -> np.ndarray:
    """Batch of RK4 update matrices P with psi_{n+1} = P psi_n for dpsi/dt = -i H psi."""
    A0, Am, A1 = -1j * H0, -1j * Hm, -1j * H1
    eye = np.eye(H0.shape[-1])
    K1 = A0
    K2 = Am @ (eye + 0.5 * h * K1)
    K3 = Am @ (eye + 0.5 * h * K2)
    K4 = A1 @ (eye + h * K3)
    return eye + (h / 6.0) * (K1 + 2.0 * K2 + 2.0 * K3 + K4)


def _ordered_product(P: np.ndarray) -> np.ndarray:
    """Reduce (n_seg, m, d, d) step matrices to P_{m-1} ... P_1 P_0 per segment."""
    while P.shape[1] > 1:
        carry = None
        if P.shape[1] % 2:
            carry = P[:, -1:]
            P = P[:, :-1]
        P = P[:, 1::2] @ P[:, 0::2]
        if carry is not None:
            P = np.concatenate([P, carry], axis=1)
    return P[:, 0]


def _run_rk4(hamiltonian_fn: HamiltonianFn, psi0: np.ndarray, t_out: np.ndarray, m: int) -> np.ndarray:
    dim = psi0.shape[0]
    n_seg = len(t_out) - 1
    t_start, t_end = t_out[0], t_out[-1]
    h = (t_end - t_start) / (n_seg * m)
    bytes_per_segment = m * dim * dim * 16 * 8
    block = max(1, PROPAGATOR_BLOCK_BYTES // bytes_per_segment)

    out = np.empty((len(t_out), dim), dtype=complex)
    out[0] = psi0
    psi = psi0
    for first in range(0, n_seg, block):
        last = min(n_seg, first + block)
        half_steps = np.arange(2 * first * m, 2 * last * m + 1)
        H = _evaluate(hamiltonian_fn, t_start + 0.5 * h * half_steps, dim)
        P = _rk4_step_matrices(H[0:-1:2], H[1::2], H[2::2], h)
        U = _ordered_product(P.reshape(last - first, m, dim, dim))
        for k in range(last - first):
            psi = U[k] @ psi
            out[first + k + 1] = psi
    return out


def _run_adaptive(hamiltonian_fn: HamiltonianFn, psi0: np.ndarray, t_out: np.ndarray,
                  rtol: float, atol: float) -> np.ndarray:
    dim = psi0.shape[0]

    def rhs(t, y):
        return -1j * (_evaluate(hamiltonian_fn, np.array([t]), dim)[0] @ y)

    sol = solve_ivp(rhs, (t_out[0], t_out[-1]), psi0, method="DOP853", t_eval=t_out, rtol=rtol, atol=atol)
    if not sol.success:
        raise IntegrationError(f"Adaptive integration failed: {sol.message}")
    return sol.y.T


def propagate(hamiltonian_fn: HamiltonianFn, psi0: StateVector, opts: Optional[IntegratorOptions] = None) -> SimulationTrace:
    """
    Integrate the Schrodinger equation and sample it on the output grid.

    Args:
        hamiltonian_fn: Callable mapping a 1-D time array to stacked matrices
            (n, d, d); a constant (d, d) result is accepted
        psi0: Initial state (basis dimension must match the Hamiltonian)
        opts: Integrator options (window defaults to the Hamiltonian's geometry)

    Returns:
        SimulationTrace of the refined (accepted) run

    Raises:
        IntegrationError: If the refinement test still fails after max_refinements
    """
    opts = (opts or IntegratorOptions()).resolved(getattr(hamiltonian_fn, "geometry", None))
    model_basis = getattr(hamiltonian_fn, "basis", None)
    if model_basis is not None and len(model_basis) != psi0.dimension:
        raise ValueError(f"Initial state has {psi0.dimension} states, Hamiltonian basis has {len(model_basis)}")

    t_out = np.linspace(opts.t_start, opts.t_end, opts.output_samples)
    psi_init = psi0.amplitudes.astype(complex)

    if opts.adaptive:
        def run(level: int) -> np.ndarray:
            scale = ADAPTIVE_TOLERANCE_DIVISOR ** level
            return _run_adaptive(hamiltonian_fn, psi_init, t_out, opts.rtol / scale, opts.atol / scale)
        m = 0
    else:
        dt_out = t_out[1] - t_out[0]
        if opts.step is not None:
            m = max(1, math.ceil(dt_out / opts.step))
        else:
            norm_max = _max_row_norm(_evaluate(hamiltonian_fn, t_out, psi0.dimension))
            m = 1 if norm_max == 0 else max(1, math.ceil(dt_out * STEPS_PER_RADIAN * norm_max))

        def run(level: int) -> np.ndarray:
            return _run_rk4(hamiltonian_fn, psi_init, t_out, m * 2 ** level)

    amplitudes = run(0)
    achieved = float("nan")
    level = 0
    if opts.check_convergence:
        for level in range(1, opts.max_refinements + 1):
            refined = run(level)
            achieved = float(np.max(np.abs(np.abs(refined) ** 2 - np.abs(amplitudes) ** 2)))
            amplitudes = refined
            if achieved < opts.convergence_tolerance:
                break
            logger.debug(f"Refinement {level}: population change {achieved:.3g}")
        else:
            raise IntegrationError(
                f"No convergence after {opts.max_refinements} refinements "
                f"(population change {achieved:.3g} > {opts.convergence_tolerance:.3g})",
                achieved_tolerance=achieved,
            )

    return SimulationTrace(
        times=t_out,
        amplitudes=amplitudes,
        basis=psi0.basis,
        steps_per_sample=m * 2 ** level if m else 0,
        achieved_tolerance=achieved,
    )


def propagate_full(geometry: GeometryParams, physics: PhysicalParams, psi0_full: StateVector,
                   opts: Optional[IntegratorOptions] = None, frame: str = "interaction") -> SimulationTrace:
    """
    Integrate the 18-state model.

    Args:
        geometry: Trajectory geometry
        physics: Couplings (loss rates are ignored here; wrap with `with_losses`)
        psi0_full: Initial state in the full basis
        opts: Integrator options
        frame: "interaction" (default) or "lab"

    Returns:
        SimulationTrace over the 18 basis states
    """
    if psi0_full.dimension != 18:
        raise ValueError(f"propagate_full needs an 18-state initial state (got {psi0_full.dimension})")
    return propagate(FullHamiltonian(geometry, physics, frame), psi0_full, opts)
