"""
Parameter Scan Module

Scans the atom-1 plane offset z0 and the laser offset d, one full propagation
of the effective model per grid cell, and locates the half-transfer operating
point, optionally refined off the grid.

Cells are independent work items. They run in a ProcessPoolExecutor (or
in-process for a single worker) and are assembled by grid index, so the
result does not depend on the worker count or completion order.
"""

import os
import math
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from itertools import repeat
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.optimize import minimize

from config.settings import (
    OBJECTIVE_WEIGHT,
    OPERATING_POINT_FIDELITY_MIN,
    REFINE_FIDELITY_PENALTY,
    REFINE_INVALID_OBJECTIVE,
    REFINE_MAX_EVALUATIONS,
    SWEEP_METRICS,
    TARGET_ANGLE_BY_SCENARIO,
    Z0_STEPS_PER_WAVELENGTH,
    settings,
)
from src.analysis.entanglement import UndefinedConcurrenceError, concurrence, target_fidelity
from src.dynamics.propagator import IntegrationError, IntegratorOptions, propagate
from src.dynamics.states import initial_state
from src.model.basis import G1G2_0, INTERMEDIATE_LABELS
from src.model.hamiltonians import EffectiveHamiltonian
from src.model.parameters import GeometryParams, PhysicalParams

logger = logging.getLogger(__name__)

Resolution = Union[int, Tuple[int, int]]


class NoViablePointError(Exception):
    """Raised when no valid cell reaches the target fidelity."""
    pass


@dataclass
class SweepGrid:
    """
    One metric on the (z0, d) grid.

    values[i, j] belongs to (z0_axis[i], d_axis[j]); invalid cells are NaN.
    """
    z0_axis: np.ndarray
    d_axis: np.ndarray
    metric: str
    values: np.ndarray

    def __post_init__(self):
        self.z0_axis = np.asarray(self.z0_axis, dtype=float)
        self.d_axis = np.asarray(self.d_axis, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        for name, axis in (("z0_axis", self.z0_axis), ("d_axis", self.d_axis)):
            if axis.ndim != 1 or axis.size < 1:
                raise ValueError(f"{name} must be a non-empty 1-D array")
            if np.any(np.diff(axis) <= 0):
                raise ValueError(f"{name} must be strictly increasing")
        expected = (self.z0_axis.size, self.d_axis.size)
        if self.values.shape != expected:
            raise ValueError(f"values has shape {self.values.shape}, axes give {expected}")

    @property
    def valid(self) -> np.ndarray:
        return ~np.isnan(self.values)

    def to_frame(self) -> pd.DataFrame:
        """Grid as a table indexed by z0 with one column per d."""
        return pd.DataFrame(
            self.values,
            index=pd.Index(self.z0_axis, name="z0"),
            columns=pd.Index(self.d_axis, name="d"),
        )


@dataclass(frozen=True)
class OperatingPoint:
    """
    Best (z0, d) under the composite half-transfer objective.

    `refined` marks a point moved off the grid by `refine_operating_point`.
    """
    z0: float
    d: float
    objective: float
    final_populations: Dict[str, float]
    fidelity: float = float("nan")
    concurrence: float = float("nan")
    refined: bool = False


def grid_axes(z0_range: Sequence[float], d_range: Sequence[float], resolution: Resolution):
    """
    Evenly spaced scan axes.

    Args:
        z0_range: (min, max) in metres
        d_range: (min, max) in metres
        resolution: points per axis, or (n_z0, n_d)

    Returns:
        Tuple (z0_axis, d_axis)
    """
    n_z0, n_d = (resolution, resolution) if isinstance(resolution, int) else resolution
    for name, (lo, hi), n in (("z0_range", z0_range, n_z0), ("d_range", d_range, n_d)):
        if not hi > lo:
            raise ValueError(f"{name} must have positive length (got {lo!r}, {hi!r})")
        if n < 2:
            raise ValueError(f"resolution must be >= 2 per axis (got {n!r} for {name})")
    return np.linspace(z0_range[0], z0_range[1], n_z0), np.linspace(d_range[0], d_range[1], n_d)


def z0_undersampled(z0_axis: np.ndarray, wavelength: float) -> bool:
    """True when the z0 step exceeds lambda / 8, so the coupling nodes can fall between cells."""
    if len(z0_axis) < 2:
        return False
    return float(np.max(np.diff(z0_axis))) > wavelength / Z0_STEPS_PER_WAVELENGTH


def evaluate_cell(geometry: GeometryParams, physics: PhysicalParams,
                  opts: Optional[IntegratorOptions] = None,
                  target_angle: float = TARGET_ANGLE_BY_SCENARIO["half_stirap"]) -> Dict[str, float]:
    """
    Propagate one configuration from |g1,g2,0> and collect the final-time metrics.

    Integration failures are reported as valid = False with NaN metrics.
    """
    row: Dict[str, float] = {"z0": geometry.z0, "d": geometry.d, "valid": True}
    try:
        trace = propagate(EffectiveHamiltonian(geometry, physics), initial_state(), opts)
    except IntegrationError as e:
        logger.debug(f"Cell z0={geometry.z0:.3g}, d={geometry.d:.3g} invalid: {e}")
        row.update({"valid": False, "error": str(e)})
        row.update({metric: float("nan") for metric in SWEEP_METRICS})
        return row

    final = trace.final_populations()
    psi = trace.final_state
    row.update({f"P({label})": value for label, value in final.items()})
    row["half_deviation"] = abs(0.5 - final[G1G2_0])
    row["intermediate"] = sum(final[label] for label in INTERMEDIATE_LABELS)
    row["fidelity"] = target_fidelity(psi, target_angle)
    try:
        row["concurrence"] = concurrence(psi)
    except UndefinedConcurrenceError:
        row["concurrence"] = float("nan")
    row["error"] = ""
    return row


def _evaluate_task(task, opts, target_angle):
    key, geometry, physics = task
    row = evaluate_cell(geometry, physics, opts, target_angle)
    row.update(key)
    return row


def _resolve_workers(workers: Optional[int]) -> int:
    n = settings.workers if workers is None else workers
    if n <= 0:
        n = os.cpu_count() or 1
    return n


def evaluate_many(tasks, opts: Optional[IntegratorOptions] = None,
                  target_angle: float = TARGET_ANGLE_BY_SCENARIO["half_stirap"],
                  workers: Optional[int] = None):
    """
    Evaluate (key, geometry, physics) tasks, in input order.

    `key` is a dict merged into each result row (e.g. {"i": 0, "j": 3}).
    """
    tasks = list(tasks)
    n_workers = min(_resolve_workers(workers), len(tasks))
    if n_workers <= 1:
        return [_evaluate_task(task, opts, target_angle) for task in tasks]
    chunksize = max(1, math.ceil(len(tasks) / (4 * n_workers)))
    with ProcessPoolExecutor(max_workers=n_workers) as ex:
        return list(ex.map(_evaluate_task, tasks, repeat(opts), repeat(target_angle), chunksize=chunksize))


def scan_cells(g_template: GeometryParams, physics: PhysicalParams,
               z0_axis: np.ndarray, d_axis: np.ndarray,
               opts: Optional[IntegratorOptions] = None,
               target_angle: float = TARGET_ANGLE_BY_SCENARIO["half_stirap"],
               workers: Optional[int] = None) -> pd.DataFrame:
    """
    Evaluate every (z0, d) cell.

    Args:
        g_template: Geometry whose z0 and d are replaced per cell
        physics: Couplings shared by all cells
        z0_axis, d_axis: Scan axes (m)
        opts: Integrator options for each cell
        target_angle: Mixing angle of the fidelity target
        workers: Process count (None: Settings.workers, 0: one per CPU, 1: in-process)

    Returns:
        Cell table sorted by (i, j) with columns z0, d, i, j, valid, error,
        the final populations and the scan metrics
    """
    tasks = [
        ({"i": i, "j": j}, replace(g_template, z0=float(z0), d=float(d)), physics)
        for i, z0 in enumerate(z0_axis)
        for j, d in enumerate(d_axis)
    ]
    logger.info(f"Scanning {len(z0_axis)} x {len(d_axis)} cells")
    if z0_undersampled(z0_axis, g_template.wavelength):
        logger.warning(
            f"z0 step {np.max(np.diff(z0_axis)):.3g} m exceeds lambda/{Z0_STEPS_PER_WAVELENGTH} "
            f"= {g_template.wavelength / Z0_STEPS_PER_WAVELENGTH:.3g} m; narrow half-transfer regions may be missed"
        )
    rows = evaluate_many(tasks, opts, target_angle, workers)

    cells = pd.DataFrame(rows).sort_values(["i", "j"], kind="stable").reset_index(drop=True)
    n_invalid = int((~cells["valid"].astype(bool)).sum())
    if n_invalid:
        logger.warning(f"{n_invalid} of {len(cells)} cells failed to integrate and are marked invalid")
    return cells


def grid_from_cells(cells: pd.DataFrame, z0_axis: np.ndarray, d_axis: np.ndarray, metric: str) -> SweepGrid:
    """Arrange one metric column of a cell table on the grid (invalid cells -> NaN)."""
    if metric not in SWEEP_METRICS:
        raise ValueError(f"metric must be one of {SWEEP_METRICS} (got {metric!r})")
    values = np.full((len(z0_axis), len(d_axis)), np.nan)
    valid = cells[cells["valid"].astype(bool)]
    values[valid["i"].to_numpy(dtype=int), valid["j"].to_numpy(dtype=int)] = valid[metric].to_numpy(dtype=float)
    return SweepGrid(z0_axis=z0_axis, d_axis=d_axis, metric=metric, values=values)


def scan2d(g_template: GeometryParams, physics: PhysicalParams,
           z0_range: Sequence[float], d_range: Sequence[float], resolution: Resolution,
           metric: str = "half_deviation",
           opts: Optional[IntegratorOptions] = None,
           target_angle: float = TARGET_ANGLE_BY_SCENARIO["half_stirap"],
           workers: Optional[int] = None) -> SweepGrid:
    """
    Scan (z0, d) and return one metric as a grid.

    Metrics: half_deviation |0.5 - P(g1,g2,0)|, intermediate (summed final
    population of the three intermediate states), fidelity, concurrence.
    """
    if metric not in SWEEP_METRICS:
        raise ValueError(f"metric must be one of {SWEEP_METRICS} (got {metric!r})")
    z0_axis, d_axis = grid_axes(z0_range, d_range, resolution)
    cells = scan_cells(g_template, physics, z0_axis, d_axis, opts, target_angle, workers)
    return grid_from_cells(cells, z0_axis, d_axis, metric)


def _point_from_row(row, objective: float, refined: bool = False) -> OperatingPoint:
    populations = {
        str(key)[2:-1]: float(value) for key, value in row.items()
        if str(key).startswith("P(") and str(key).endswith(")")
    }
    return OperatingPoint(
        z0=float(row["z0"]),
        d=float(row["d"]),
        objective=objective,
        final_populations=populations,
        fidelity=float(row["fidelity"]),
        concurrence=float(row.get("concurrence", float("nan"))),
        refined=refined,
    )


def find_operating_point(cells: pd.DataFrame, weight: float = OBJECTIVE_WEIGHT,
                         min_fidelity: float = OPERATING_POINT_FIDELITY_MIN) -> OperatingPoint:
    """
    Argmin of half_deviation + weight * intermediate over the accepted cells.

    A cell is accepted when it integrated and its target fidelity is at least
    `min_fidelity`; population balance alone cannot tell the target
    superposition from the opposite-sign one. Ties are broken by smaller d,
    then smaller z0.

    Args:
        cells: Cell table from `scan_cells`
        weight: Weight of the intermediate-population term
        min_fidelity: Fidelity floor (0 disables the gate)

    Raises:
        NoViablePointError: If no cell is valid or none reaches min_fidelity
    """
    valid = cells[cells["valid"].astype(bool)].copy()
    valid = valid[np.isfinite(valid["half_deviation"]) & np.isfinite(valid["intermediate"])]
    if valid.empty:
        raise NoViablePointError("Every cell of the scan is invalid; no operating point")
    n_valid = len(valid)
    valid = valid[valid["fidelity"].to_numpy(dtype=float) >= min_fidelity]
    if valid.empty:
        raise NoViablePointError(
            f"None of {n_valid} valid cells reaches target fidelity {min_fidelity:.3g}; no operating point"
        )

    valid["objective"] = valid["half_deviation"] + weight * valid["intermediate"]
    best = valid.sort_values(["objective", "d", "z0"], kind="stable").iloc[0]
    point = _point_from_row(best, float(best["objective"]))
    logger.info(
        f"Operating point z0={point.z0:.4g} m, d={point.d:.4g} m, "
        f"objective={point.objective:.4g}, fidelity={point.fidelity:.4g}"
    )
    return point


def refine_operating_point(point: OperatingPoint, g_template: GeometryParams, physics: PhysicalParams,
                           z0_step: float, d_step: float,
                           opts: Optional[IntegratorOptions] = None,
                           weight: float = OBJECTIVE_WEIGHT,
                           min_fidelity: float = OPERATING_POINT_FIDELITY_MIN,
                           target_angle: float = TARGET_ANGLE_BY_SCENARIO["half_stirap"],
                           max_evaluations: int = REFINE_MAX_EVALUATIONS) -> OperatingPoint:
    """
    Polish a grid operating point off the grid.

    Bounded Nelder-Mead over (z0, d) within one grid step of `point`, on the
    same objective plus a penalty on any fidelity shortfall below
    `min_fidelity`. Each evaluation is one propagation. The grid point is
    returned unchanged unless an evaluated point beats it and reaches
    `min_fidelity`.

    Args:
        point: Operating point from `find_operating_point`
        g_template: Geometry whose z0 and d are replaced
        physics: Couplings of the scan
        z0_step, d_step: Grid spacing (m); sets the search box and the initial simplex
        opts: Integrator options for each evaluation
        weight: Weight of the intermediate-population term
        min_fidelity: Fidelity floor of accepted points
        target_angle: Mixing angle of the fidelity target
        max_evaluations: Propagation budget

    Returns:
        The best accepted point (refined = True when it moved)
    """
    if not (z0_step > 0 and d_step > 0):
        raise ValueError(f"grid steps must be > 0 (got {z0_step!r}, {d_step!r})")
    origin = np.array([point.z0, point.d])
    scale = np.array([z0_step, d_step])
    best = {"objective": point.objective, "row": None}

    def objective(u: np.ndarray) -> float:
        z0, d = origin + u * scale
        row = evaluate_cell(replace(g_template, z0=float(z0), d=float(d)), physics, opts, target_angle)
        if not row["valid"]:
            return REFINE_INVALID_OBJECTIVE
        value = row["half_deviation"] + weight * row["intermediate"]
        if row["fidelity"] >= min_fidelity and value < best["objective"]:
            best.update(objective=value, row=row)
        return value + REFINE_FIDELITY_PENALTY * max(0.0, min_fidelity - row["fidelity"])

    minimize(
        objective,
        x0=np.zeros(2),
        method="Nelder-Mead",
        bounds=[(-1.0, 1.0), (-1.0, 1.0)],
        options={
            "initial_simplex": np.array([[0.0, 0.0], [0.5, 0.0], [0.0, 0.5]]),
            "maxfev": max_evaluations,
            "xatol": 1e-3,
            "fatol": 1e-5,
        },
    )
    if best["row"] is None:
        logger.info("Refinement kept the grid operating point")
        return point
    refined = _point_from_row(pd.Series(best["row"]), float(best["objective"]), refined=True)
    logger.info(
        f"Refined operating point z0={refined.z0:.6g} m, d={refined.d:.6g} m, "
        f"objective={refined.objective:.4g}, fidelity={refined.fidelity:.4g}"
    )
    return refined
