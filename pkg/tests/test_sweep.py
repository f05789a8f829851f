"""
Tests for the (z0, d) scan, the operating-point search and the robustness
scans.
"""

import sys
import math
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

# Add project root to path
PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from config.settings import MICRON
from src.dynamics.propagator import IntegratorOptions, propagate
from src.dynamics.states import initial_state
from src.model.basis import G1G2_0
from src.model.hamiltonians import EffectiveHamiltonian
from src.model.parameters import PhysicalParams, reference_geometry
from src.sweep.scan import (
    NoViablePointError,
    SweepGrid,
    evaluate_cell,
    find_operating_point,
    grid_axes,
    grid_from_cells,
    refine_operating_point,
    scan2d,
    scan_cells,
    z0_undersampled,
)
from src.sweep.robustness import robustness_scan, robustness_table

# Atom 1 far outside the laser beam and the cavity mode: nothing moves.
MISS_Z0_RANGE = (200 * MICRON, 210 * MICRON)
MISS_D_RANGE = (0.0, 5 * MICRON)
FAILING_OPTS = IntegratorOptions(step=1e-3, convergence_tolerance=1e-30, max_refinements=1)


def _cells(rows):
    return pd.DataFrame([{"fidelity": 1.0, **row} for row in rows])


def test_grid_axes():
    """Axes are evenly spaced; resolution may differ per axis."""
    z0_axis, d_axis = grid_axes((0.0, 1.0), (0.0, 2.0), (3, 5))
    np.testing.assert_allclose(z0_axis, [0.0, 0.5, 1.0])
    np.testing.assert_allclose(d_axis, [0.0, 0.5, 1.0, 1.5, 2.0])

    with pytest.raises(ValueError, match="z0_range"):
        grid_axes((1.0, 1.0), (0.0, 1.0), 3)
    with pytest.raises(ValueError, match="resolution"):
        grid_axes((0.0, 1.0), (0.0, 1.0), 1)


def test_sweep_grid_validation():
    """Axes must increase strictly and match the value shape."""
    SweepGrid(z0_axis=[0.0, 1.0], d_axis=[0.0], metric="fidelity", values=np.zeros((2, 1)))
    with pytest.raises(ValueError, match="increasing"):
        SweepGrid(z0_axis=[1.0, 0.0], d_axis=[0.0], metric="fidelity", values=np.zeros((2, 1)))
    with pytest.raises(ValueError, match="shape"):
        SweepGrid(z0_axis=[0.0, 1.0], d_axis=[0.0], metric="fidelity", values=np.zeros((1, 2)))


def test_scan_without_laser_overlap():
    """Atom 1 never sees the laser: P(g1,g2,0) stays 1, so every deviation is 0.5."""
    grid = scan2d(reference_geometry(), PhysicalParams(), MISS_Z0_RANGE, MISS_D_RANGE, 2, workers=1)

    assert grid.values.shape == (2, 2)
    assert grid.valid.all()
    np.testing.assert_allclose(grid.values, 0.5, atol=1e-6)

    frame = grid.to_frame()
    assert frame.index.name == "z0"
    assert frame.columns.name == "d"


def test_scan_independent_of_worker_count():
    """In-process and two-process scans give identical cells."""
    g = reference_geometry()
    p = PhysicalParams()
    z0_axis, d_axis = grid_axes(MISS_Z0_RANGE, MISS_D_RANGE, 2)
    serial = scan_cells(g, p, z0_axis, d_axis, workers=1)
    parallel = scan_cells(g, p, z0_axis, d_axis, workers=2)

    pd.testing.assert_frame_equal(serial, parallel)
    assert list(serial["i"]) == [0, 0, 1, 1]
    assert list(serial["j"]) == [0, 1, 0, 1]


def test_cell_matches_standalone_propagation():
    """A scan cell reports the same final populations as a direct run."""
    g = reference_geometry(z0=2 * MICRON, d=4 * MICRON)
    p = PhysicalParams()
    row = evaluate_cell(g, p)
    final = propagate(EffectiveHamiltonian(g, p), initial_state()).final_populations()

    assert row["valid"]
    assert row["z0"] == g.z0 and row["d"] == g.d
    for label, value in final.items():
        assert row[f"P({label})"] == pytest.approx(value, abs=1e-12)
    assert row["half_deviation"] == pytest.approx(abs(0.5 - final[G1G2_0]), abs=1e-12)
    assert 0.0 <= row["fidelity"] <= 1.0 + 1e-9


def test_operating_point_unique_minimum():
    """The cell with the smallest composite objective wins."""
    cells = _cells([
        {"z0": 0.0, "d": 0.0, "valid": True, "half_deviation": 0.3, "intermediate": 0.0, "P(g1,g2,0)": 0.8},
        {"z0": 1.0, "d": 0.0, "valid": True, "half_deviation": 0.0, "intermediate": 0.01, "P(g1,g2,0)": 0.5},
        {"z0": 0.0, "d": 1.0, "valid": True, "half_deviation": 0.01, "intermediate": 0.2, "P(g1,g2,0)": 0.49},
    ])
    point = find_operating_point(cells)

    assert (point.z0, point.d) == (1.0, 0.0)
    assert point.objective == pytest.approx(0.01)
    assert point.final_populations == {"g1,g2,0": 0.5}


def test_operating_point_tie_prefers_small_d_then_z0():
    """Equal objectives resolve to the smaller d, then the smaller z0."""
    cells = _cells([
        {"z0": 2.0, "d": 1.0, "valid": True, "half_deviation": 0.1, "intermediate": 0.0},
        {"z0": 3.0, "d": 0.5, "valid": True, "half_deviation": 0.1, "intermediate": 0.0},
        {"z0": 1.0, "d": 0.5, "valid": True, "half_deviation": 0.1, "intermediate": 0.0},
    ])
    point = find_operating_point(cells)
    assert (point.z0, point.d) == (1.0, 0.5)


def test_operating_point_ignores_invalid_cells():
    """Invalid cells never win; an all-invalid table has no operating point."""
    cells = _cells([
        {"z0": 0.0, "d": 0.0, "valid": False, "half_deviation": math.nan, "intermediate": math.nan},
        {"z0": 1.0, "d": 0.0, "valid": True, "half_deviation": 0.2, "intermediate": 0.0},
    ])
    assert find_operating_point(cells).z0 == 1.0

    with pytest.raises(NoViablePointError):
        find_operating_point(cells.iloc[:1])


def test_operating_point_rejects_opposite_sign_superposition():
    """A balanced cell holding (|g1,g2,0> - |g2,g1,0>)/sqrt(2) loses to a slightly worse cell with the target sign."""
    cells = _cells([
        {"z0": 3.29e-6, "d": 6e-6, "valid": True, "half_deviation": 0.0003, "intermediate": 0.001,
         "fidelity": 4.6e-5, "concurrence": 0.9999},
        {"z0": 3.25e-6, "d": 8e-6, "valid": True, "half_deviation": 0.01, "intermediate": 0.01,
         "fidelity": 0.98, "concurrence": 0.999},
    ])
    point = find_operating_point(cells)
    assert (point.z0, point.d) == (3.25e-6, 8e-6)
    assert point.fidelity == pytest.approx(0.98)
    assert point.concurrence == pytest.approx(0.999)
    assert not point.refined

    assert find_operating_point(cells, min_fidelity=0.0).z0 == 3.29e-6
    with pytest.raises(NoViablePointError, match="fidelity"):
        find_operating_point(cells.iloc[:1])


def test_z0_undersampled():
    """The default 0-20 um axis at 101 points steps 0.2 um, coarser than lambda / 8 for 780 nm."""
    wavelength = 780e-9
    default_z0, _ = grid_axes((0.0, 20 * MICRON), (0.0, 40 * MICRON), 101)
    window_z0, _ = grid_axes((3.2 * MICRON, 3.5 * MICRON), (6 * MICRON, 12 * MICRON), 31)
    assert z0_undersampled(default_z0, wavelength)
    assert not z0_undersampled(window_z0, wavelength)
    assert not z0_undersampled(np.array([1e-6]), wavelength)


def test_refinement_keeps_grid_point_without_improvement():
    """Atom 1 outside the beam: every neighbour ties, so the grid point is returned unchanged."""
    g = reference_geometry()
    p = PhysicalParams()
    opts = IntegratorOptions(output_samples=50)
    z0_axis, d_axis = grid_axes(MISS_Z0_RANGE, MISS_D_RANGE, 2)
    cells = scan_cells(g, p, z0_axis, d_axis, opts, workers=1)
    point = find_operating_point(cells, min_fidelity=0.0)

    refined = refine_operating_point(point, g, p, z0_step=z0_axis[1] - z0_axis[0], d_step=d_axis[1] - d_axis[0],
                                     opts=opts, min_fidelity=0.0, max_evaluations=6)
    assert refined is point
    assert not refined.refined

    with pytest.raises(ValueError, match="steps"):
        refine_operating_point(point, g, p, z0_step=0.0, d_step=1e-6)


def test_failed_integrations_mark_cells_invalid():
    """Cells that cannot converge become NaN in the grid and leave no operating point."""
    g = reference_geometry()
    z0_axis, d_axis = grid_axes((0.0, 5 * MICRON), (0.0, 5 * MICRON), 2)
    cells = scan_cells(g, PhysicalParams(), z0_axis, d_axis, opts=FAILING_OPTS, workers=1)

    assert not cells["valid"].any()
    assert cells["error"].str.contains("convergence").all()
    grid = grid_from_cells(cells, z0_axis, d_axis, "half_deviation")
    assert np.isnan(grid.values).all()
    with pytest.raises(NoViablePointError):
        find_operating_point(cells)


def test_scan_rejects_unknown_metric():
    """Only the four scan metrics can be gridded."""
    with pytest.raises(ValueError, match="metric"):
        scan2d(reference_geometry(), PhysicalParams(), MISS_Z0_RANGE, MISS_D_RANGE, 2, metric="purity")


def test_robustness_single_step_is_baseline():
    """A zero-width, one-step scan reproduces the unperturbed fidelity."""
    g = reference_geometry()
    p = PhysicalParams()
    table = robustness_table(g, p, "Omega0", 0.0, 1, workers=1)
    baseline = evaluate_cell(g, p, target_angle=math.pi / 2)

    assert list(table.columns[:4]) == ["factor", "value", "valid", "fidelity"]
    assert table["factor"].tolist() == [1.0]
    assert table["value"].iloc[0] == pytest.approx(p.Omega0)
    assert table["fidelity"].iloc[0] == pytest.approx(baseline["fidelity"], abs=1e-12)


def test_robustness_scan_factors_and_values():
    """Velocity scans scale both atom speeds; the fidelity array follows the factors."""
    g = reference_geometry(z0=200 * MICRON)
    p = PhysicalParams()
    table = robustness_table(g, p, "v", 0.1, 3, scenario="half_stirap", workers=1)

    np.testing.assert_allclose(table["factor"], [0.9, 1.0, 1.1])
    np.testing.assert_allclose(table["value"], [1.8, 2.0, 2.2])
    fidelities = robustness_scan(g, p, "v", 0.1, 3, scenario="half_stirap", workers=1)
    np.testing.assert_allclose(fidelities, 0.5, atol=1e-6)


def test_robustness_validation():
    """Unknown parameters, scenarios and ranges are rejected."""
    g = reference_geometry()
    p = PhysicalParams()
    with pytest.raises(ValueError, match="parameter"):
        robustness_table(g, p, "kappa", 0.1, 3)
    with pytest.raises(ValueError, match="scenario"):
        robustness_table(g, p, "v", 0.1, 3, scenario="fstirap")
    with pytest.raises(ValueError, match="relative_range"):
        robustness_table(g, p, "v", 1.5, 3)
    with pytest.raises(ValueError, match="steps"):
        robustness_table(g, p, "v", 0.1, 0)
