"""
Scenario Runner

Runs one configured scenario (simulate, sweep, robustness, darkstate, check),
writes its artifacts and records a per-step log. The results dictionary is
JSON-serializable; its exit code follows the process exit statuses in
config.settings.
"""

import logging
import warnings
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from config.settings import (
    EXIT_OK,
    EXIT_FAILURE,
    EXIT_INTEGRATION_ERROR,
    EXIT_NO_VIABLE_POINT,
    EXIT_CHECK_FAILED,
    ROBUSTNESS_FIDELITY_FLOOR,
    TARGET_ANGLE_BY_SCENARIO,
)
from src.analysis.adiabaticity import adiabaticity_check
from src.analysis.dark_state import (
    NonFractionalGeometryWarning,
    UndefinedDarkStateError,
    dark_overlap,
    dark_state,
    fstirap_conditions,
    mixing_angle_report,
)
from src.analysis.entanglement import UndefinedConcurrenceError, concurrence, target_fidelity
from src.analysis.exposure import exposure_metrics
from src.dynamics.losses import with_losses
from src.dynamics.propagator import IntegrationError, SimulationTrace, propagate
from src.dynamics.states import to_full_space
from src.integrations.config_file import RunConfig
from src.integrations.writers import to_jsonable, write_grid, write_summary, write_table, write_trace
from src.model.basis import G1G2_0, G2G1_0, G2G2_0, INTERMEDIATE_LABELS
from src.model.hamiltonians import EffectiveHamiltonian, FullHamiltonian
from src.model.pulses import four_photon_detuning, pulse_table, pulses_at, rwa_validity
from src.sweep.robustness import robustness_table
from src.sweep.scan import (
    NoViablePointError,
    find_operating_point,
    grid_axes,
    grid_from_cells,
    refine_operating_point,
    scan_cells,
)

logger = logging.getLogger(__name__)


class ScenarioRunner:
    """
    Orchestrates one scenario run.
    """

    def __init__(self, cfg: RunConfig, *, output_dir: Optional[str] = None, workers: Optional[int] = None):
        """
        Initialize the runner.

        Args:
            cfg: Validated run configuration
            output_dir: Overrides cfg.output_directory when given
            workers: Sweep process count (None: FSTIRAP_WORKERS)
        """
        self.cfg = cfg
        self.output_dir = Path(output_dir or cfg.output_directory)
        self.workers = workers
        self.start_time = datetime.now()
        self.summary: Dict[str, Any] = {"scenario": cfg.scenario}
        self.results: Dict[str, Any] = {
            "scenario": cfg.scenario,
            "started_at": self.start_time.isoformat(),
            "status": "running",
            "exit_code": None,
            "output_dir": str(self.output_dir),
            "artifacts": {},
            "steps": {},
        }

    def _log_step(self, step_name: str, status: str, details: Any = None):
        """Log a scenario step result."""
        self.results["steps"][step_name] = {
            "status": status,
            "timestamp": datetime.now().isoformat(),
            "details": to_jsonable(details),
        }
        logger.info(f"Step '{step_name}': {status}")
        if details:
            logger.info(f"  Details: {details}")

    def _artifact(self, name: str, path: Path):
        self.results["artifacts"][name] = str(path)

    def _write_summary(self):
        suffix = "json" if self.cfg.summary_format == "json" else "txt"
        self._artifact("summary", write_summary(self.summary, self.output_dir / f"summary.{suffix}", self.cfg))

    # ------------------------------------------------------------------
    # Shared diagnostics
    # ------------------------------------------------------------------

    def _diagnostics(self) -> Dict[str, Any]:
        g, p = self.cfg.geometry, self.cfg.physics
        detuning = four_photon_detuning(g, p)
        rwa = rwa_validity(g, p)
        adiabatic = adiabaticity_check(g, p)
        if detuning.guard_tripped:
            logger.warning(
                f"Four-photon detuning |Delta| = {abs(detuning.delta):.3g} rad/s exceeds {detuning.limit:.3g} rad/s"
            )
        return {
            "detuning": {
                "delta": detuning.delta,
                "limit": detuning.limit,
                "guard_tripped": detuning.guard_tripped,
            },
            "rwa": {
                "coupling_ratio": rwa.coupling_ratio,
                "doppler_ratio": rwa.doppler_ratio,
                "valid": rwa.valid,
            },
            "adiabaticity": {
                "Omega0_T_L": adiabatic.product_L,
                "G0_T_C": adiabatic.product_C,
                "verdict": adiabatic.verdict,
            },
        }

    def _mixing_angle(self, reference: Optional[SimulationTrace] = None) -> Dict[str, Any]:
        """Mixing angle; `reference` is a loss-free run from |g1,g2,0> reused for the final-state angle."""
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NonFractionalGeometryWarning)
            report = mixing_angle_report(self.cfg.geometry, self.cfg.physics, reference, self.cfg.integrator)
        if not report.stationary:
            logger.warning(f"Late-time laser ratio drifts by {report.drift:.3g}; mixing angle taken from the final state")
        return {
            "angle": report.angle,
            "source": report.source,
            "evaluation_time": report.evaluation_time,
            "drift": report.drift,
            "stationary": report.stationary,
        }

    # ------------------------------------------------------------------
    # Scenarios
    # ------------------------------------------------------------------

    def _propagate(self, lossy: bool = True) -> SimulationTrace:
        """Run the configured model; `lossy=False` drops the decay rates."""
        cfg = self.cfg
        psi0 = cfg.initial_state()
        if cfg.uses_full_model:
            psi0 = to_full_space(psi0)
            hamiltonian = FullHamiltonian(cfg.geometry, cfg.physics, cfg.frame)
        else:
            hamiltonian = EffectiveHamiltonian(cfg.geometry, cfg.physics)
        if lossy and cfg.physics.has_losses:
            hamiltonian = with_losses(hamiltonian, cfg.physics)
        trace = propagate(hamiltonian, psi0, cfg.integrator)
        dark_overlap(trace, cfg.geometry, cfg.physics)
        return trace

    def _starts_in_g1g2(self) -> bool:
        return self.cfg.beta == 0 and self.cfg.initial_label in (None, G1G2_0)

    def _coherence_mapping(self, trace: SimulationTrace) -> Dict[str, Any]:
        """alpha|g1,g2,0> + beta|g2,g2,0> -> alpha|g2,g1,0> + beta|g2,g2,0> bookkeeping."""
        cfg = self.cfg
        final = trace.final_state
        a_mapped = final.amplitude(G2G1_0)
        a_spectator = final.amplitude(G2G2_0)
        initial_phase = float(np.angle(complex(cfg.beta) / complex(cfg.alpha))) if cfg.alpha != 0 else float("nan")
        final_phase = float(np.angle(a_spectator / a_mapped)) if a_mapped != 0 else float("nan")
        return {
            "alpha": cfg.alpha,
            "beta": cfg.beta,
            "final_population_g2g1": abs(a_mapped) ** 2,
            "final_population_g2g2": abs(a_spectator) ** 2,
            "initial_relative_phase": initial_phase,
            "final_relative_phase": final_phase,
            "phase_deviation": float(np.angle(np.exp(1j * (final_phase - initial_phase)))),
        }

    def _simulate(self) -> int:
        cfg = self.cfg
        self.summary["diagnostics"] = self._diagnostics()
        self._log_step("diagnostics", "success", self.summary["diagnostics"])

        trace = self._propagate()
        # Exposure is a first-order estimate from the loss-free populations
        reference = self._propagate(lossy=False) if cfg.physics.has_losses else trace
        self._log_step("propagate", "success", {
            "basis": trace.basis.name,
            "samples": len(trace.times),
            "steps_per_sample": trace.steps_per_sample,
            "achieved_tolerance": trace.achieved_tolerance,
        })

        final_state = trace.final_state
        try:
            entanglement = concurrence(final_state)
        except UndefinedConcurrenceError as e:
            logger.warning(f"Concurrence undefined: {e}")
            entanglement = None
        norm_sq = float(trace.norm[-1] ** 2)
        self.summary.update({
            "model": "full" if trace.basis.name == "full" else "effective",
            "final_populations": trace.final_populations(),
            "peak_intermediate_populations": {
                label: float(trace.population(label).max()) for label in INTERMEDIATE_LABELS
            },
            "target_angle": cfg.target_angle,
            "fidelity": target_fidelity(final_state, cfg.target_angle),
            "concurrence": entanglement,
            "mixing_angle": self._mixing_angle(reference if self._starts_in_g1g2() else None),
            "final_norm_squared": norm_sq,
            "norm_loss": 1.0 - norm_sq,
            "achieved_tolerance": trace.achieved_tolerance,
        })
        exposure = exposure_metrics(reference, cfg.physics)
        self.summary["exposure"] = {
            "excited": exposure.excited_exposure,
            "photon": exposure.photon_exposure,
            "total": exposure.total,
            "norm_loss_ratio": (1.0 - norm_sq) / exposure.total if exposure.total > 0 else None,
        }
        if cfg.beta != 0 and cfg.initial_label is None:
            self.summary["coherence_mapping"] = self._coherence_mapping(trace)
        self._log_step("analysis", "success", {
            "P(g1,g2,0)": self.summary["final_populations"][G1G2_0],
            "P(g2,g1,0)": self.summary["final_populations"][G2G1_0],
            "fidelity": self.summary["fidelity"],
        })

        self._artifact("trace", write_trace(trace, self.output_dir / "trace.csv", cfg))
        pulses = pulse_table(cfg.geometry, cfg.physics, trace.times)
        self._artifact("pulses", write_table(pulses, self.output_dir / "pulses.csv", cfg))
        self._write_summary()
        self._log_step("write_outputs", "success", dict(self.results["artifacts"]))
        return EXIT_OK

    def _sweep(self) -> int:
        cfg = self.cfg
        s = cfg.sweep
        z0_axis, d_axis = grid_axes(s.z0_range, s.d_range, s.resolution)
        cells = scan_cells(cfg.geometry, cfg.physics, z0_axis, d_axis, cfg.integrator, s.target_angle, self.workers)
        n_invalid = int((~cells["valid"].astype(bool)).sum())
        self._log_step("scan", "success" if not n_invalid else "warning", {
            "cells": len(cells),
            "invalid_cells": n_invalid,
        })

        grid = grid_from_cells(cells, z0_axis, d_axis, s.metric)
        for name, path in write_grid(grid, self.output_dir, cfg).items():
            self._artifact(name, path)
        self._artifact("cells", write_table(cells, self.output_dir / "cells.csv", cfg))
        self.summary.update({"metric": s.metric, "cells": len(cells), "invalid_cells": n_invalid})

        try:
            point = find_operating_point(cells, s.weight, s.min_fidelity)
        except NoViablePointError as e:
            logger.error(str(e))
            self._log_step("operating_point", "error", {"error": str(e), "error_type": type(e).__name__})
            self.summary["operating_point"] = None
            self._write_summary()
            return EXIT_NO_VIABLE_POINT

        if s.refine:
            point = refine_operating_point(
                point, cfg.geometry, cfg.physics,
                z0_step=float(z0_axis[1] - z0_axis[0]), d_step=float(d_axis[1] - d_axis[0]),
                opts=cfg.integrator, weight=s.weight, min_fidelity=s.min_fidelity, target_angle=s.target_angle,
            )
        self.summary["operating_point"] = {
            "z0": point.z0,
            "d": point.d,
            "objective": point.objective,
            "refined": point.refined,
            "final_populations": point.final_populations,
            "fidelity": point.fidelity,
            "concurrence": point.concurrence,
        }
        self._log_step("operating_point", "success", {"z0": point.z0, "d": point.d, "objective": point.objective})
        self._write_summary()
        return EXIT_OK

    def _robustness(self) -> int:
        cfg = self.cfg
        r = cfg.robustness
        table = robustness_table(
            cfg.geometry, cfg.physics, r.parameter, r.relative_range, r.steps, r.scenario,
            cfg.integrator, self.workers,
        )
        self._artifact("robustness", write_table(table, self.output_dir / "robustness.csv", cfg))
        fidelity = table["fidelity"].to_numpy(dtype=float)
        self.summary.update({
            "parameter": r.parameter,
            "relative_range": r.relative_range,
            "target_angle": TARGET_ANGLE_BY_SCENARIO[r.scenario],
            "min_fidelity": float(np.nanmin(fidelity)) if np.isfinite(fidelity).any() else None,
            "max_fidelity": float(np.nanmax(fidelity)) if np.isfinite(fidelity).any() else None,
            "above_floor": bool(np.all(fidelity >= ROBUSTNESS_FIDELITY_FLOOR)),
            "invalid_points": int((~table["valid"].astype(bool)).sum()),
        })
        self._log_step("robustness_scan", "success", {
            "points": len(table),
            "min_fidelity": self.summary["min_fidelity"],
        })
        self._write_summary()
        return EXIT_OK

    def _darkstate(self) -> int:
        cfg = self.cfg
        snapshot = pulses_at(cfg.geometry, cfg.physics, cfg.darkstate_time)
        report = dark_state(snapshot)
        components = dict(zip(report.vector.basis.labels, report.vector.amplitudes.real.tolist()))
        self.summary.update({
            "time": cfg.darkstate_time,
            "pulses": {"Omega1": snapshot.Omega1, "G1": snapshot.G1, "G2": snapshot.G2, "Omega2": snapshot.Omega2},
            "components": components,
            "normalization": report.normalization,
            "residual": report.residual,
        })
        for label, value in components.items():
            logger.info(f"  D[{label}] = {value:+.12f}")
        logger.info(f"  ||Heff D|| = {report.residual:.3e}")
        self._log_step("dark_state", "success", {"residual": report.residual})
        self._write_summary()
        return EXIT_OK

    def _check(self) -> int:
        cfg = self.cfg
        diagnostics = self._diagnostics()
        conditions = fstirap_conditions(cfg.geometry, cfg.physics)
        diagnostics["fstirap_conditions"] = {
            "initial_angle": conditions.initial_angle,
            "initial_ok": conditions.initial_ok,
            "mixing_angle": conditions.mixing.angle,
            "mixing_stationary": conditions.mixing.stationary,
            "cavity_dominance": conditions.cavity_dominance,
            "cavity_ok": conditions.cavity_ok,
        }
        passed = (
            not diagnostics["detuning"]["guard_tripped"]
            and diagnostics["rwa"]["valid"]
            and diagnostics["adiabaticity"]["verdict"] == "pass"
        )
        self.summary.update(diagnostics)
        self.summary["passed"] = passed
        logger.info(f"  Delta = {diagnostics['detuning']['delta']:.6g} rad/s "
                    f"(guard {'TRIPPED' if diagnostics['detuning']['guard_tripped'] else 'ok'})")
        logger.info(f"  RWA: {'valid' if diagnostics['rwa']['valid'] else 'questionable'} "
                    f"(coupling ratio {diagnostics['rwa']['coupling_ratio']:.3g})")
        logger.info(f"  Omega0*T_L = {diagnostics['adiabaticity']['Omega0_T_L']:.4g}, "
                    f"G0*T_C = {diagnostics['adiabaticity']['G0_T_C']:.4g}")
        self._log_step("check", "success" if passed else "failed", {"passed": passed})
        self._write_summary()
        return EXIT_OK if passed else EXIT_CHECK_FAILED

    SCENARIO_METHODS = {
        "simulate": "_simulate",
        "sweep": "_sweep",
        "robustness": "_robustness",
        "darkstate": "_darkstate",
        "check": "_check",
    }

    def run(self) -> Dict[str, Any]:
        """
        Execute the configured scenario.

        Returns:
            Results dictionary with status, exit code, artifacts and step details
        """
        logger.info("=" * 60)
        logger.info(f"FSTIRAP SCENARIO '{self.cfg.scenario.upper()}' STARTED")
        logger.info(f"Output directory: {self.output_dir}")
        logger.info("=" * 60)

        try:
            exit_code = getattr(self, self.SCENARIO_METHODS[self.cfg.scenario])()
            self.results["status"] = "completed" if exit_code == EXIT_OK else "failed"

        except IntegrationError as e:
            logger.error(f"Integration failed: {e}")
            self._log_step("propagate", "error", {
                "error": str(e),
                "error_type": type(e).__name__,
                "achieved_tolerance": e.achieved_tolerance,
            })
            self.results["status"] = "failed"
            self.results["error"] = str(e)
            exit_code = EXIT_INTEGRATION_ERROR

        except UndefinedDarkStateError as e:
            logger.error(f"Dark state undefined: {e}")
            self._log_step("dark_state", "error", {"error": str(e), "error_type": type(e).__name__})
            self.results["status"] = "failed"
            self.results["error"] = str(e)
            exit_code = EXIT_FAILURE

        except Exception as e:
            logger.exception(f"Scenario failed with unexpected error: {e}")
            self.results["status"] = "failed"
            self.results["error"] = str(e)
            exit_code = EXIT_FAILURE

        self.results["exit_code"] = exit_code
        self.results["completed_at"] = datetime.now().isoformat()
        self.results["duration_seconds"] = (datetime.now() - self.start_time).total_seconds()
        self.results["summary"] = to_jsonable(self.summary)

        logger.info("=" * 60)
        logger.info(f"SCENARIO {self.results['status'].upper()} (exit code {exit_code})")
        logger.info(f"Duration: {self.results['duration_seconds']:.2f} seconds")
        logger.info("=" * 60)
        return self.results


def run_scenario(cfg: RunConfig, *, output_dir: Optional[str] = None, workers: Optional[int] = None) -> int:
    """Run a scenario and return its exit status; artifacts are written to the output directory."""
    return ScenarioRunner(cfg, output_dir=output_dir, workers=workers).run()["exit_code"]
