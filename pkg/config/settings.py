"""
fstirap-cavity Configuration Settings

Loads process-level environment variables and defines the numerical constants
(thresholds, defaults, exit codes) shared by the simulation modules.
"""

import os
import math
from pathlib import Path
from dataclasses import dataclass, field


def _load_dotenv_if_available() -> None:
    """
    Load variables from .env for CLI runs.

    python-dotenv is optional at import time so that the library modules stay
    importable in minimal environments.
    """
    try:
        from dotenv import load_dotenv  # type: ignore
    except Exception:
        return
    load_dotenv()


def get_setting(key: str, default: str = "") -> str:
    """Return a process setting from the environment (optionally loaded from .env)."""
    return os.getenv(key, default)


# Load environment variables from .env file
_load_dotenv_if_available()

# Resolve paths relative to the repository root so scripts work regardless of cwd.
PROJECT_ROOT = Path(__file__).resolve().parent.parent


def _resolve_path(path_str: str) -> str:
    """
    Resolve a possibly-relative path against the repository root.
    """
    if not path_str:
        return path_str
    p = Path(path_str)
    if p.is_absolute():
        return str(p)
    return str((PROJECT_ROOT / p).resolve())


@dataclass
class Settings:
    """Process settings loaded from environment variables."""

    # Sweep parallelism (0 = one worker per CPU, 1 = run in-process)
    workers: int = field(default_factory=lambda: int(get_setting("FSTIRAP_WORKERS", "0")))

    # Default output directory for scenario artifacts
    output_dir: str = field(
        default_factory=lambda: _resolve_path(get_setting("FSTIRAP_OUTPUT_DIR", "results"))
    )

    # Logging
    log_level: str = field(default_factory=lambda: get_setting("FSTIRAP_LOG_LEVEL", "INFO"))
    logs_dir: str = field(default_factory=lambda: _resolve_path(get_setting("FSTIRAP_LOGS_DIR", "logs")))


# Unit conventions: all rates are angular (rad/s); "MHz" in inputs means 1e6 rad/s.
MHZ = 1.0e6
MICRON = 1.0e-6
NANOMETER = 1.0e-9
MICROSECOND = 1.0e-6

# Speed of light, used for the default optical frequency omega_e = 2*pi*c/lambda
SPEED_OF_LIGHT = 299_792_458.0

# Reference two-atom STIRAP scenario
REFERENCE_VELOCITY = 2.0
REFERENCE_WAIST_LASER = 20 * MICRON
REFERENCE_WAIST_CAVITY = 40 * MICRON
REFERENCE_WAVELENGTH = 780 * NANOMETER
REFERENCE_OMEGA0 = 2 * MHZ
REFERENCE_G0 = 6.5 * MHZ
REFERENCE_Z0 = 5.5 * MICRON
REFERENCE_D = 6 * MICRON
REFERENCE_TAU = -9 * MICROSECOND
DEFAULT_X0 = 40 * MICRON

# Four-photon resonance guard: |Delta| must stay below min(Omega0, G0) / 100
DETUNING_GUARD_RATIO = 1.0 / 100.0

# Resonant-approximation validity: couplings / optical rates above this ratio warn
RWA_WARN_RATIO = 1.0e-2

# Adiabaticity: "Omega0*T_L, G0*T_C >> 1" quantified as >= 10 (inclusive)
ADIABATICITY_THRESHOLD = 10.0

# Integrator
INTEGRATION_WINDOW_WAISTS = 5.0          # pulse tails below 1e-6 of peak at the boundaries
STEPS_PER_RADIAN = 50.0                  # h = 1 / (50 * max_t ||H(t)||_inf)
CONVERGENCE_TOLERANCE = 1.0e-6           # max population change between h and h/2
MAX_REFINEMENTS = 6                      # step halvings before giving up
OUTPUT_SAMPLES = 2000                    # trace samples per run
ADAPTIVE_RTOL = 1.0e-10
ADAPTIVE_ATOL = 1.0e-12
ADAPTIVE_TOLERANCE_DIVISOR = 16.0        # adaptive analogue of halving the step
PROPAGATOR_BLOCK_BYTES = 32 * 1024 * 1024

# Mixing angle evaluation: both laser pulses decayed to this fraction of their peak
MIXING_ANGLE_DECAY_FRACTION = 1.0e-3
MIXING_ANGLE_MAX_DRIFT = 0.10

# Fractional-STIRAP limit conditions: early-time angle and cavity dominance G / Omega
FSTIRAP_INITIAL_ANGLE_MAX = 0.1
CAVITY_DOMINANCE_MIN = 1.0

# Concurrence needs at least this weight in the two-qubit ground subspace
CONCURRENCE_MIN_WEIGHT = 1.0e-6

# Sweep defaults (z0 in [0, 20] um, d in [0, 40] um at 101 x 101)
SWEEP_Z0_RANGE = (0.0, 20 * MICRON)
SWEEP_D_RANGE = (0.0, 40 * MICRON)
SWEEP_RESOLUTION = 101
OBJECTIVE_WEIGHT = 1.0
# Operating point must reach this fidelity with the target superposition (rejects the wrong-sign Bell state)
OPERATING_POINT_FIDELITY_MIN = 0.96
# z0 steps coarser than lambda / 8 undersample the cos(2 pi z0 / lambda) coupling pattern
Z0_STEPS_PER_WAVELENGTH = 8
# Off-grid refinement of the operating point (propagations per search, penalty per unit fidelity shortfall)
REFINE_MAX_EVALUATIONS = 60
REFINE_FIDELITY_PENALTY = 10.0
REFINE_INVALID_OBJECTIVE = 1.0e3
SWEEP_METRICS = ("half_deviation", "intermediate", "fidelity", "concurrence")

# Target mixing angles per scenario
TARGET_ANGLE_BY_SCENARIO = {
    "stirap": math.pi / 2,
    "half_stirap": math.pi / 4,
}

# Robustness scans
ROBUSTNESS_PARAMETERS = ("v", "Omega0", "G0", "d", "z0")
ROBUSTNESS_FIDELITY_FLOOR = 0.95

# Scenarios accepted by the runner
SCENARIOS = ("simulate", "sweep", "robustness", "darkstate", "check")

# Exit statuses
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_INTEGRATION_ERROR = 3
EXIT_NO_VIABLE_POINT = 4
EXIT_CHECK_FAILED = 5


# Singleton instance
settings = Settings()
