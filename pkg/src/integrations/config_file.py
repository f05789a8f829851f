"""
Run Configuration Documents

A run configuration is flat `section.key = value` text (`#` starts a comment),
read with python-dotenv's parser:

    scenario.name = simulate
    geometry.z0 = 5.5um
    geometry.tau = -9us
    physics.Omega0 = 2MHz
    initial.alpha = 0.7071067811865476
    initial.beta = 0.7071067811865476

Quantities accept unit suffixes (lengths m/mm/um/nm, times s/ms/us/ns, rates
rad/s or MHz = 1e6 rad/s, angles rad/deg or multiples of pi such as pi/18).
Unset keys take the documented defaults; `serialize_config` writes every
resolved key in SI units so that `parse_config` returns an equal RunConfig.
"""

import io
import math
import re
from dataclasses import dataclass, field, fields, replace
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Tuple

from dotenv import dotenv_values

from config.settings import (
    MHZ,
    OBJECTIVE_WEIGHT,
    OPERATING_POINT_FIDELITY_MIN,
    ROBUSTNESS_PARAMETERS,
    SCENARIOS,
    SWEEP_D_RANGE,
    SWEEP_METRICS,
    SWEEP_RESOLUTION,
    SWEEP_Z0_RANGE,
    TARGET_ANGLE_BY_SCENARIO,
    settings,
)
from src.dynamics.propagator import METHODS, IntegratorOptions
from src.dynamics.states import NORM_TOLERANCE, StateVector, initial_state
from src.model.basis import FULL_SPACE, SUBSPACE_S
from src.model.hamiltonians import FRAMES
from src.model.parameters import GeometryParams, PhysicalParams

MODELS = ("effective", "full")
SUMMARY_FORMATS = ("json", "text")


class ConfigError(Exception):
    """Invalid run configuration; names the offending key and the violated constraint."""

    def __init__(self, key: str, constraint: str):
        super().__init__(f"{key}: {constraint}")
        self.key = key
        self.constraint = constraint


# ---------------------------------------------------------------------------
# Quantities
# ---------------------------------------------------------------------------

_NUMBER = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_QUANTITY_RE = re.compile(rf"^\s*({_NUMBER})\s*([^\d\s].*)?$")
_PI_RE = re.compile(rf"^\s*({_NUMBER}|[+-])?\s*\*?\s*pi\s*(?:/\s*({_NUMBER}))?\s*$")

UNITS: Dict[str, Dict[str, float]] = {
    "length": {"m": 1.0, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "μm": 1e-6, "nm": 1e-9},
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "μs": 1e-6, "ns": 1e-9},
    "rate": {"rad/s": 1.0, "1/s": 1.0, "MHz": MHZ},
    "speed": {"m/s": 1.0},
    "angle": {"rad": 1.0, "deg": math.pi / 180.0},
}


def parse_quantity(key: str, text: str, kind: str) -> float:
    """
    Parse a number with an optional unit suffix into SI.

    Raises:
        ConfigError: If the value is not a number or the unit does not fit `kind`
    """
    if kind == "angle":
        m = _PI_RE.match(text)
        if m:
            coeff = m.group(1)
            factor = -1.0 if coeff == "-" else 1.0 if coeff in (None, "+") else float(coeff)
            denominator = float(m.group(2)) if m.group(2) else 1.0
            return factor * math.pi / denominator
    m = _QUANTITY_RE.match(text)
    if not m:
        raise ConfigError(key, f"expected a {kind} value, got {text!r}")
    value = float(m.group(1))
    unit = (m.group(2) or "").strip()
    if not unit:
        return value
    scale = UNITS.get(kind, {}).get(unit)
    if scale is None:
        allowed = ", ".join(UNITS.get(kind, {})) or "none"
        raise ConfigError(key, f"unknown unit {unit!r} for a {kind} (allowed: {allowed})")
    return value * scale


def _parse_amplitude(key: str, text: str) -> complex:
    try:
        value = complex(text.replace(" ", ""))
    except ValueError:
        raise ConfigError(key, f"expected a real or complex number, got {text!r}") from None
    return value.real if value.imag == 0 else value


def _format_amplitude(value: complex) -> str:
    value = complex(value)
    return repr(value.real) if value.imag == 0 else repr(value)


# ---------------------------------------------------------------------------
# Configuration types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepOptions:
    """(z0, d) scan settings."""
    z0_range: Tuple[float, float] = SWEEP_Z0_RANGE
    d_range: Tuple[float, float] = SWEEP_D_RANGE
    resolution: int = SWEEP_RESOLUTION
    metric: str = "half_deviation"
    weight: float = OBJECTIVE_WEIGHT
    target_angle: float = TARGET_ANGLE_BY_SCENARIO["half_stirap"]
    min_fidelity: float = OPERATING_POINT_FIDELITY_MIN
    refine: bool = True


@dataclass(frozen=True)
class RobustnessOptions:
    parameter: str = "v"
    relative_range: float = 0.2
    steps: int = 9
    scenario: str = "stirap"


@dataclass(frozen=True)
class RunConfig:
    """Everything a scenario run needs, fully resolved."""
    geometry: GeometryParams = field(default_factory=GeometryParams)
    physics: PhysicalParams = field(default_factory=PhysicalParams)
    integrator: IntegratorOptions = field(default_factory=IntegratorOptions)
    scenario: str = "simulate"
    model: str = "effective"
    frame: str = "interaction"
    initial_label: Optional[str] = None
    alpha: complex = 1.0
    beta: complex = 0.0
    target_angle: float = TARGET_ANGLE_BY_SCENARIO["stirap"]
    darkstate_time: float = 0.0
    sweep: SweepOptions = field(default_factory=SweepOptions)
    robustness: RobustnessOptions = field(default_factory=RobustnessOptions)
    output_directory: str = field(default_factory=lambda: settings.output_dir)
    summary_format: str = "json"

    def initial_state(self) -> StateVector:
        """Initial state: a basis label, or alpha|g1,g2,0> + beta|g2,g2,0>."""
        if self.initial_label is not None:
            basis = SUBSPACE_S if self.initial_label in SUBSPACE_S else FULL_SPACE
            return StateVector.basis_state(basis, self.initial_label)
        return initial_state(self.alpha, self.beta)

    @property
    def uses_full_model(self) -> bool:
        """The 18-state model is required for full-space initial states."""
        return self.model == "full" or self.initial_state().basis == FULL_SPACE


# ---------------------------------------------------------------------------
# Key table: config key -> (parser, formatter)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Key:
    parse: Callable[[str, str], object]
    format: Callable[[object], str]


def _quantity(kind: str) -> _Key:
    return _Key(lambda k, t: parse_quantity(k, t, kind), repr)


def _optional_quantity(kind: str) -> _Key:
    return _Key(
        lambda k, t: None if t.strip().lower() == "auto" else parse_quantity(k, t, kind),
        lambda v: "auto" if v is None else repr(v),
    )


def _integer() -> _Key:
    def parse(key, text):
        try:
            return int(text)
        except ValueError:
            raise ConfigError(key, f"expected an integer, got {text!r}") from None
    return _Key(parse, str)


def _boolean() -> _Key:
    def parse(key, text):
        value = text.strip().lower()
        if value in ("true", "yes", "1"):
            return True
        if value in ("false", "no", "0"):
            return False
        raise ConfigError(key, f"expected true or false, got {text!r}")
    return _Key(parse, lambda v: "true" if v else "false")


def _choice(options: Iterable[str]) -> _Key:
    options = tuple(options)

    def parse(key, text):
        if text not in options:
            raise ConfigError(key, f"must be one of {options}, got {text!r}")
        return text
    return _Key(parse, str)


def _text() -> _Key:
    return _Key(lambda k, t: t, str)


def _label() -> _Key:
    def parse(key, text):
        if text.strip().lower() == "auto":
            return None
        if text not in FULL_SPACE:
            raise ConfigError(key, f"unknown basis state {text!r} (expected e.g. 'g1,g2,0')")
        return text
    return _Key(parse, lambda v: "auto" if v is None else v)


_GEOMETRY_KINDS = {
    "z0": "length", "d": "length", "x0": "length", "y0": "length",
    "v1": "speed", "v2": "speed", "theta1": "angle", "theta2": "angle",
    "tau": "time", "wavelength": "length", "waist_cavity": "length", "waist_laser": "length",
}

KEYS: Dict[str, _Key] = {
    "scenario.name": _choice(SCENARIOS),
    "scenario.target_angle": _quantity("angle"),
    "model.kind": _choice(MODELS),
    "model.frame": _choice(FRAMES),
    **{f"geometry.{name}": _quantity(kind) for name, kind in _GEOMETRY_KINDS.items()},
    "physics.Omega0": _quantity("rate"),
    "physics.G0": _quantity("rate"),
    "physics.omega": _optional_quantity("rate"),
    "physics.kappa": _quantity("rate"),
    "physics.Gamma": _quantity("rate"),
    "integrator.method": _choice(METHODS),
    "integrator.t_start": _optional_quantity("time"),
    "integrator.t_end": _optional_quantity("time"),
    "integrator.step": _optional_quantity("time"),
    "integrator.convergence_tolerance": _quantity("float"),
    "integrator.max_refinements": _integer(),
    "integrator.output_samples": _integer(),
    "integrator.rtol": _quantity("float"),
    "integrator.atol": _quantity("float"),
    "initial.state": _label(),
    "initial.alpha": _Key(_parse_amplitude, _format_amplitude),
    "initial.beta": _Key(_parse_amplitude, _format_amplitude),
    "darkstate.time": _quantity("time"),
    "sweep.z0_min": _quantity("length"),
    "sweep.z0_max": _quantity("length"),
    "sweep.d_min": _quantity("length"),
    "sweep.d_max": _quantity("length"),
    "sweep.resolution": _integer(),
    "sweep.metric": _choice(SWEEP_METRICS),
    "sweep.weight": _quantity("float"),
    "sweep.target_angle": _quantity("angle"),
    "sweep.min_fidelity": _quantity("float"),
    "sweep.refine": _boolean(),
    "robustness.parameter": _choice(ROBUSTNESS_PARAMETERS),
    "robustness.relative_range": _quantity("float"),
    "robustness.steps": _integer(),
    "robustness.scenario": _choice(TARGET_ANGLE_BY_SCENARIO),
    "output.directory": _text(),
    "output.summary_format": _choice(SUMMARY_FORMATS),
}


def config_items(cfg: RunConfig) -> List[Tuple[str, object]]:
    """Every configuration key with its resolved value, in document order."""
    g, p, i, s, r = cfg.geometry, cfg.physics, cfg.integrator, cfg.sweep, cfg.robustness
    items = [
        ("scenario.name", cfg.scenario),
        ("scenario.target_angle", cfg.target_angle),
        ("model.kind", cfg.model),
        ("model.frame", cfg.frame),
    ]
    items += [(f"geometry.{name}", getattr(g, name)) for name in _GEOMETRY_KINDS]
    items += [(f"physics.{f.name}", getattr(p, f.name)) for f in fields(PhysicalParams)]
    items += [
        ("integrator.method", i.method),
        ("integrator.t_start", i.t_start),
        ("integrator.t_end", i.t_end),
        ("integrator.step", i.step),
        ("integrator.convergence_tolerance", i.convergence_tolerance),
        ("integrator.max_refinements", i.max_refinements),
        ("integrator.output_samples", i.output_samples),
        ("integrator.rtol", i.rtol),
        ("integrator.atol", i.atol),
        ("initial.state", cfg.initial_label),
    ]
    if cfg.initial_label is None:
        items += [("initial.alpha", cfg.alpha), ("initial.beta", cfg.beta)]
    items += [
        ("darkstate.time", cfg.darkstate_time),
        ("sweep.z0_min", s.z0_range[0]),
        ("sweep.z0_max", s.z0_range[1]),
        ("sweep.d_min", s.d_range[0]),
        ("sweep.d_max", s.d_range[1]),
        ("sweep.resolution", s.resolution),
        ("sweep.metric", s.metric),
        ("sweep.weight", s.weight),
        ("sweep.target_angle", s.target_angle),
        ("sweep.min_fidelity", s.min_fidelity),
        ("sweep.refine", s.refine),
        ("robustness.parameter", r.parameter),
        ("robustness.relative_range", r.relative_range),
        ("robustness.steps", r.steps),
        ("robustness.scenario", r.scenario),
        ("output.directory", cfg.output_directory),
        ("output.summary_format", cfg.summary_format),
    ]
    return items


def serialize_config(cfg: RunConfig) -> str:
    """Write every resolved key as `key = value` (SI units, full float precision)."""
    return "".join(f"{key} = {KEYS[key].format(value)}\n" for key, value in config_items(cfg))


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _read_document(text: str) -> Dict[str, str]:
    raw = dotenv_values(stream=io.StringIO(text), interpolate=False)
    values = {}
    for key, value in raw.items():
        if key not in KEYS:
            raise ConfigError(key, "unknown key")
        if value is None or value.strip() == "":
            raise ConfigError(key, "missing value")
        values[key] = value.strip()
    return values


def _build(cls, prefix: str, kwargs: Dict[str, object]):
    """Construct a validated parameter object, mapping ValueError to the offending key."""
    try:
        return cls(**kwargs)
    except ValueError as e:
        name = str(e).split(" ", 1)[0]
        raise ConfigError(f"{prefix}.{name}", str(e)) from None


def parse_config(text: str, overrides: Optional[Mapping[str, str]] = None) -> RunConfig:
    """
    Parse and validate a run configuration document.

    Args:
        text: Document text
        overrides: Raw `key -> value` strings applied on top of the document
            (command-line `--set key=value`)

    Returns:
        Fully resolved RunConfig

    Raises:
        ConfigError: Unknown key, missing value or required key, or a violated constraint
    """
    raw = _read_document(text)
    for key, value in (overrides or {}).items():
        if key not in KEYS:
            raise ConfigError(key, "unknown key")
        if value is None or str(value).strip() == "":
            raise ConfigError(key, "missing value")
        raw[key] = str(value).strip()
    v = {key: KEYS[key].parse(key, text) for key, text in raw.items()}

    def section(prefix: str) -> Dict[str, object]:
        return {k.split(".", 1)[1]: val for k, val in v.items() if k.startswith(prefix + ".")}

    geometry = _build(GeometryParams, "geometry", section("geometry"))
    physics = _build(PhysicalParams, "physics", section("physics"))
    integrator = _build(IntegratorOptions, "integrator", section("integrator"))

    initial_label = v.get("initial.state")
    has_amplitudes = "initial.alpha" in v or "initial.beta" in v
    if initial_label is not None and has_amplitudes:
        raise ConfigError("initial.state", "give either a basis state or initial.alpha/initial.beta, not both")
    if "initial.beta" in v and "initial.alpha" not in v:
        raise ConfigError("initial.alpha", "required when initial.beta is given")
    alpha = v.get("initial.alpha", 1.0)
    beta = v.get("initial.beta", 0.0)
    weight = abs(alpha) ** 2 + abs(beta) ** 2
    if initial_label is None and not math.isclose(weight, 1.0, abs_tol=NORM_TOLERANCE):
        raise ConfigError("initial.alpha", f"|alpha|^2 + |beta|^2 must equal 1 within 1e-9 (got {weight:.12g})")

    sweep = SweepOptions(
        z0_range=(v.get("sweep.z0_min", SWEEP_Z0_RANGE[0]), v.get("sweep.z0_max", SWEEP_Z0_RANGE[1])),
        d_range=(v.get("sweep.d_min", SWEEP_D_RANGE[0]), v.get("sweep.d_max", SWEEP_D_RANGE[1])),
        **{k: val for k, val in section("sweep").items()
           if k in ("resolution", "metric", "weight", "target_angle", "min_fidelity", "refine")},
    )
    for axis, (lo, hi) in (("z0", sweep.z0_range), ("d", sweep.d_range)):
        if not hi > lo:
            raise ConfigError(f"sweep.{axis}_max", f"must exceed sweep.{axis}_min")
    if sweep.resolution < 2:
        raise ConfigError("sweep.resolution", "must be >= 2")
    if not 0.0 <= sweep.min_fidelity <= 1.0:
        raise ConfigError("sweep.min_fidelity", "must lie in [0, 1]")

    robustness = RobustnessOptions(**section("robustness"))
    if not 0.0 <= robustness.relative_range <= 1.0:
        raise ConfigError("robustness.relative_range", "must lie in [0, 1]")
    if robustness.steps < 1:
        raise ConfigError("robustness.steps", "must be >= 1")

    cfg = RunConfig(
        geometry=geometry,
        physics=physics,
        integrator=integrator,
        scenario=v.get("scenario.name", "simulate"),
        model=v.get("model.kind", "effective"),
        frame=v.get("model.frame", "interaction"),
        initial_label=initial_label,
        alpha=alpha,
        beta=beta,
        target_angle=v.get("scenario.target_angle", TARGET_ANGLE_BY_SCENARIO["stirap"]),
        darkstate_time=v.get("darkstate.time", 0.0),
        sweep=sweep,
        robustness=robustness,
        output_directory=v.get("output.directory", settings.output_dir),
        summary_format=v.get("output.summary_format", "json"),
    )
    if cfg.model == "effective" and cfg.initial_label is not None and cfg.initial_label not in SUBSPACE_S:
        cfg = replace(cfg, model="full")
    return cfg
