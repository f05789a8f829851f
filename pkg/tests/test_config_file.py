"""
Tests for run configuration documents: units, defaults, validation errors and
the serialize/parse round trip.
"""

import sys
import math
from pathlib import Path

import pytest

# Add project root to path
PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from config.settings import MHZ, MICRON
from src.integrations.config_file import (
    ConfigError,
    RunConfig,
    parse_config,
    parse_quantity,
    serialize_config,
)
from src.model.basis import FULL_SPACE, SUBSPACE_S
from src.model.parameters import GeometryParams, PhysicalParams

REFERENCE_DOCUMENT = """
# Two-atom STIRAP, second atom 9 us ahead
scenario.name = simulate
geometry.z0 = 5.5um
geometry.d = 6 um
geometry.tau = -9us
geometry.v1 = 2 m/s
geometry.v2 = 2 m/s
physics.Omega0 = 2MHz
physics.G0 = 6.5MHz
"""


def test_empty_document_gives_defaults():
    """Every key is optional."""
    cfg = parse_config("")
    assert cfg.scenario == "simulate"
    assert cfg.model == "effective"
    assert cfg.frame == "interaction"
    assert cfg.geometry == GeometryParams()
    assert cfg.physics == PhysicalParams()
    assert cfg.initial_state().basis == SUBSPACE_S


def test_reference_document_units():
    """Unit suffixes convert to SI."""
    cfg = parse_config(REFERENCE_DOCUMENT)
    assert cfg.geometry.z0 == pytest.approx(5.5 * MICRON)
    assert cfg.geometry.d == pytest.approx(6 * MICRON)
    assert cfg.geometry.tau == pytest.approx(-9e-6)
    assert cfg.physics.Omega0 == pytest.approx(2 * MHZ)
    assert cfg.physics.G0 == pytest.approx(6.5 * MHZ)


@pytest.mark.parametrize("text, kind, expected", [
    ("780nm", "length", 780e-9),
    ("0.04 mm", "length", 4e-5),
    ("20µm", "length", 2e-5),
    ("250 ns", "time", 2.5e-7),
    ("1e6 rad/s", "rate", 1e6),
    ("3", "rate", 3.0),
    ("pi", "angle", math.pi),
    ("pi/18", "angle", math.pi / 18),
    ("0.5*pi", "angle", math.pi / 2),
    ("-pi/4", "angle", -math.pi / 4),
    ("10 deg", "angle", math.radians(10)),
])
def test_parse_quantity(text, kind, expected):
    """Numbers with unit suffixes and multiples of pi."""
    assert parse_quantity("key", text, kind) == pytest.approx(expected)


def test_wrong_unit_names_the_key():
    """A length unit on a rate is rejected with the key in the error."""
    with pytest.raises(ConfigError) as exc_info:
        parse_config("physics.Omega0 = 2um")
    assert exc_info.value.key == "physics.Omega0"
    assert "unit" in exc_info.value.constraint


@pytest.mark.parametrize("document, key", [
    ("geometry.radius = 1um", "geometry.radius"),
    ("geometry.z0 =", "geometry.z0"),
    ("geometry.z0 = five", "geometry.z0"),
    ("geometry.theta1 = pi/2", "geometry.theta1"),
    ("geometry.theta2 = 0.1", "geometry.theta2"),
    ("physics.G0 = 0", "physics.G0"),
    ("physics.kappa = -1", "physics.kappa"),
    ("model.kind = master", "model.kind"),
    ("integrator.method = euler", "integrator.method"),
    ("integrator.output_samples = 1", "integrator.output_samples"),
    ("integrator.max_refinements = two", "integrator.max_refinements"),
    ("initial.state = g3,g2,0", "initial.state"),
    ("initial.alpha = 0.5", "initial.alpha"),
    ("initial.beta = 1", "initial.alpha"),
    ("initial.state = g2,g1,0\ninitial.alpha = 1", "initial.state"),
    ("sweep.z0_min = 10um\nsweep.z0_max = 5um", "sweep.z0_max"),
    ("sweep.resolution = 1", "sweep.resolution"),
    ("sweep.min_fidelity = 1.5", "sweep.min_fidelity"),
    ("sweep.refine = maybe", "sweep.refine"),
    ("robustness.relative_range = 2", "robustness.relative_range"),
    ("robustness.parameter = kappa", "robustness.parameter"),
    ("output.summary_format = yaml", "output.summary_format"),
])
def test_config_errors(document, key):
    """Invalid documents raise ConfigError naming the offending key."""
    with pytest.raises(ConfigError) as exc_info:
        parse_config(document)
    assert exc_info.value.key == key


def test_overrides_take_precedence():
    """--set style overrides replace document values and are validated the same way."""
    cfg = parse_config(REFERENCE_DOCUMENT, {"geometry.tau": "-5us", "scenario.name": "check"})
    assert cfg.geometry.tau == pytest.approx(-5e-6)
    assert cfg.scenario == "check"

    with pytest.raises(ConfigError):
        parse_config(REFERENCE_DOCUMENT, {"geometry.nope": "1"})


def test_auto_values():
    """auto leaves the optical frequency and the integration window to be derived."""
    cfg = parse_config("physics.omega = auto\nintegrator.t_start = auto\nintegrator.step = auto")
    assert cfg.physics.omega is None
    assert cfg.integrator.t_start is None
    assert cfg.integrator.step is None
    assert cfg.physics.resonance(cfg.geometry) == pytest.approx(2 * math.pi * 299792458.0 / 780e-9)


def test_superposition_initial_state():
    """alpha|g1,g2,0> + beta|g2,g2,0> lives in the full space and selects the full model."""
    cfg = parse_config("initial.alpha = 0.6\ninitial.beta = 0.8j")
    psi = cfg.initial_state()
    assert psi.basis == FULL_SPACE
    assert psi.amplitude("g2,g2,0") == pytest.approx(0.8j)
    assert cfg.uses_full_model


def test_label_outside_subspace_switches_to_full_model():
    """A basis-state start outside the five-state subspace needs the 18-state model."""
    assert parse_config("initial.state = g2,g2,0").model == "full"
    assert parse_config("initial.state = g2,g1,0").model == "effective"


@pytest.mark.parametrize("document", [
    "",
    REFERENCE_DOCUMENT,
    "initial.alpha = 0.6\ninitial.beta = (0.48+0.64j)\nmodel.frame = lab",
    "initial.state = e,g2,0\nphysics.kappa = 1MHz\nphysics.Gamma = 2MHz\nphysics.omega = 1e9",
    "scenario.name = sweep\nsweep.z0_min = 1um\nsweep.z0_max = 3um\nsweep.resolution = 7\nsweep.metric = fidelity",
    "scenario.name = sweep\nsweep.min_fidelity = 0.9\nsweep.refine = false",
    "scenario.name = robustness\nrobustness.parameter = G0\nrobustness.steps = 3\nrobustness.scenario = half_stirap",
    "integrator.method = adaptive\nintegrator.t_start = -50us\nintegrator.t_end = 40us\nintegrator.rtol = 1e-10",
    "geometry.theta1 = pi/18\ngeometry.theta2 = 17*pi/18\noutput.summary_format = text",
])
def test_serialize_parse_round_trip(document):
    """parse(serialize(cfg)) == cfg for every resolved key."""
    cfg = parse_config(document)
    text = serialize_config(cfg)
    assert parse_config(text) == cfg
    assert serialize_config(parse_config(text)) == text


def test_serialized_document_lists_every_section():
    """Serialized documents carry all sections in SI units."""
    text = serialize_config(RunConfig())
    for prefix in ("scenario.", "model.", "geometry.", "physics.", "integrator.", "initial.",
                   "darkstate.", "sweep.", "robustness.", "output."):
        assert prefix in text
    assert "physics.omega = auto" in text


def test_shipped_sweep_document_parses():
    """The sweep document under config/ is a valid configuration."""
    text = (PROJECT_ROOT / "config" / "half_stirap_sweep.cfg").read_text(encoding="utf-8")
    cfg = parse_config(text)
    assert cfg.scenario == "sweep"
    assert cfg.sweep.resolution == 101
    assert cfg.sweep.target_angle == pytest.approx(math.pi / 4)
    assert cfg.physics.G0 == pytest.approx(5 * MHZ)


def test_shipped_window_document_parses():
    """The fine half-transfer window samples z0 well below lambda / 8 and gates on fidelity."""
    text = (PROJECT_ROOT / "config" / "half_stirap_window.cfg").read_text(encoding="utf-8")
    cfg = parse_config(text)
    z0_step = (cfg.sweep.z0_range[1] - cfg.sweep.z0_range[0]) / (cfg.sweep.resolution - 1)
    assert cfg.sweep.z0_range == pytest.approx((3.2e-6, 3.5e-6))
    assert cfg.sweep.d_range == pytest.approx((6e-6, 12e-6))
    assert z0_step < cfg.geometry.wavelength / 8
    assert cfg.sweep.min_fidelity == pytest.approx(0.96)
    assert cfg.sweep.refine is True


def test_sweep_gate_defaults():
    """Operating points are gated on fidelity 0.96 and refined by default."""
    cfg = parse_config("scenario.name = sweep")
    assert cfg.sweep.min_fidelity == pytest.approx(0.96)
    assert cfg.sweep.refine is True
    assert parse_config("sweep.refine = no").sweep.refine is False
