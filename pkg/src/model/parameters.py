"""
Physical Configuration Module

Parameter containers for the two-atom / cavity / laser geometry and for the
field couplings. Values are SI (metres, seconds) and angular rates (rad/s).
"""

import math
from dataclasses import dataclass, replace
from typing import Optional

from config.settings import (
    DEFAULT_X0,
    REFERENCE_VELOCITY,
    REFERENCE_WAIST_LASER,
    REFERENCE_WAIST_CAVITY,
    REFERENCE_WAVELENGTH,
    REFERENCE_OMEGA0,
    REFERENCE_G0,
    REFERENCE_Z0,
    REFERENCE_D,
    REFERENCE_TAU,
    SPEED_OF_LIGHT,
)


@dataclass(frozen=True)
class GeometryParams:
    """
    Atom trajectories and beam/cavity geometry.

    The cavity axis is z with the TEM00 mode centred at the origin; the laser
    beam propagates along y and is centred on the line x = d, z = 0. Atom 1
    travels in the plane z = z0, atom 2 in the plane z = 0.
    """
    z0: float = REFERENCE_Z0
    d: float = REFERENCE_D
    x0: float = DEFAULT_X0
    y0: float = 0.0
    v1: float = REFERENCE_VELOCITY
    v2: float = REFERENCE_VELOCITY
    theta1: float = 0.0
    theta2: float = math.pi
    tau: float = 0.0
    wavelength: float = REFERENCE_WAVELENGTH
    waist_cavity: float = REFERENCE_WAIST_CAVITY
    waist_laser: float = REFERENCE_WAIST_LASER

    def __post_init__(self):
        for name in ("v1", "v2", "wavelength", "waist_cavity", "waist_laser"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0 (got {getattr(self, name)!r})")
        if not 0.0 <= self.theta1 < math.pi / 2:
            raise ValueError(f"theta1 must lie in [0, pi/2) (got {self.theta1!r})")
        if not math.pi / 2 < self.theta2 <= math.pi:
            raise ValueError(f"theta2 must lie in (pi/2, pi] (got {self.theta2!r})")

    @property
    def k(self) -> float:
        """Laser wavevector magnitude 2*pi/lambda (1/m)."""
        return 2.0 * math.pi / self.wavelength

    @property
    def sin_theta1(self) -> float:
        return math.sin(self.theta1)

    @property
    def sin_theta2(self) -> float:
        # measured from the negative x axis so that theta2 = pi gives an exact zero
        return math.sin(math.pi - self.theta2)

    @property
    def cos_theta2(self) -> float:
        return -math.cos(math.pi - self.theta2)

    @property
    def time_origin(self) -> float:
        """Trajectory time at which atom 1 crosses the cavity centre (x = 0)."""
        return self.x0 / (self.v1 * math.cos(self.theta1))

    @property
    def transit_laser(self) -> float:
        """T_L = W_L / v (uses the slower atom)."""
        return self.waist_laser / min(self.v1, self.v2)

    @property
    def transit_cavity(self) -> float:
        """T_C = W_C / v (uses the slower atom)."""
        return self.waist_cavity / min(self.v1, self.v2)

    def with_velocity(self, v: float) -> "GeometryParams":
        """Return a copy with both atoms moving at speed v."""
        return replace(self, v1=v, v2=v)


@dataclass(frozen=True)
class PhysicalParams:
    """
    Peak couplings, resonance frequency and (diagnostic) loss rates.

    The cavity mode, the laser and the atomic transition are resonant, so a
    single frequency is stored. When omega is None the optical frequency
    2*pi*c/lambda of the geometry is used.
    """
    Omega0: float = REFERENCE_OMEGA0
    G0: float = REFERENCE_G0
    omega: Optional[float] = None
    kappa: float = 0.0
    Gamma: float = 0.0

    def __post_init__(self):
        if not self.Omega0 > 0:
            raise ValueError(f"Omega0 must be > 0 (got {self.Omega0!r})")
        if not self.G0 > 0:
            raise ValueError(f"G0 must be > 0 (got {self.G0!r})")
        if self.omega is not None and not self.omega > 0:
            raise ValueError(f"omega must be > 0 (got {self.omega!r})")
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0 (got {self.kappa!r})")
        if self.Gamma < 0:
            raise ValueError(f"Gamma must be >= 0 (got {self.Gamma!r})")

    def resonance(self, geometry: GeometryParams) -> float:
        """omega_e = omega_C = omega_L (rad/s)."""
        if self.omega is not None:
            return self.omega
        return 2.0 * math.pi * SPEED_OF_LIGHT / geometry.wavelength

    @property
    def has_losses(self) -> bool:
        return self.kappa > 0 or self.Gamma > 0


def reference_geometry(**overrides) -> GeometryParams:
    """Geometry of the two-atom STIRAP reference run (second atom 9 us ahead)."""
    values = dict(tau=REFERENCE_TAU)
    values.update(overrides)
    return GeometryParams(**values)


def contour_scan_physics(geometry: GeometryParams, **overrides) -> PhysicalParams:
    """Couplings of the (z0, d) contour scan: Omega0 = 20 v / W_L, G0 = 100 v / W_C."""
    v = min(geometry.v1, geometry.v2)
    values = dict(
        Omega0=20.0 * v / geometry.waist_laser,
        G0=100.0 * v / geometry.waist_cavity,
    )
    values.update(overrides)
    return PhysicalParams(**values)
