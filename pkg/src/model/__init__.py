"""Physical model: geometry, pulses and Hamiltonians."""
from .parameters import GeometryParams, PhysicalParams
from .pulses import PulseSnapshot, pulses_at, four_photon_detuning
from .hamiltonians import EffectiveHamiltonian, FullHamiltonian

__all__ = [
    "GeometryParams",
    "PhysicalParams",
    "PulseSnapshot",
    "pulses_at",
    "four_photon_detuning",
    "EffectiveHamiltonian",
    "FullHamiltonian",
]
