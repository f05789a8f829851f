"""Adiabatic-passage diagnostics."""
from .dark_state import dark_state, dark_overlap, mixing_angle, mixing_angle_report, fstirap_conditions
from .adiabaticity import adiabaticity_check, eigen_gap_trace
from .entanglement import target_fidelity, concurrence
from .exposure import exposure_metrics

__all__ = [
    "dark_state",
    "dark_overlap",
    "mixing_angle",
    "mixing_angle_report",
    "fstirap_conditions",
    "adiabaticity_check",
    "eigen_gap_trace",
    "target_fidelity",
    "concurrence",
    "exposure_metrics",
]
