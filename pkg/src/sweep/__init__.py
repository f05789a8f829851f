"""Parameter scans."""
from .scan import (
    SweepGrid,
    OperatingPoint,
    NoViablePointError,
    scan_cells,
    scan2d,
    grid_from_cells,
    find_operating_point,
    refine_operating_point,
    z0_undersampled,
)
from .robustness import robustness_scan, robustness_table

__all__ = [
    "SweepGrid",
    "OperatingPoint",
    "NoViablePointError",
    "scan_cells",
    "scan2d",
    "grid_from_cells",
    "find_operating_point",
    "refine_operating_point",
    "z0_undersampled",
    "robustness_scan",
    "robustness_table",
]
