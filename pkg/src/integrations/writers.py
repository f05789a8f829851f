"""
Output Writers

Delimited-text artifacts for a scenario run. Every file starts with comment
lines (`# key = value`) echoing the fully resolved run configuration; data
sections hold no timestamps, so the same configuration reproduces the same
bytes.
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
import pandas as pd

from src.dynamics.propagator import SimulationTrace
from src.sweep.scan import SweepGrid
from .config_file import KEYS, RunConfig, config_items

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def config_lines(cfg: RunConfig) -> List[str]:
    """Resolved configuration as `key = value` strings."""
    return [f"{key} = {KEYS[key].format(value)}" for key, value in config_items(cfg)]


def _header(cfg: RunConfig) -> str:
    return "".join(f"# {line}\n" for line in config_lines(cfg))


def _prepare(path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_table(df: pd.DataFrame, path: PathLike, cfg: RunConfig, header: bool = True) -> Path:
    """Write a table as CSV below the configuration comment block."""
    path = _prepare(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(_header(cfg))
        df.to_csv(f, index=False, header=header, na_rep="nan", lineterminator="\n")
    logger.debug(f"Wrote {len(df)} rows to {path}")
    return path


def write_trace(trace: SimulationTrace, path: PathLike, cfg: RunConfig) -> Path:
    """Columns t, P(<label>) per basis state, norm (= ||psi||^2), dark_overlap."""
    return write_table(trace.to_frame(), path, cfg)


def write_grid(grid: SweepGrid, directory: PathLike, cfg: RunConfig) -> Dict[str, Path]:
    """
    Grid matrix plus its two axis files.

    grid.csv has one row per z0 and one column per d (no header row; invalid
    cells are written as nan); z0_axis.csv and d_axis.csv hold the axes.
    """
    directory = Path(directory)
    return {
        "grid": write_table(pd.DataFrame(grid.values), directory / "grid.csv", cfg, header=False),
        "z0_axis": write_table(pd.DataFrame({"z0": grid.z0_axis}), directory / "z0_axis.csv", cfg),
        "d_axis": write_table(pd.DataFrame({"d": grid.d_axis}), directory / "d_axis.csv", cfg),
    }


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays, complex numbers and non-finite floats for JSON output."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": to_jsonable(value.real), "im": to_jsonable(value.imag)}
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    return value


def _flatten(prefix: str, value: Any, out: List[str]) -> None:
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    else:
        out.append(f"{prefix}: {json.dumps(value, ensure_ascii=False)}")


def write_summary(summary: Dict[str, Any], path: PathLike, cfg: RunConfig) -> Path:
    """
    Scenario summary.

    JSON: an object with a "config" section and the summary entries.
    Text: configuration comment block, then one `dotted.key: value` line per entry.
    """
    path = _prepare(path)
    data = to_jsonable(summary)
    with open(path, "w", encoding="utf-8", newline="") as f:
        if cfg.summary_format == "json":
            config = dict(line.split(" = ", 1) for line in config_lines(cfg))
            json.dump({"config": config, **data}, f, indent=2, ensure_ascii=False)
            f.write("\n")
        else:
            lines: List[str] = []
            _flatten("", data, lines)
            f.write(_header(cfg))
            f.write("".join(line + "\n" for line in lines))
    logger.info(f"Summary written to {path}")
    return path
