"""Run configuration documents and output files."""
from .config_file import RunConfig, ConfigError, parse_config, serialize_config
from .writers import write_trace, write_table, write_grid, write_summary

__all__ = [
    "RunConfig",
    "ConfigError",
    "parse_config",
    "serialize_config",
    "write_trace",
    "write_table",
    "write_grid",
    "write_summary",
]
