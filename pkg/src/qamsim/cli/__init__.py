"""Command-line interface: configs, file formats, and subcommands."""

from .config import RunConfig, load_config, validate_config
from .formats import read_csv, read_grid, write_csv, write_grid
from .main import main

__all__ = [
    "RunConfig",
    "load_config",
    "validate_config",
    "read_csv",
    "read_grid",
    "write_csv",
    "write_grid",
    "main",
]
