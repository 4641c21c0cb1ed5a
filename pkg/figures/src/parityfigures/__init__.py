"""Figure renderers for the parity-measurement experiment CSVs.

This package consumes only the documented CSV schemas; it performs no
physics computation of its own.
"""

from .cli import main
from .plots import FIGURE_IDS, render
from .schemas import SCHEMAS, SchemaError, load_table

__version__ = "1.0.0"

__all__ = ["FIGURE_IDS", "SCHEMAS", "SchemaError", "load_table", "main",
           "render"]
