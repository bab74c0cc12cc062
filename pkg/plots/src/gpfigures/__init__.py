"""Figure rendering for qubit-gp sweep tables (CSV interface only)."""

from .recipes import CSV_COLUMNS, SchemaError, load_table, recipe
from .render import render

__all__ = ["CSV_COLUMNS", "SchemaError", "load_table", "recipe", "render"]
__version__ = "0.1.0"
