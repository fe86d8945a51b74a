"""Offline figure rendering for vanetq run artifacts."""

from .data import SchemaError
from .plots import KINDS, render

__version__ = "0.1.0"

__all__ = ["KINDS", "SchemaError", "render", "__version__"]
