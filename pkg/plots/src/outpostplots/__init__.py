"""Figures from outpostlab CLI outputs.

This package consumes the CSV and JSON files the outpostlab command line
writes and draws them; it never recomputes model quantities.
"""

from .figspec import FigureSpec, PlotsError, SchemaMismatch, load_spec
from .render import render

__version__ = "0.1.0"

__all__ = [
    "FigureSpec",
    "PlotsError",
    "SchemaMismatch",
    "load_spec",
    "render",
    "__version__",
]
