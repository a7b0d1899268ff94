"""Figure rendering for fair-nrm experiment CSVs."""

from .figures import (
    KINDS,
    EmptySelectionError,
    FigureSpec,
    SchemaError,
    build_figure,
    read_aggregates,
    render,
    render_all,
)

__all__ = [
    "KINDS",
    "EmptySelectionError",
    "FigureSpec",
    "SchemaError",
    "build_figure",
    "read_aggregates",
    "render",
    "render_all",
]
__version__ = "0.1.0"
