"""Figure-data exporters and schema-tagged CSV tables."""

from leapstack.export.figures import (
    FigureExporter,
    FigureRegistry,
    create_default_registry,
    export_figure,
)
from leapstack.export.tables import read_table, write_table

__all__ = [
    "FigureExporter",
    "FigureRegistry",
    "create_default_registry",
    "export_figure",
    "read_table",
    "write_table",
]
