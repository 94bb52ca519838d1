"""
Figure-data exporters.

Each exporter turns rollout trajectories or learning curves into one
plot-ready CSV (schema line, header, rows). Rendering is left to external
tools. Every row carries a series column, the stem of the input file it
came from, so several runs can be overlaid.

Architecture:
    FigureRegistry
        └── FigureExporter (interface)
            ├── OmniExporter       birds-eye CoM paths and landing targets
            ├── YawRateExporter    world yaw rate over time
            ├── PitchExporter      body pitch over time
            ├── ContactsExporter   actual and desired foot contacts
            └── CurveExporter      learning curves
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from collections.abc import Iterator, Sequence
from pathlib import Path
from typing import ClassVar

import numpy as np
from numpy.typing import NDArray
from scipy.spatial.transform import Rotation

from leapstack.constants import LEG_NAMES, LogSchema
from leapstack.exceptions import UnknownFigureError
from leapstack.export.tables import read_table, write_table

logger = logging.getLogger(__name__)

Columns = dict[str, NDArray[np.float64]]


def _load(path: Path, schema: str) -> Columns:
    found, columns = read_table(path)
    if found != schema:
        raise ValueError(f"{path}: expected {schema!r}, found {found!r}")
    return columns


class FigureExporter(ABC):
    """Converts input tables into one figure-data table."""

    key: ClassVar[str]
    """Name used on the command line."""

    columns: ClassVar[tuple[str, ...]]
    """Output columns after series."""

    input_schema: ClassVar[str] = LogSchema.TRAJECTORY

    @abstractmethod
    def rows(self, columns: Columns) -> Iterator[dict[str, object]]:
        """Output rows for one input table."""
        ...

    def export(self, inputs: Sequence[str | Path], out: str | Path) -> Path:
        """
        Write the figure data for all inputs.

        Raises:
            ValueError: If no input is given or an input has the wrong schema.
            OSError: If an input cannot be read or the output written.
        """
        if not inputs:
            raise ValueError("at least one input file is required")
        rows: list[dict[str, object]] = []
        for source in map(Path, inputs):
            columns = _load(source, self.input_schema)
            rows.extend({"series": source.stem, **row} for row in self.rows(columns))
        target = write_table(out, LogSchema.FIGURE, ("series", *self.columns), rows)
        logger.info("Wrote %s figure data (%d rows) to %s", self.key, len(rows), target)
        return target


class OmniExporter(FigureExporter):
    """CoM path in the ground plane plus one cross per distinct landing target."""

    key = "omni"
    columns = ("kind", "x", "y")

    def rows(self, columns: Columns) -> Iterator[dict[str, object]]:
        for x, y in zip(columns["px"], columns["py"], strict=True):
            yield {"kind": "path", "x": x, "y": y}
        targets = np.column_stack([columns["target_x"], columns["target_y"]])
        _, first = np.unique(targets.round(9), axis=0, return_index=True)
        for x, y in targets[np.sort(first)]:
            yield {"kind": "target", "x": x, "y": y}


class YawRateExporter(FigureExporter):
    """World-frame yaw rate from the body angular velocity and orientation."""

    key = "yawrate"
    columns = ("time", "yaw_rate")

    def rows(self, columns: Columns) -> Iterator[dict[str, object]]:
        quats = np.column_stack([columns[c] for c in ("qx", "qy", "qz", "qw")])
        omega = np.column_stack([columns[c] for c in ("wx", "wy", "wz")])
        yaw_rate = Rotation.from_quat(quats).apply(omega)[:, 2]
        for t, rate in zip(columns["time"], yaw_rate, strict=True):
            yield {"time": t, "yaw_rate": rate}


class PitchExporter(FigureExporter):
    """Body pitch angle."""

    key = "pitch"
    columns = ("time", "pitch")

    def rows(self, columns: Columns) -> Iterator[dict[str, object]]:
        for t, pitch in zip(columns["time"], columns["pitch"], strict=True):
            yield {"time": t, "pitch": pitch}


class ContactsExporter(FigureExporter):
    """Actual and scheduled contact flags per leg at simulator rate."""

    key = "contacts"
    columns = (
        "time",
        *(f"contact_{leg}" for leg in LEG_NAMES),
        *(f"desired_contact_{leg}" for leg in LEG_NAMES),
    )

    def rows(self, columns: Columns) -> Iterator[dict[str, object]]:
        names = self.columns[1:]
        for i, t in enumerate(columns["time"]):
            yield {"time": t, **{name: int(columns[name][i]) for name in names}}


class CurveExporter(FigureExporter):
    """Evaluation return against training episodes."""

    input_schema = LogSchema.LEARNING_CURVE
    key = "curve"
    columns = ("episodes", "mean_return", "std_return")

    def rows(self, columns: Columns) -> Iterator[dict[str, object]]:
        for i, episodes in enumerate(columns["episodes"]):
            yield {
                "episodes": int(episodes),
                "mean_return": columns["mean_return"][i],
                "std_return": columns["std_return"][i],
            }


class FigureRegistry:
    """
    Registry of figure exporters by key.

    Example:
        >>> registry = create_default_registry()
        >>> registry.get("pitch").export(["baseline.csv", "trained.csv"], "pitch.csv")
    """

    def __init__(self) -> None:
        self._exporters: dict[str, FigureExporter] = {}

    def register(self, exporter: FigureExporter) -> None:
        """Register an exporter; replaces any exporter with the same key."""
        self._exporters[exporter.key] = exporter

    def get(self, key: str) -> FigureExporter:
        """
        Look up an exporter.

        Raises:
            UnknownFigureError: If no exporter is registered under key.
        """
        try:
            return self._exporters[key]
        except KeyError:
            raise UnknownFigureError(key) from None

    def __contains__(self, key: object) -> bool:
        return key in self._exporters

    @property
    def keys(self) -> tuple[str, ...]:
        return tuple(sorted(self._exporters))

    def __repr__(self) -> str:
        return f"FigureRegistry(keys={list(self.keys)})"


def create_default_registry() -> FigureRegistry:
    """Registry with the built-in exporters."""
    registry = FigureRegistry()
    for exporter in (
        OmniExporter(),
        YawRateExporter(),
        PitchExporter(),
        ContactsExporter(),
        CurveExporter(),
    ):
        registry.register(exporter)
    return registry


def export_figure(key: str, inputs: Sequence[str | Path], out: str | Path) -> Path:
    """Export figure data with the default registry."""
    return create_default_registry().get(key).export(inputs, out)
