"""
Schema-tagged CSV tables.

Every CSV written by leapstack starts with a schema comment line
("# leapstack-<kind> vN"), followed by a normal header row and data rows.
"""

from __future__ import annotations

import csv
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path

import numpy as np
from numpy.typing import NDArray


def write_table(
    path: str | Path,
    schema: str,
    fieldnames: Sequence[str],
    rows: Iterable[Mapping[str, object]],
) -> Path:
    """
    Write rows under a schema line and header.

    Raises:
        OSError: If the file cannot be written.
    """
    target = Path(path)
    with target.open("w", newline="", encoding="utf-8") as handle:
        handle.write(schema + "\n")
        writer = csv.DictWriter(handle, fieldnames=list(fieldnames), extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    return target


def read_table(path: str | Path) -> tuple[str, dict[str, NDArray[np.float64]]]:
    """
    Read a schema-tagged numeric table.

    Returns:
        (schema line, column name -> float array)

    Raises:
        ValueError: If the schema line is missing.
    """
    with Path(path).open(newline="", encoding="utf-8") as handle:
        schema = handle.readline().strip()
        if not schema.startswith("#"):
            raise ValueError(f"{path}: missing schema line")
        reader = csv.DictReader(handle)
        fields = list(reader.fieldnames or [])
        columns: dict[str, list[float]] = {name: [] for name in fields}
        for row in reader:
            for name in fields:
                columns[name].append(float(row[name]))
    return schema, {name: np.asarray(values, dtype=np.float64) for name, values in columns.items()}
