"""CSV dataset reader.

Format: UTF-8, header row, first column ``y``, remaining columns are
predictors in order, ``.`` decimal point, no missing values.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .regression import Dataset, ModelSpec


class CsvData:
    def __init__(self, names: list[str], dataset: Dataset):
        self.names = names
        self.dataset = dataset

    def spec(self, columns: list[str]) -> ModelSpec:
        """Map predictor names to a ModelSpec; unknown names raise ValidationError."""
        index = {name: k for k, name in enumerate(self.names)}
        missing = [c for c in columns if c not in index]
        if missing:
            raise ValidationError(
                f"unknown column {missing[0]!r}; available predictors: {', '.join(self.names)}"
            )
        if len(set(columns)) != len(columns):
            raise ValidationError(f"duplicate column in {columns}")
        return ModelSpec.of(index[c] for c in columns)


def read_csv(path: str | Path) -> CsvData:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValidationError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if not header or header[0] != "y":
        raise ValidationError(f"{path}: line 1: first column must be named 'y', got {header[:1]}")
    if len(header) < 2:
        raise ValidationError(f"{path}: line 1: no predictor columns")
    if len(set(header)) != len(header):
        raise ValidationError(f"{path}: line 1: duplicate column names")
    values = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise ValidationError(
                f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}"
            )
        parsed = []
        for name, cell in zip(header, row):
            try:
                v = float(cell)
            except ValueError:
                raise ValidationError(
                    f"{path}: line {lineno}, column {name!r}: cannot parse {cell!r} as a number"
                ) from None
            if not math.isfinite(v):
                raise ValidationError(f"{path}: line {lineno}, column {name!r}: non-finite value")
            parsed.append(v)
        values.append(parsed)
    if not values:
        raise ValidationError(f"{path}: no data rows")
    arr = np.array(values)
    return CsvData(header[1:], Dataset(arr[:, 0], arr[:, 1:]))


def write_csv(path: str | Path, y: np.ndarray, x: np.ndarray, names: list[str] | None = None) -> None:
    names = names or [f"x{k + 1}" for k in range(x.shape[1])]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["y", *names])
        for yi, xi in zip(y, x):
            w.writerow([format(float(yi), ".17g"), *(format(float(v), ".17g") for v in xi)])
