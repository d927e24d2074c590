"""Time series of flow monitors, with lossless CSV round-trip."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

COLUMNS = (
    "t", "dt", "rho_min", "rho_max", "grad_max", "kappa_min", "kappa_max", "u_min",
    "theta_min", "theta_max", "residual_linf", "residual_l2", "Q", "J", "conserved",
    "eta", "c_star", "evenness_defect",
)

FLOAT_FORMAT = "%.17g"


def fmt(x: float) -> str:
    return FLOAT_FORMAT % x


@dataclass
class DiagnosticsTrace:
    rows: list = field(default_factory=list)

    def append(self, **values: float) -> None:
        missing = set(COLUMNS) - values.keys()
        if missing:
            raise KeyError(f"trace row is missing {sorted(missing)}")
        t = float(values["t"])
        if self.rows and not t > self.rows[-1][0]:
            raise ValueError(f"trace times must increase strictly (t={t!r} after {self.rows[-1][0]!r})")
        self.rows.append(tuple(float(values[c]) for c in COLUMNS))

    def __len__(self) -> int:
        return len(self.rows)

    def as_array(self) -> np.ndarray:
        if not self.rows:
            return np.empty((0, len(COLUMNS)))
        return np.array(self.rows, dtype=float)

    def column(self, name: str) -> np.ndarray:
        return self.as_array()[:, COLUMNS.index(name)]

    def last(self, name: str) -> float:
        return self.rows[-1][COLUMNS.index(name)]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(COLUMNS)
            for row in self.rows:
                writer.writerow([fmt(x) for x in row])

    @classmethod
    def from_csv(cls, path: str | Path) -> "DiagnosticsTrace":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = tuple(next(reader))
            if header != COLUMNS:
                raise ValueError(f"unexpected trace header {header}")
            rows = [tuple(float(x) for x in line) for line in reader]
        return cls(rows=rows)
