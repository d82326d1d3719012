"""Result rows and their CSV persistence.

One row per (configuration x seed).  Floats are serialized with six
significant digits; reading a written file reproduces the rows exactly,
so append + re-read round-trips are stable.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

__all__ = ["ResultRow", "COLUMNS", "append_rows", "read_rows", "format_float"]

COLUMNS = ["system", "n_samples", "param", "direction", "variant", "seed",
           "estimate", "truth", "wall_time_s"]


def format_float(value: float) -> str:
    return format(float(value), ".6g")


def _round6(value: float | None) -> float | None:
    return None if value is None else float(format_float(value))


@dataclass
class ResultRow:
    system: str
    n_samples: int
    param: float        # the swept quantity (coupling, stack depth, lag, ...)
    direction: str
    variant: str        # estimator name, e.g. "c1"
    seed: int
    estimate: float
    truth: float | None = None
    wall_time_s: float = 0.0

    def __post_init__(self):
        # keep floats at serialized precision so round-trips are exact
        self.param = _round6(self.param)
        self.estimate = _round6(self.estimate)
        self.truth = _round6(self.truth)
        self.wall_time_s = _round6(self.wall_time_s)

    def to_csv(self) -> list[str]:
        return [self.system, str(self.n_samples), format_float(self.param),
                self.direction, self.variant, str(self.seed),
                format_float(self.estimate),
                "" if self.truth is None else format_float(self.truth),
                format_float(self.wall_time_s)]

    @classmethod
    def from_csv(cls, rec: list[str]) -> "ResultRow":
        return cls(system=rec[0], n_samples=int(rec[1]), param=float(rec[2]),
                   direction=rec[3], variant=rec[4], seed=int(rec[5]),
                   estimate=float(rec[6]),
                   truth=float(rec[7]) if rec[7] else None,
                   wall_time_s=float(rec[8]))


def append_rows(path, rows: list[ResultRow]) -> None:
    """Append to a results CSV, writing the header only on creation."""
    fresh = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="") as fh:
        writer = csv.writer(fh)
        if fresh:
            writer.writerow(COLUMNS)
        for row in rows:
            writer.writerow(row.to_csv())


def read_rows(path) -> list[ResultRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != COLUMNS:
            raise ValueError(f"{path}: unexpected header {header}")
        return [ResultRow.from_csv(rec) for rec in reader if rec]
