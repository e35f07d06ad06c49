"""Trial logs and their CSV representation."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
import pathlib
from typing import TYPE_CHECKING, ClassVar

import numpy as np

from cutmpc import log
from cutmpc.errors import DataError


if TYPE_CHECKING:
    from cutmpc.cut_types import FloatArray


logger = log.get_logger(__name__)

BASE_COLUMNS = ("t", "p_y", "p_z", "F_s_y", "F_s_z", "F_r_y", "F_r_z")
UNITS = {
    "t": "s",
    "p_y": "m",
    "p_z": "m",
    "F_s_y": "N",
    "F_s_z": "N",
    "F_r_y": "N",
    "F_r_z": "N",
    "cut_front": "m",
    "F_r_star_y": "N",
    "F_r_star_z": "N",
    "cost": "1",
    "tick_wall_s": "s",
}


@dataclass
class TrialLog:
    """Time series of one closed-loop episode.

    ``extra`` holds optional per-step columns (``cut_front``, MPC outputs, ...)
    written after the base columns in insertion order.
    """

    t: FloatArray
    p: FloatArray
    f_s: FloatArray
    f_r: FloatArray
    extra: dict[str, FloatArray] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def columns(self) -> tuple[str, ...]:
        return (*BASE_COLUMNS, *self.extra)

    def table(self) -> FloatArray:
        base = [self.t[:, None], self.p, self.f_s, self.f_r]
        return np.hstack([*base, *(col[:, None] for col in self.extra.values())])

    def without(self, *names: str) -> TrialLog:
        """Copy without the given extra columns."""
        extra = {k: v for k, v in self.extra.items() if k not in names}
        return TrialLog(t=self.t, p=self.p, f_s=self.f_s, f_r=self.f_r, extra=extra)

    def write_csv(self, path: str | pathlib.Path) -> pathlib.Path:
        """Write the log with unit comment lines before the header.

        Floats are written with ``repr`` so reading them back is lossless.
        """
        path = pathlib.Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as f:
            for name in self.columns:
                f.write(f"# {name}: {UNITS.get(name, '1')}\n")
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(self.columns)
            for row in self.table():
                writer.writerow([repr(float(x)) for x in row])
        return path

    @classmethod
    def read_csv(cls, path: str | pathlib.Path) -> TrialLog:
        """Read a log written by :meth:`write_csv`.

        Raises:
            DataError: If the file is missing or lacks the base columns
        """
        path = pathlib.Path(path)
        try:
            lines = path.read_text(encoding="utf-8").splitlines()
        except OSError as e:
            msg = f"Cannot read trial log {path}: {e}"
            raise DataError(msg) from e
        rows = list(csv.reader(line for line in lines if line and not line.startswith("#")))
        if not rows:
            msg = f"Trial log {path} is empty"
            raise DataError(msg)
        header, body = rows[0], rows[1:]
        if tuple(header[: len(BASE_COLUMNS)]) != BASE_COLUMNS:
            msg = f"Trial log {path} has columns {header}, expected to start with {BASE_COLUMNS}"
            raise DataError(msg)
        try:
            data = np.array(body, dtype=np.float64).reshape(len(body), len(header))
        except ValueError as e:
            msg = f"Trial log {path} contains malformed rows: {e}"
            raise DataError(msg) from e
        extra = {name: data[:, i].copy() for i, name in enumerate(header) if i >= len(BASE_COLUMNS)}
        return cls(
            t=data[:, 0].copy(),
            p=data[:, 1:3].copy(),
            f_s=data[:, 3:5].copy(),
            f_r=data[:, 5:7].copy(),
            extra=extra,
        )


@dataclass
class TrialLogBuilder:
    """Row-wise accumulator producing a :class:`TrialLog`."""

    extra_columns: tuple[str, ...] = ()
    _rows: list[list[float]] = field(default_factory=list)

    n_base: ClassVar[int] = len(BASE_COLUMNS)

    def append(
        self,
        t: float,
        p: FloatArray,
        f_s: FloatArray,
        f_r: FloatArray,
        **extra: float,
    ) -> None:
        if set(extra) != set(self.extra_columns):
            msg = f"Expected extra columns {self.extra_columns}, got {sorted(extra)}"
            raise ValueError(msg)
        row = [t, *map(float, p), *map(float, f_s), *map(float, f_r)]
        row.extend(float(extra[name]) for name in self.extra_columns)
        self._rows.append(row)

    def __len__(self) -> int:
        return len(self._rows)

    def build(self) -> TrialLog:
        width = self.n_base + len(self.extra_columns)
        data = np.array(self._rows, dtype=np.float64).reshape(len(self._rows), width)
        extra = {name: data[:, self.n_base + i].copy() for i, name in enumerate(self.extra_columns)}
        return TrialLog(
            t=data[:, 0].copy(),
            p=data[:, 1:3].copy(),
            f_s=data[:, 3:5].copy(),
            f_r=data[:, 5:7].copy(),
            extra=extra,
        )
