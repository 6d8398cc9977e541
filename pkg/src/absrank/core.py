"""Labeled performance matrices: construction, CSV I/O and row projection."""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import LabelError, NotFoundError, ParseError, ShapeError, SizeError

__all__ = [
    "PerformanceMatrix",
    "load_matrix",
    "save_matrix",
    "matrix_to_csv",
    "project",
]


def _check_labels(labels: Sequence[str], what: str) -> tuple[str, ...]:
    labels = tuple(str(s) for s in labels)
    seen: set[str] = set()
    for s in labels:
        if s in seen:
            raise LabelError(f"duplicate {what} label {s!r}")
        seen.add(s)
    return labels


@dataclass(frozen=True, eq=False)
class PerformanceMatrix:
    """An ``n x p`` matrix of metric values, one row per algorithm.

    ``values`` holds the metric as recorded. When ``lower_is_better`` is false
    the matrix describes a higher-is-better metric and :attr:`loss` exposes
    the negated values, so every downstream computation can assume that
    smaller is better.
    """

    algorithms: tuple[str, ...]
    problems: tuple[str, ...]
    values: np.ndarray
    lower_is_better: bool = True
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        algorithms = _check_labels(self.algorithms, "algorithm")
        problems = _check_labels(self.problems, "problem")
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape != (len(algorithms), len(problems)):
            raise ShapeError(
                f"values have shape {values.shape}, expected "
                f"({len(algorithms)}, {len(problems)})"
            )
        if len(algorithms) < 2:
            raise SizeError("a performance matrix needs at least 2 algorithms")
        if len(problems) < 1:
            raise SizeError("a performance matrix needs at least 1 problem")
        if not np.all(np.isfinite(values)):
            i, j = np.argwhere(~np.isfinite(values))[0]
            raise ParseError(
                f"non-finite value at algorithm {algorithms[i]!r}, problem {problems[j]!r}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "algorithms", algorithms)
        object.__setattr__(self, "problems", problems)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_index", {a: i for i, a in enumerate(algorithms)})

    @property
    def n(self) -> int:
        return len(self.algorithms)

    @property
    def p(self) -> int:
        return len(self.problems)

    @property
    def loss(self) -> np.ndarray:
        """Values oriented so that lower is better."""
        return self.values if self.lower_is_better else -self.values

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise NotFoundError(f"unknown algorithm {label!r}") from None

    def row(self, label: str) -> np.ndarray:
        return self.values[self.index(label)]

    def column(self, problem: str) -> np.ndarray:
        try:
            j = self.problems.index(problem)
        except ValueError:
            raise NotFoundError(f"unknown problem {problem!r}") from None
        return self.values[:, j]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PerformanceMatrix):
            return NotImplemented
        return (
            self.algorithms == other.algorithms
            and self.problems == other.problems
            and self.lower_is_better == other.lower_is_better
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self) -> int:
        return hash((self.algorithms, self.problems, self.lower_is_better, self.values.tobytes()))


def _parse_cell(text: str, line: int, algorithm: str, problem: str) -> float:
    try:
        x = float(text.strip())
    except ValueError:
        raise ParseError(
            f"line {line}: cell for algorithm {algorithm!r}, problem {problem!r} "
            f"is not a number: {text!r}"
        ) from None
    if not math.isfinite(x):
        raise ParseError(
            f"line {line}: cell for algorithm {algorithm!r}, problem {problem!r} "
            f"is not finite: {text!r}"
        )
    return x


def load_matrix(
    source: TextIO | str | os.PathLike, lower_is_better: bool = True
) -> PerformanceMatrix:
    """Read a matrix from CSV.

    The first row is ``algorithm,<problem 1>,<problem 2>,...``; every further
    row starts with an algorithm label followed by one number per problem.
    ``source`` is an open text stream or a filesystem path.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="", encoding="utf-8") as fh:
            return load_matrix(fh, lower_is_better)

    rows = [r for r in csv.reader(source) if r and any(c.strip() for c in r)]
    if not rows:
        raise ShapeError("empty CSV")
    header = [c.strip() for c in rows[0]]
    if len(header) < 2:
        raise ShapeError("header must name at least one problem")
    problems = header[1:]
    algorithms: list[str] = []
    body: list[list[float]] = []
    for line, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ShapeError(f"line {line}: expected {len(header)} fields, got {len(row)}")
        label = row[0].strip()
        algorithms.append(label)
        body.append([_parse_cell(c, line, label, p) for c, p in zip(row[1:], problems)])
    if not body:
        raise SizeError("CSV has a header but no algorithm rows")
    return PerformanceMatrix(tuple(algorithms), tuple(problems), np.array(body), lower_is_better)


def save_matrix(M: PerformanceMatrix, sink: TextIO | str | os.PathLike) -> None:
    """Write ``M`` as CSV using 17 significant digits, which round-trips exactly."""
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", newline="", encoding="utf-8") as fh:
            save_matrix(M, fh)
        return
    w = csv.writer(sink, lineterminator="\n")
    w.writerow(["algorithm", *M.problems])
    for label, row in zip(M.algorithms, M.values):
        w.writerow([label, *(f"{x:.16e}" for x in row)])


def matrix_to_csv(M: PerformanceMatrix) -> str:
    buf = io.StringIO()
    save_matrix(M, buf)
    return buf.getvalue()


def project(M: PerformanceMatrix, keep: Iterable[str]) -> PerformanceMatrix:
    """Restrict ``M`` to the algorithms in ``keep``, preserving row order."""
    keep = set(keep)
    for label in keep:
        M.index(label)
    if len(keep) < 2:
        raise SizeError("a projection must keep at least 2 algorithms")
    rows = [i for i, a in enumerate(M.algorithms) if a in keep]
    return PerformanceMatrix(
        tuple(M.algorithms[i] for i in rows), M.problems, M.values[rows], M.lower_is_better
    )
