"""Benchmark problems and the mean-of-best performance metric."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DomainError, FormatError, ShapeError

__all__ = [
    "BenchmarkProblem",
    "KINDS",
    "evaluate",
    "evaluate_many",
    "optimum",
    "metric_m0",
    "load_problem",
    "problem_from_dict",
]

KINDS = ("sphere", "shifted-sphere", "cone", "rastrigin")


@dataclass(frozen=True, eq=False)
class BenchmarkProblem:
    """An objective on the box ``[lo_i, hi_i]`` with run budget ``c`` and ``r`` rounds.

    ``params`` by kind:

    * ``sphere``: none.
    * ``shifted-sphere``: ``center`` (the optimum), optional ``bias``.
    * ``cone``: ``center``, ``y_min`` (default 0), ``slope`` (default 1),
      ``norm`` ``"l2"`` (default) or ``"linf"`` for a pyramid.
    * ``rastrigin``: optional ``center`` and ``amplitude`` (default 10).

    A missing ``center`` means the origin.
    """

    kind: str
    d: int
    lo: np.ndarray
    hi: np.ndarray
    params: dict = field(default_factory=dict)
    c: int = 1
    r: int = 1
    label: str = ""

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise DomainError(f"unknown problem kind {self.kind!r}; expected one of {KINDS}")
        if self.d < 1 or self.c < 1 or self.r < 1:
            raise DomainError("d, c and r must all be >= 1")
        lo = np.broadcast_to(np.asarray(self.lo, dtype=float), (self.d,)).copy()
        hi = np.broadcast_to(np.asarray(self.hi, dtype=float), (self.d,)).copy()
        if not np.all(lo < hi):
            raise DomainError("every domain interval needs lo < hi")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        center = self.params.get("center")
        if center is not None and np.size(center) not in (1, self.d):
            raise ShapeError(f"center has {np.size(center)} coordinates, expected {self.d}")
        if not self.label:
            object.__setattr__(self, "label", self.kind)

    @property
    def center(self) -> np.ndarray:
        c = self.params.get("center")
        if c is None:
            return np.zeros(self.d)
        return np.broadcast_to(np.asarray(c, dtype=float), (self.d,))

    def contains(self, X) -> bool:
        X = np.asarray(X, dtype=float)
        return bool(np.all((X >= self.lo) & (X <= self.hi)))

    def to_dict(self) -> dict:
        params = {k: (np.asarray(v).tolist() if isinstance(v, np.ndarray) else v) for k, v in self.params.items()}
        return {
            "label": self.label,
            "kind": self.kind,
            "d": self.d,
            "lo": self.lo.tolist(),
            "hi": self.hi.tolist(),
            "params": params,
            "c": self.c,
            "r": self.r,
        }


def evaluate_many(problem: BenchmarkProblem, X) -> np.ndarray:
    """Objective values for the rows of ``X`` (shape ``(m, d)``)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != problem.d:
        raise ShapeError(f"points must have shape (m, {problem.d})")
    if not problem.contains(X):
        raise DomainError("point outside the problem domain")
    p = problem.params
    if problem.kind == "sphere":
        return np.einsum("ij,ij->i", X, X)
    Z = X - problem.center
    if problem.kind == "shifted-sphere":
        return np.einsum("ij,ij->i", Z, Z) + float(p.get("bias", 0.0))
    if problem.kind == "cone":
        if p.get("norm", "l2") == "linf":
            dist = np.abs(Z).max(axis=1)
        else:
            dist = np.sqrt(np.einsum("ij,ij->i", Z, Z))
        return float(p.get("y_min", 0.0)) + float(p.get("slope", 1.0)) * dist
    amp = float(p.get("amplitude", 10.0))
    return amp * problem.d + np.sum(Z * Z - amp * np.cos(2.0 * math.pi * Z), axis=1)


def evaluate(problem: BenchmarkProblem, x) -> float:
    x = np.asarray(x, dtype=float).reshape(1, -1)
    return float(evaluate_many(problem, x)[0])


def optimum(problem: BenchmarkProblem) -> np.ndarray:
    """Location of the global minimum (the origin for the plain sphere)."""
    return problem.center.copy()


def metric_m0(values) -> float:
    """Mean over rounds (columns) of the best value within each round (rows)."""
    V = np.asarray(values, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    if V.ndim != 2 or V.size == 0:
        raise ShapeError("metric needs a non-empty c x r matrix")
    if not np.all(np.isfinite(V)):
        raise DomainError("metric needs finite objective values")
    return float(V.min(axis=0).mean())


def problem_from_dict(d: dict[str, Any]) -> BenchmarkProblem:
    try:
        return BenchmarkProblem(
            kind=d["kind"],
            d=int(d["d"]),
            lo=d["lo"],
            hi=d["hi"],
            params=dict(d.get("params") or {}),
            c=int(d.get("c", 1)),
            r=int(d.get("r", 1)),
            label=str(d.get("label", "")),
        )
    except KeyError as exc:
        raise FormatError(f"problem descriptor is missing {exc.args[0]!r}") from None


def load_problem(source: str | os.PathLike) -> BenchmarkProblem:
    """Read a JSON descriptor ``{kind, d, lo, hi, params, c, r}`` (``label`` optional)."""
    with open(source, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"corrupt problem file {source}: {exc}") from None
    if not isinstance(payload, dict):
        raise FormatError("problem descriptor must be a JSON object")
    return problem_from_dict(payload)
