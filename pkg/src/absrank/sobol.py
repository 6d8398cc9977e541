"""Sobol low-discrepancy points from an embedded Joe-Kuo direction-number table.

Points are generated in Gray-code order with 32-bit precision: the point with
index ``i`` is the XOR of the direction numbers selected by the set bits of
``i ^ (i >> 1)``. Output is therefore independent of how the index range is
chunked, and identical across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from .errors import CapabilityError, DomainError

__all__ = ["SobolConfig", "sobol_points", "direction_numbers", "max_dimension", "TABLE_ID"]

TABLE_ID = "new-joe-kuo-6.21201"
_TABLE_FILE = "new-joe-kuo-6.21201.txt"
BITS = 32


@lru_cache(maxsize=None)
def _table() -> tuple[tuple[int, int, tuple[int, ...]], ...]:
    text = resources.files("absrank").joinpath("data").joinpath(_TABLE_FILE).read_text()
    rows = []
    for line in text.splitlines():
        if not line or line.startswith("#") or line.startswith("d "):
            continue
        d, s, a, *m = (int(tok) for tok in line.split())
        if len(m) != s:
            raise ValueError(f"corrupt direction-number row for dimension {d}")
        rows.append((s, a, tuple(m)))
    return tuple(rows)


def max_dimension() -> int:
    return len(_table()) + 1


@lru_cache(maxsize=64)
def direction_numbers(dim: int) -> np.ndarray:
    """``(dim, 32)`` array of direction integers ``V[j, k] = m_k << (32 - k)``."""
    if dim < 1 or dim > max_dimension():
        raise CapabilityError(
            f"dimension {dim} outside the direction-number table (1..{max_dimension()})"
        )
    table = _table()
    V = np.zeros((dim, BITS), dtype=np.uint64)
    for j in range(dim):
        if j == 0:
            m = [1] * BITS
        else:
            s, a, m_init = table[j - 1]
            m = list(m_init)
            for k in range(s, BITS):
                # m_k = 2 a_1 m_{k-1} ^ 4 a_2 m_{k-2} ^ ... ^ 2^s m_{k-s} ^ m_{k-s}
                new = m[k - s] ^ (m[k - s] << s)
                for i in range(1, s):
                    if (a >> (s - 1 - i)) & 1:
                        new ^= m[k - i] << i
                m.append(new)
        for k in range(BITS):
            V[j, k] = m[k] << (BITS - 1 - k)
    V.setflags(write=False)
    return V


@dataclass(frozen=True)
class SobolConfig:
    """Parameters of a Sobol point stream.

    ``seed`` enables a random digital shift (each coordinate XOR-ed with a
    fixed random 32-bit word). A digital shift keeps the net structure while
    moving points off the dyadic grid, e.g. away from the exact box center.
    """

    dim: int
    log2n: int
    skip: int = 1
    direction_numbers: str = TABLE_ID
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.direction_numbers != TABLE_ID:
            raise CapabilityError(f"unknown direction-number table {self.direction_numbers!r}")
        if self.dim < 1:
            raise DomainError("dimension must be >= 1")
        if self.dim > max_dimension():
            raise CapabilityError(
                f"dimension {self.dim} outside the direction-number table (1..{max_dimension()})"
            )
        if not 0 <= self.log2n <= 31:
            raise DomainError("log2n must be in 0..31")
        if self.skip < 0 or self.skip + (1 << self.log2n) > (1 << BITS):
            raise DomainError("skip out of range")

    @property
    def n(self) -> int:
        return 1 << self.log2n

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "log2n": self.log2n,
            "skip": self.skip,
            "direction_numbers": self.direction_numbers,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SobolConfig":
        return cls(
            dim=int(d["dim"]),
            log2n=int(d["log2n"]),
            skip=int(d.get("skip", 1)),
            direction_numbers=d.get("direction_numbers", TABLE_ID),
            seed=d.get("seed"),
        )


def sobol_integers(cfg: SobolConfig) -> np.ndarray:
    """Raw 32-bit integer coordinates, shape ``(2**log2n, dim)``."""
    V = direction_numbers(cfg.dim)
    idx = np.arange(cfg.skip, cfg.skip + cfg.n, dtype=np.uint64)
    gray = idx ^ (idx >> np.uint64(1))
    out = np.zeros((cfg.n, cfg.dim), dtype=np.uint64)
    top = int(gray.max()).bit_length() if cfg.n else 0
    for k in range(top):
        bit = ((gray >> np.uint64(k)) & np.uint64(1)).astype(bool)
        out[bit] ^= V[:, k]
    if cfg.seed is not None:
        shift = np.random.default_rng(cfg.seed).integers(0, 1 << BITS, size=cfg.dim, dtype=np.uint64)
        out ^= shift
    return out


def sobol_points(cfg: SobolConfig) -> np.ndarray:
    """Points in ``[0, 1)^dim``, shape ``(2**log2n, dim)``."""
    return sobol_integers(cfg).astype(np.float64) * 2.0**-BITS
