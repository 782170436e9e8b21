"""Random point sets, Lego bin weights and bin counting.

All stochastic operations in the package draw from the splitmix64 stream
defined here, so a given seed yields the same points on every platform.
Point ``k`` of a set in ``s`` dimensions takes its coordinates from draws
``k*s, k*s+1, ..., k*s+s-1`` of the stream started at ``seed``.
Replicated experiments use ``seed + replica_index`` for replica ``i``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_TWO_M53 = 1.0 / (1 << 53)


class SplitMix64:
    """Scalar splitmix64 generator.

    >>> rng = SplitMix64(0)
    >>> hex(rng.next_u64())
    '0xe220a8397b1dcdaf'
    """

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK64
        x = self.state
        x = ((x ^ (x >> 30)) * _MIX1) & _MASK64
        x = ((x ^ (x >> 27)) * _MIX2) & _MASK64
        return x ^ (x >> 31)

    def next_double(self) -> float:
        return (self.next_u64() >> 11) * _TWO_M53


def uniform_block(seeds, count: int) -> np.ndarray:
    """First ``count`` uniforms of the splitmix64 stream for each seed.

    Vectorised equivalent of calling :meth:`SplitMix64.next_double`
    ``count`` times per seed. Returns an array of shape ``(len(seeds), count)``.
    """
    seeds = np.asarray([int(s) & _MASK64 for s in np.atleast_1d(seeds)], dtype=np.uint64)
    steps = np.arange(1, count + 1, dtype=np.uint64) * np.uint64(_GAMMA)
    with np.errstate(over="ignore"):
        x = seeds[:, None] + steps[None, :]
        x = (x ^ (x >> np.uint64(30))) * np.uint64(_MIX1)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(_MIX2)
        x = x ^ (x >> np.uint64(31))
    return (x >> np.uint64(11)).astype(np.float64) * _TWO_M53


@dataclass(frozen=True)
class PointSet:
    """N points in the half-open unit cube [0,1)^s, stored as an (N, s) array."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError("a point set needs N >= 1 points of dimension s >= 1")
        if not np.all((pts >= 0.0) & (pts < 1.0)):
            raise ValueError("every coordinate must lie in [0, 1)")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def s(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class LegoWeights:
    """Bin volumes w_1..w_M of a Lego dissection; positive and summing to one."""

    w: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=np.float64).ravel()
        if w.size < 1:
            raise ValueError("at least one bin is required")
        if not np.all(w > 0):
            raise ValueError("bin weights must be positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"bin weights must sum to 1 (got {w.sum()!r})")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @classmethod
    def uniform(cls, m: int) -> "LegoWeights":
        return cls(np.full(m, 1.0 / m))

    @classmethod
    def normalized(cls, values) -> "LegoWeights":
        """Rescale positive ``values`` so they sum to one."""
        v = np.asarray(values, dtype=np.float64)
        v = v / v.sum()
        # absorb the rounding residue into the largest bin
        v[np.argmax(v)] += 1.0 - v.sum()
        return cls(v)

    @property
    def m(self) -> int:
        return self.w.size

    def edges(self) -> np.ndarray:
        """Interior bin boundaries cum_1..cum_{M-1}."""
        return np.cumsum(self.w)[:-1]


@dataclass(frozen=True)
class CountVector:
    counts: np.ndarray
    n_total: int

    def __post_init__(self):
        c = np.array(self.counts, dtype=np.int64).ravel()
        if np.any(c < 0):
            raise ValueError("bin counts must be nonnegative")
        if int(c.sum()) != int(self.n_total):
            raise ValueError("bin counts must sum to n_total")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)
        object.__setattr__(self, "n_total", int(self.n_total))

    @property
    def m(self) -> int:
        return self.counts.size


def uniform_pointset(n: int, s: int, seed: int) -> PointSet:
    """``n`` uniformly distributed random points in [0,1)^s from the seeded stream."""
    if n < 1 or s < 1:
        raise ValueError("uniform_pointset needs n >= 1 and s >= 1")
    u = uniform_block([seed], n * s)[0]
    return PointSet(u.reshape(n, s))


def bin_index(x, w: LegoWeights) -> np.ndarray:
    """Zero-based bin of each coordinate; bins are half-open [cum_{n-1}, cum_n)."""
    idx = np.searchsorted(w.edges(), np.asarray(x, dtype=np.float64), side="right")
    return np.minimum(idx, w.m - 1)


def bin_counts(ps: PointSet, w: LegoWeights) -> CountVector:
    """Number of points of a one-dimensional set falling in each Lego bin."""
    if ps.s != 1:
        raise ValueError("binning is only defined for one-dimensional point sets")
    counts = np.bincount(bin_index(ps.points[:, 0], w), minlength=w.m)
    return CountVector(counts, ps.n)


def read_pointset(path) -> PointSet:
    """Read a header-less CSV file with one point per row."""
    rows = []
    with open(Path(path), newline="") as fh:
        for line_no, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                vals = [float(c) for c in row]
            except ValueError as exc:
                raise ValueError(f"{path}:{line_no}: not a number ({exc})") from None
            if any(not (0.0 <= v < 1.0) for v in vals):
                raise ValueError(f"{path}:{line_no}: coordinate outside [0, 1)")
            rows.append(vals)
    if not rows:
        raise ValueError(f"{path}: no points")
    if len({len(r) for r in rows}) != 1:
        raise ValueError(f"{path}: rows have differing dimension")
    return PointSet(np.array(rows))


def write_pointset(ps: PointSet, path) -> None:
    with open(Path(path), "w", newline="") as fh:
        for row in ps.points:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
