"""Moment generating functions G(z) = E[exp(z D_N)] of the discrepancy.

Covers the large-N (zeroth-order) limits of both problem classes, the
exact finite-N multinomial sum for the Lego class, and a Monte Carlo
estimate used as an independent check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.special import gammaln

from .discrepancy import l2star_discrepancy_1d_batch
from .errors import DomainError
from .points import LegoWeights, bin_index, uniform_block

MAX_COMPOSITIONS = 10_000_000
_PI2 = math.pi ** 2

ProblemClass = Union[LegoWeights, str]


def g0_lego(z, m: int):
    """(1 - 2z)^{-(M-1)/2} on the principal branch; the chi-square MGF with M-1 dof."""
    if m < 1:
        raise ValueError("need at least one bin")
    z = np.asarray(z, dtype=np.complex128)
    base = 1.0 - 2.0 * z
    if np.any(base == 0.0):
        raise DomainError("z = 1/2 is a pole of the Lego generating function")
    out = np.power(base, -0.5 * (m - 1))
    return out if out.ndim else complex(out)


def _log_sinc(w: np.ndarray) -> np.ndarray:
    """log(sin u / u), u = sqrt(w), continued analytically from w = 0.

    Equal to sum_k log(1 - w/(k pi)^2) with principal logs, so it is smooth
    across the imaginary axis and along any vertical line left of pi^2.
    """
    out = np.empty(w.shape, dtype=np.complex128)
    small = np.abs(w) < 1.0
    real = (w.imag == 0.0) & ~small
    upper = (w.imag > 0.0) & ~small
    lower = (w.imag < 0.0) & ~small

    if np.any(small):
        ws = w[small]
        term = np.ones_like(ws)
        acc = np.ones_like(ws)
        for k in range(1, 12):
            term = term * (-ws) / ((2 * k) * (2 * k + 1))
            acc = acc + term
        out[small] = np.log(acc)

    if np.any(real):
        wr = w[real].real
        vals = np.empty(wr.shape, dtype=np.complex128)
        neg = wr < 0.0
        a = np.sqrt(-wr[neg])
        # log(sinh a / a) without overflow
        vals[neg] = a - math.log(2.0) + np.log1p(-np.exp(-2.0 * a)) - np.log(a)
        pos = ~neg
        u = np.sqrt(wr[pos])
        ratio = np.sin(u) / u
        vals[pos] = np.log(ratio.astype(np.complex128))
        # beyond pi^2 take the limit from above the real axis
        above = pos.copy()
        above[pos] = ratio < 0.0
        if np.any(above):
            vals[above] = _log_sinc_upper(wr[above].astype(np.complex128))
        out[real] = vals

    if np.any(upper):
        out[upper] = _log_sinc_upper(w[upper])
    if np.any(lower):
        out[lower] = np.conj(_log_sinc_upper(np.conj(w[lower])))
    return out


def _log_sinc_upper(w: np.ndarray) -> np.ndarray:
    # sin u = (i/2) e^{-iu} (1 - e^{2iu}) with |e^{2iu}| <= 1 for Im w >= 0
    u = np.sqrt(w)
    return (0.5j * math.pi - math.log(2.0) - 1j * u
            + np.log1p(-np.exp(2j * u)) - np.log(u))


def _check_wiener_poles(w: np.ndarray) -> None:
    k = np.maximum(1.0, np.round(np.sqrt(np.abs(w)) / math.pi))
    pole = k * k * _PI2
    if np.any(np.abs(w - pole) <= 1e-12 * pole):
        raise DomainError("2z = k^2 pi^2 is a pole of the Wiener generating function")


def g0_wiener(z):
    """(u / sin u)^{1/2}, u = sqrt(2z), as the even entire-function quotient.

    The square root follows the branch that is continuous from G(0) = 1,
    which is the branch of the infinite product prod_k (1 - 2z/(k pi)^2)^{-1/2}.
    """
    z = np.asarray(z, dtype=np.complex128)
    w = 2.0 * z
    _check_wiener_poles(w)
    out = np.exp(-0.5 * _log_sinc(np.atleast_1d(w))).reshape(w.shape)
    return out if out.ndim else complex(out)


def composition_count(n: int, m: int) -> int:
    return math.comb(n + m - 1, m - 1)


def exact_lego_gf(z, n: int, w: LegoWeights):
    """E[exp(z D_N)] for N uniform points, summed over all bin-count vectors.

    Terms are multinomial probabilities times exp((z/N) sum S^2/w - zN),
    combined in log space. Complex z is accepted wherever the sum is finite.
    """
    if n < 1:
        raise ValueError("need at least one point")
    count = composition_count(n, w.m)
    if count > MAX_COMPOSITIONS:
        raise ValueError(f"{count} bin-count vectors exceed the limit of {MAX_COMPOSITIONS}")
    zs = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    log_w = np.log(w.w)
    inv_w = 1.0 / w.w

    # expand the first M-1 counts level by level, tracking remaining points,
    # log multinomial weight and sum S^2/w; the last count is what is left
    rem = np.array([n], dtype=np.int64)
    logp = np.array([0.0])
    quad = np.array([0.0])
    for j in range(w.m - 1):
        sizes = rem + 1
        parent = np.repeat(np.arange(rem.size), sizes)
        starts = np.cumsum(sizes) - sizes
        k = np.arange(parent.size) - starts[parent]
        rem = rem[parent] - k
        logp = logp[parent] + k * log_w[j] - gammaln(k + 1.0)
        quad = quad[parent] + k * k * inv_w[j]
    last = rem.astype(np.float64)
    logp = logp + last * log_w[-1] - gammaln(last + 1.0) + math.lgamma(n + 1.0)
    quad = quad + last * last * inv_w[-1]
    d = quad / n - n

    out = np.empty(zs.shape, dtype=np.complex128)
    for i, zi in enumerate(zs):
        expo = logp + zi * d
        top = float(np.max(expo.real))
        if not math.isfinite(top):
            out[i] = complex(math.inf, 0.0)
            continue
        out[i] = math.exp(top) * np.sum(np.exp(expo - top))
    return out.reshape(np.shape(z)) if np.ndim(z) else complex(out[0])


def sample_discrepancies(n: int, cls: ProblemClass, reps: int, seed: int,
                         chunk: int = 100_000) -> np.ndarray:
    """D_N of ``reps`` independent uniform point sets; replica i uses seed + i.

    ``cls`` is a LegoWeights (Lego discrepancy) or ``"wiener"`` (L2*, s = 1).
    """
    if n < 1 or reps < 1:
        raise ValueError("need n >= 1 and reps >= 1")
    lego = isinstance(cls, LegoWeights)
    if not lego and cls != "wiener":
        raise ValueError(f"unknown problem class {cls!r}")
    out = np.empty(reps)
    step = max(1, chunk // max(n, 1)) if not lego else chunk
    for start in range(0, reps, step):
        stop = min(reps, start + step)
        seeds = [seed + i for i in range(start, stop)]
        x = uniform_block(seeds, n)
        if lego:
            idx = bin_index(x, cls)
            counts = np.zeros((stop - start, cls.m))
            rows = np.repeat(np.arange(stop - start), n)
            np.add.at(counts, (rows, idx.ravel()), 1.0)
            dev = counts - n * cls.w
            out[start:stop] = np.sum(dev * dev / cls.w, axis=1) / n
        else:
            out[start:stop] = l2star_discrepancy_1d_batch(x)
    return out


def mc_gf_estimate(z: complex, n: int, cls: ProblemClass, reps: int,
                   seed: int) -> tuple[complex, float]:
    """Sample mean of exp(z D_N) and its standard error.

    Only sensible for small |Re z|; the variance grows quickly otherwise.
    """
    if reps < 2:
        raise ValueError("need at least two replications")
    d = sample_discrepancies(n, cls, reps, seed)
    vals = np.exp(complex(z) * d)
    mean = complex(np.mean(vals))
    err = math.sqrt(np.var(vals.real, ddof=1) / reps + np.var(vals.imag, ddof=1) / reps)
    return mean, err


@dataclass(frozen=True)
class GFSpec:
    """Names one generating function and its parameters."""

    kind: str
    m: int = 0
    n: int = 0
    weights: LegoWeights | None = None
    cls: ProblemClass | None = None
    reps: int = 0
    seed: int = 0
    params: dict = field(default_factory=dict, compare=False)

    @classmethod
    def lego_zeroth(cls, m: int) -> "GFSpec":
        if m < 1:
            raise ValueError("need at least one bin")
        return cls("lego_zeroth", m=m)

    @classmethod
    def wiener_zeroth(cls) -> "GFSpec":
        return cls("wiener_zeroth")

    @classmethod
    def lego_exact(cls, n: int, w: LegoWeights) -> "GFSpec":
        if composition_count(n, w.m) > MAX_COMPOSITIONS:
            raise ValueError("too many bin-count vectors for the exact sum")
        return cls("lego_exact", m=w.m, n=n, weights=w)

    @classmethod
    def mc_estimate(cls, n: int, problem: ProblemClass, reps: int, seed: int) -> "GFSpec":
        if reps < 2:
            raise ValueError("need at least two replications")
        return cls("mc_estimate", n=n, cls=problem, reps=reps, seed=seed)

    @property
    def is_zeroth_order(self) -> bool:
        return self.kind in ("lego_zeroth", "wiener_zeroth")

    @property
    def singularity(self) -> float:
        """Real position of the rightmost-left singularity of a zeroth-order G."""
        if self.kind == "lego_zeroth":
            return 0.5
        if self.kind == "wiener_zeroth":
            return 0.5 * _PI2
        raise ValueError(f"{self.kind} has no closed-form singularity")

    def evaluate(self, z):
        if self.kind == "lego_zeroth":
            return g0_lego(z, self.m)
        if self.kind == "wiener_zeroth":
            return g0_wiener(z)
        if self.kind == "lego_exact":
            return exact_lego_gf(z, self.n, self.weights)
        if self.kind == "mc_estimate":
            zs = np.atleast_1d(np.asarray(z, dtype=np.complex128))
            vals = np.array([mc_gf_estimate(zi, self.n, self.cls, self.reps, self.seed)[0]
                             for zi in zs])
            return vals.reshape(np.shape(z)) if np.ndim(z) else complex(vals[0])
        raise ValueError(f"unknown kind {self.kind!r}")
