"""Rank-one eigenvalue problems and the quadratic-form kernels they describe.

A matrix a_n delta_nm + eps b_n b_m has the eigenvalues of its diagonal at
every a that repeats (once per extra copy) or whose b vanishes; the rest
are the roots of the secular function

    Q(x) = 1 + eps * sum_m b_m^2 / (a_m - x),

one in each gap between consecutive poles and one beyond the outermost.
The same structure gives the determinant without any factorisation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .points import LegoWeights


@dataclass(frozen=True)
class RankOneProblem:
    a: np.ndarray
    b: np.ndarray
    eps: int

    def __post_init__(self):
        a = np.array(self.a).ravel()
        b = np.array(self.b).ravel()
        if a.shape != b.shape or a.size < 1:
            raise ValueError("a and b must be non-empty and of equal length")
        if self.eps not in (1, -1):
            raise ValueError("eps must be +1 or -1")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def m(self) -> int:
        return self.a.size

    def matrix(self) -> np.ndarray:
        return np.diag(self.a) + self.eps * np.outer(self.b, self.b)


def _poles(a: np.ndarray, b: np.ndarray):
    """Split into directly known eigenvalues and (pole, weight) pairs."""
    order = np.argsort(a, kind="stable")
    a, b2 = a[order], (b * b)[order]
    direct, poles, weights = [], [], []
    start = 0
    while start < a.size:
        stop = start
        while stop + 1 < a.size and a[stop + 1] == a[start]:
            stop += 1
        d = stop - start + 1
        weight = float(np.sum(b2[start:stop + 1]))
        direct.extend([float(a[start])] * (d - 1))
        if weight > 0.0:
            poles.append(float(a[start]))
            weights.append(weight)
        else:
            direct.append(float(a[start]))
        start = stop + 1
    return direct, np.array(poles), np.array(weights)


def rank_one_eigenvalues(p: RankOneProblem) -> np.ndarray:
    """All M eigenvalues of a real rank-one update, sorted ascending."""
    if np.iscomplexobj(p.a) or np.iscomplexobj(p.b):
        raise ValueError("eigenvalues are only computed for real data")
    a = p.a.astype(np.float64)
    b = p.b.astype(np.float64)
    direct, poles, weights = _poles(a, b)
    roots = []
    if poles.size:
        spread = float(weights.sum())
        if p.eps > 0:
            lo = poles.copy()
            hi = np.append(poles[1:], poles[-1] + spread)
        else:
            lo = np.insert(poles[:-1], 0, poles[0] - spread)
            hi = poles.copy()
        # on every bracket Q runs from -inf to +inf (eps = +1) or the reverse;
        # the ends are never evaluated, they may be poles
        for _ in range(2100):
            mid = 0.5 * (lo + hi)
            if np.all((mid == lo) | (mid == hi)):
                break
            q = 1.0 + p.eps * np.sum(weights[None, :] / (poles[None, :] - mid[:, None]), axis=1)
            rising = (q < 0.0) if p.eps > 0 else (q > 0.0)
            lo = np.where(rising, mid, lo)
            hi = np.where(rising, hi, mid)
        roots = list(0.5 * (lo + hi))
    return np.sort(np.array(direct + roots, dtype=np.float64))


def secular(p: RankOneProblem, x):
    """Q(x) = 1 + eps sum b_m^2 / (a_m - x)."""
    x = np.asarray(x)
    return 1.0 + p.eps * np.sum(p.b * p.b / (p.a - x[..., None]), axis=-1)


def rank_one_det(p: RankOneProblem):
    """det(diag(a) + eps b b^T) = prod a + eps sum_m b_m^2 prod_{n != m} a_n.

    Works for complex data and for vanishing a_n.
    """
    a, b = p.a, p.b
    others = np.array([np.prod(np.delete(a, m)) for m in range(a.size)])
    det = np.prod(a) + p.eps * np.sum(b * b * others)
    return det.item()


@dataclass(frozen=True)
class LegoPropagator:
    z: complex
    w: LegoWeights
    gauge_eps: float
    A: np.ndarray
    A_inv: np.ndarray


def lego_propagator(z: complex, w: LegoWeights, gauge_eps: float = 1.0) -> LegoPropagator:
    """Quadratic-form matrix A(eps) and its inverse for the Lego class.

    A_nm = (1-2z) w_n delta_nm + (2z/eps) w_n w_m and
    A^{-1}_nm = [delta_nm / w_n - 2z / (eps (1-2z) + 2z)] / (1 - 2z).
    ``gauge_eps = math.inf`` gives the diagonal limit.
    """
    z = complex(z)
    if not (gauge_eps > 0.0):
        raise ValueError("gauge_eps must be positive or infinite")
    one = 1.0 - 2.0 * z
    if abs(one) < 1e-14:
        raise DomainError("z = 1/2 is a pole of the Lego quadratic form")
    ww = w.w
    if math.isinf(gauge_eps):
        a = np.diag(one * ww)
        a_inv = np.diag(1.0 / (one * ww))
    else:
        denom = gauge_eps * one + 2.0 * z
        if abs(denom) < 1e-14:
            raise DomainError("singular gauge: eps (1 - 2z) + 2z = 0")
        a = np.diag(one * ww) + (2.0 * z / gauge_eps) * np.outer(ww, ww)
        a_inv = (np.diag(1.0 / ww) - 2.0 * z / denom) / one
    if z.imag == 0.0:
        a, a_inv = a.real, a_inv.real
    err = np.max(np.abs(a @ a_inv - np.eye(w.m)))
    if err > 1e-12:
        raise ArithmeticError(f"A times its inverse is off the identity by {err:.3g}")
    a.setflags(write=False)
    a_inv.setflags(write=False)
    return LegoPropagator(z, w, float(gauge_eps), a, a_inv)


def wiener_covariance(x, y) -> float:
    """prod_nu min(x^nu, y^nu)."""
    return float(np.prod(np.minimum(np.atleast_1d(x), np.atleast_1d(y))))


_PI2 = math.pi ** 2
# Bernoulli polynomials B_2, B_4, B_6, B_8 (coefficients from t^0 up)
_BERNOULLI = [
    [1 / 6, -1.0, 1.0],
    [-1 / 30, 0.0, 1.0, -2.0, 1.0],
    [1 / 42, 0.0, -0.5, 0.0, 2.5, -3.0, 1.0],
    [-1 / 30, 0.0, 2 / 3, 0.0, -7 / 3, 0.0, 14 / 3, -4.0, 1.0],
]


def _cos_sum(s: float, n: int) -> float:
    """sum_{k>=1} cos(k pi s) / (k pi)^(2n) for |s| <= 2."""
    t = 0.5 * abs(s)
    bern = np.polynomial.polynomial.polyval(t, _BERNOULLI[n - 1])
    return (-1) ** (n + 1) * 4.0 ** n * bern / (2.0 * math.factorial(2 * n))


def _check_pole(z: complex) -> None:
    k = max(1, round(math.sqrt(abs(2.0 * z)) / math.pi))
    for kk in (k - 1, k, k + 1):
        if kk >= 1 and abs(2.0 * z - kk * kk * _PI2) <= 1e-12 * kk * kk * _PI2:
            raise DomainError(f"2z = {kk}^2 pi^2 is a pole of the Wiener propagator")


def wiener_propagator(x: float, y: float, z: complex, mode: str = "closed",
                      terms: int = 10_000) -> complex:
    """Propagator of the one-dimensional Wiener class with zero mean over x.

    ``mode="closed"``: 1/u^2 - {cos[u(1-|x+y|)] + cos[u(1-|x-y|)]} / (2u sin u),
    u = sqrt(2z). ``mode="series"``: the first ``terms`` cosine modes,
    2 sum cos(k pi x) cos(k pi y) / (k^2 pi^2 - u^2).
    """
    if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
        raise ValueError("x and y must lie in [0, 1]")
    z = complex(z)
    _check_pole(z)
    u2 = 2.0 * z
    if mode == "series":
        k = np.arange(1, terms + 1)
        kp = k * math.pi
        val = 2.0 * np.sum(np.cos(kp * x) * np.cos(kp * y) / (kp * kp - u2))
    elif mode == "closed":
        if abs(u2) < 1e-4:
            # expansion in u^2; the closed form cancels badly here
            val = sum(u2 ** (n - 1) * (_cos_sum(x + y, n) + _cos_sum(x - y, n))
                      for n in range(1, 5))
        else:
            u = np.sqrt(u2)
            val = 1.0 / u2 - (np.cos(u * (1.0 - abs(x + y))) + np.cos(u * (1.0 - abs(x - y)))) \
                / (2.0 * u * np.sin(u))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    val = complex(val)
    # real z gives a real kernel on both sides of 0
    return val.real if z.imag == 0.0 else val


def wiener_eigenmode(k: int, x: float, z: complex = 0.0) -> tuple[float, complex]:
    """(sqrt 2 cos(k pi x), k^2 pi^2 - 2z)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    lam = k * k * _PI2 - 2.0 * complex(z)
    return math.sqrt(2.0) * math.cos(k * math.pi * x), (lam.real if lam.imag == 0.0 else lam)
