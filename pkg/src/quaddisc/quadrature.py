"""Quadrature rules used by the instanton modules.

``tanh_sinh`` is a double-exponential rule for integrands with integrable
endpoint singularities. The integrand receives the abscissa together with
its distances to both endpoints, computed without cancellation, so that a
singular factor such as (b - x)^(-1/2) can be evaluated accurately even when
x rounds to b.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import ConvergenceError

_T_MAX = 4.5


def _nodes(h: float, odd_only: bool):
    k_max = int(math.ceil(_T_MAX / h))
    k = np.arange(-k_max, k_max + 1)
    if odd_only:
        k = k[k % 2 != 0]
    t = k * h
    q = 0.5 * math.pi * np.sinh(t)
    # distances from the left/right end on [-1, 1]: 1 + tanh q and 1 - tanh q
    with np.errstate(over="ignore"):
        left = 2.0 / (1.0 + np.exp(-2.0 * q))
        right = 2.0 / (1.0 + np.exp(2.0 * q))
        weight = 0.5 * math.pi * np.cosh(t) / np.cosh(q) ** 2
    return left, right, weight


def tanh_sinh(f: Callable, a: float, b: float, tol: float = 1e-10,
              max_level: int = 12) -> float:
    """Integrate ``f(x, da, db)`` over [a, b] by tanh-sinh quadrature.

    ``da = x - a`` and ``db = b - x`` are supplied as accurate arrays. The step
    is halved until two successive levels agree to ``tol * max(1, |I|)``.

    Raises
    ------
    ConvergenceError
        If the estimate has not settled after ``max_level`` halvings.
    """
    if a == b:
        return 0.0
    if a > b:
        return -tanh_sinh(lambda x, da, db: f(x, db, da), b, a, tol, max_level)
    half = 0.5 * (b - a)

    def level_sum(h, odd_only):
        left, right, weight = _nodes(h, odd_only)
        keep = (left > 0.0) & (right > 0.0) & (weight > 0.0)
        da = half * left[keep]
        db = half * right[keep]
        x = np.where(da < db, a + da, b - db)
        vals = np.asarray(f(x, da, db), dtype=np.float64)
        return float(np.sum(weight[keep] * vals))

    h = 1.0
    acc = level_sum(h, odd_only=False)
    estimate = half * h * acc
    for _ in range(max_level):
        h *= 0.5
        acc += level_sum(h, odd_only=True)
        new = half * h * acc
        if not math.isfinite(new):
            raise ConvergenceError("tanh-sinh: non-finite integrand values")
        if abs(new - estimate) <= tol * max(1.0, abs(new)):
            return new
        estimate = new
    raise ConvergenceError(f"tanh-sinh did not reach tol={tol} in {max_level} levels")


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-10, max_depth: int = 60) -> float:
    """Adaptive Simpson quadrature with Richardson correction."""
    if a == b:
        return 0.0
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) * (fa + 4.0 * flm + fm) / 6.0
        right = (b - m) * (fm + 4.0 * frm + fb) / 6.0
        delta = left + right - whole
        if depth <= 0:
            raise ConvergenceError("adaptive Simpson exceeded its recursion depth")
        if abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        return (recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1))

    return recurse(a, b, fa, fm, fb, whole, tol, max_depth)
