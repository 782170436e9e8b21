"""Non-trivial extrema of the rescaled Lego action.

In the variables y_n the action reads

    Sigma[y] = z + (1/4z) sum w_n y_n^2 - log(sum w_n e^{y_n}),

and its extrema have every y_n equal to one of two roots y- < 1 < y+ of
y - log y = v. The interesting family puts y+ on a single bin of weight
w_plus and y- on all the others; everything is then a function of v >= 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError
from .points import LegoWeights
from .quadrature import adaptive_simpson
from .spectral import RankOneProblem, rank_one_det, rank_one_eigenvalues

SIGMA_TOL = 1e-8
_LOG_TINY = math.log(1e-300)


def _y_branches_array(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised bisection for both roots of y - log y = v."""
    v = np.asarray(v, dtype=np.float64)
    # lower root in log space: e^s - s = v for s in [log 1e-300, 0]
    s_lo = np.full(v.shape, _LOG_TINY)
    s_hi = np.zeros(v.shape)
    # upper root: y - log y = v for y in [1, 2v + 2]
    u_lo = np.ones(v.shape)
    u_hi = 2.0 * v + 2.0
    for _ in range(200):
        s_mid = 0.5 * (s_lo + s_hi)
        below = np.exp(s_mid) - s_mid > v  # still left of the root
        s_lo = np.where(below, s_mid, s_lo)
        s_hi = np.where(below, s_hi, s_mid)
        u_mid = 0.5 * (u_lo + u_hi)
        short = u_mid - np.log(u_mid) < v
        u_lo = np.where(short, u_mid, u_lo)
        u_hi = np.where(short, u_hi, u_mid)
    y_minus = np.exp(0.5 * (s_lo + s_hi))
    y_plus = 0.5 * (u_lo + u_hi)
    at_one = v == 1.0
    y_minus = np.where(at_one, 1.0, y_minus)
    y_plus = np.where(at_one, 1.0, y_plus)
    return y_minus, y_plus


def _safe_newton(f, df, lo: float, hi: float, x: float) -> float:
    """Newton iteration that falls back to bisection when it leaves [lo, hi]."""
    f_lo_neg = f(lo) < 0.0
    for _ in range(200):
        fx = f(x)
        if fx == 0.0:
            return x
        if (fx < 0.0) == f_lo_neg:
            lo = x
        else:
            hi = x
        d = df(x)
        new = x - fx / d if d != 0.0 else 0.5 * (lo + hi)
        if not lo < new < hi:
            new = 0.5 * (lo + hi)
        if abs(new - x) <= 2e-16 * abs(x) or new == lo or new == hi:
            return new
        x = new
    return x


def y_branches(v: float) -> tuple[float, float]:
    """The roots y- <= 1 <= y+ of y e^{-y} = e^{-v}."""
    if not v >= 1.0:
        raise ValueError("v must be at least 1")
    if v > -_LOG_TINY:
        raise ValueError("v is too large for the lower root to be representable")
    v = float(v)
    if v == 1.0:
        return 1.0, 1.0
    # lower root as s = log y, upper root directly
    s = _safe_newton(lambda s: math.exp(s) - s - v, lambda s: math.expm1(s),
                     _LOG_TINY, 0.0, min(-v + math.exp(-v), -1e-300))
    y_plus = _safe_newton(lambda y: y - math.log(y) - v, lambda y: 1.0 - 1.0 / y,
                          1.0, 2.0 * v + 2.0, v + math.log(v) + 1.0)
    return math.exp(s), y_plus


def _check_w_plus(w_plus: float) -> None:
    if not 0.0 < w_plus < 1.0:
        raise ValueError("w_plus must lie in (0, 1)")


def _two_z(v, w_plus: float):
    y_minus, y_plus = _y_branches_array(np.asarray(v, dtype=np.float64))
    return w_plus * y_plus + (1.0 - w_plus) * y_minus


def _z_of_v(v: float, w_plus: float) -> float:
    y_minus, y_plus = y_branches(v)
    return 0.5 * (w_plus * y_plus + (1.0 - w_plus) * y_minus)


def _z_integral(v0: float, v1: float, w_plus: float) -> float:
    """int_{v0}^{v1} z(x) dx, with x = 1 + s^2 to smooth the square-root start."""
    s0, s1 = math.sqrt(v0 - 1.0), math.sqrt(v1 - 1.0)
    return adaptive_simpson(lambda s: 2.0 * s * _z_of_v(1.0 + s * s, w_plus), s0, s1, tol=1e-10)


@dataclass(frozen=True)
class LegoBranchPoint:
    v: float
    y_minus: float
    y_plus: float
    z: float
    dz_dv: float
    sigma: float
    dsigma_dv: float
    w_plus: float
    sigma_integral: float


def _assemble(v: float, w_plus: float, y_minus: float, y_plus: float,
              area: float) -> LegoBranchPoint:
    if v == 1.0:
        if w_plus == 0.5:
            slope = 1.0 / 3.0
        else:
            slope = math.copysign(math.inf, w_plus - 0.5)
        return LegoBranchPoint(1.0, 1.0, 1.0, 0.5, slope, 0.0, 0.0, w_plus, 0.0)
    two_z = w_plus * y_plus + (1.0 - w_plus) * y_minus
    z = 0.5 * two_z
    d_two_z = w_plus * y_plus / (y_plus - 1.0) + (1.0 - w_plus) * y_minus / (y_minus - 1.0)
    dz_dv = 0.5 * d_two_z
    q = w_plus * y_plus ** 2 + (1.0 - w_plus) * y_minus ** 2
    log_two_z = math.log(two_z)
    sigma = z + q / (4.0 * z) - v - log_two_z
    sigma_int = z + area / z + 1.0 - 1.0 / (4.0 * z) - v - log_two_z
    dsigma = -w_plus * (1.0 - w_plus) * (y_plus - y_minus) ** 2 / (4.0 * z * z) * dz_dv
    return LegoBranchPoint(v, y_minus, y_plus, z, dz_dv, sigma, dsigma, w_plus, sigma_int)


def _verify(bp: LegoBranchPoint) -> LegoBranchPoint:
    if abs(bp.sigma - bp.sigma_integral) > SIGMA_TOL * max(1.0, abs(bp.sigma)):
        raise ConvergenceError(
            f"direct and integral action disagree at v={bp.v!r}: "
            f"{bp.sigma!r} vs {bp.sigma_integral!r}")
    return bp


def branch_point(v: float, w_plus: float) -> LegoBranchPoint:
    """The extremum labelled by v with y+ on a bin of weight ``w_plus``.

    ``dz_dv`` is the derivative of z itself. Sigma is evaluated in closed
    form and again through the integral of z(v); both are kept and must agree.
    At v = 1 the limit point is returned with an infinite slope.
    """
    _check_w_plus(w_plus)
    y_minus, y_plus = y_branches(v)
    area = 0.0 if v == 1.0 else _z_integral(1.0, float(v), w_plus)
    return _verify(_assemble(float(v), w_plus, y_minus, y_plus, area))


def branch_scan(w_plus: float, v_max: float, steps: int) -> list[LegoBranchPoint]:
    """Branch points on an even grid over (1, v_max], integrating z cumulatively."""
    _check_w_plus(w_plus)
    if not v_max > 1.0 or steps < 1:
        raise ValueError("need v_max > 1 and at least one step")
    vs = 1.0 + (v_max - 1.0) * np.arange(1, steps + 1) / steps
    y_minus, y_plus = _y_branches_array(vs)
    out = []
    area, prev = 0.0, 1.0
    for v, ym, yp in zip(vs, y_minus, y_plus):
        area += _z_integral(prev, float(v), w_plus)
        prev = float(v)
        out.append(_verify(_assemble(float(v), w_plus, float(ym), float(yp), area)))
    return out


def find_vc(w_plus: float, step: float = 1e-2, v_cap: float = 100.0) -> float:
    """First v > 1 where 2z(v) returns to 1 (only exists for w_plus < 1/2)."""
    if not 0.0 < w_plus < 0.5:
        raise ValueError("a return of 2z to 1 needs 0 < w_plus < 1/2")
    grid = np.arange(1.0 + step, v_cap + step, step)
    above = np.nonzero(_two_z(grid, w_plus) >= 1.0)[0]
    if above.size == 0:
        raise ConvergenceError(f"2z(v) stays below 1 up to v={v_cap}")
    j = int(above[0])
    lo = 1.0 + 0.5 * step if j == 0 else float(grid[j - 1])
    hi = float(grid[j])
    while hi - lo > 1e-13 * hi:
        mid = 0.5 * (lo + hi)
        if 2.0 * _z_of_v(mid, w_plus) < 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def wall_threshold(w: float) -> float:
    """Real part of z beyond which the finite-N generating function blows up."""
    if not 0.0 < w < 1.0:
        raise ValueError("w must lie in (0, 1)")
    return w / (w - 1.0) * math.log(w)


@dataclass(frozen=True)
class HessianSpectrum:
    eigenvalues: np.ndarray
    det: float
    det_closed: float
    classification: str
    n_negative: int


def _classify(eig: np.ndarray) -> tuple[str, int]:
    n_neg = int(np.sum(eig <= 0.0))
    return ("minimum" if n_neg == 0 else "maximum"), n_neg


def hessian_spectrum(bp: LegoBranchPoint, w: LegoWeights) -> HessianSpectrum:
    """Eigenvalues and determinant of the second-derivative matrix of Sigma.

    The matrix is diag(a) + b b^T with a_k = w_k (1 - y_k)/(2z) and
    b_k = w_k y_k / (2z). The bin carrying y+ is the first one whose weight
    equals ``bp.w_plus``. "minimum" means every eigenvalue is positive.
    """
    matches = np.nonzero(np.abs(w.w - bp.w_plus) <= 1e-12)[0]
    if matches.size == 0:
        raise ValueError("w_plus of the branch point is not one of the weights")
    if bp.v == 1.0:
        raise ValueError("the Hessian is degenerate at v = 1")
    y = np.full(w.m, bp.y_minus)
    y[matches[0]] = bp.y_plus
    two_z = 2.0 * bp.z
    if abs(float(w.w @ y) - two_z) > 1e-10 * two_z:
        raise ValueError("branch point is inconsistent with the weights")
    problem = RankOneProblem(w.w * (1.0 - y) / two_z, w.w * y / two_z, 1)
    eig = rank_one_eigenvalues(problem)
    det = rank_one_det(problem)
    d_two_z = 2.0 * bp.dz_dv
    closed = (float(np.prod(w.w)) / two_z ** (w.m + 1) * (1.0 - bp.y_minus) ** (w.m - 1)
              * (bp.y_plus - 1.0) * d_two_z)
    if abs(det - closed) > 1e-10 * max(abs(det), abs(closed)):
        raise ArithmeticError(f"determinant forms disagree: {det!r} vs {closed!r}")
    kind, n_neg = _classify(eig)
    return HessianSpectrum(eig, det, closed, kind, n_neg)


def perturbative_spectrum(z: float, w: LegoWeights) -> HessianSpectrum:
    """Second-derivative spectrum at the trivial extremum, all y_k = 2z."""
    if not z > 0.0:
        raise ValueError("z must be positive")
    y = np.full(w.m, 2.0 * z)
    problem = RankOneProblem(w.w * (1.0 - y) / (2.0 * z), w.w * y / (2.0 * z), 1)
    eig = rank_one_eigenvalues(problem)
    det = rank_one_det(problem)
    kind, n_neg = _classify(eig)
    return HessianSpectrum(eig, det, det, kind, n_neg)
