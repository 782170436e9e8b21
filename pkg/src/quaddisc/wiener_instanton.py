"""Instantons of the one-dimensional Wiener (L2*) problem class.

Rescaled extrema of the action solve -phi''/(2z) + 1 - exp(phi) = 0 with
phi'(0) = phi'(1) = 0. This is the motion of a particle in the potential
U(phi) = exp(phi) - phi - 1, and a solution with energy E exists for

    sqrt(4 z) = T(E) = int_{phi-}^{phi+} dphi / sqrt(E - U(phi)).

Its action is S(E) = E + 2 T1(E)/T(E) with T1 the first phi-moment of the
same integrand. Everything here is parameterised by the energy E > 0.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.integrate import simpson

from .errors import ConvergenceError
from .quadrature import tanh_sinh

QUAD_TOL = 1e-10
QUAD_LEVELS = 12


def _expm1_minus_x(d):
    """exp(d) - 1 - d without cancellation for small |d|."""
    d = np.atleast_1d(np.asarray(d, dtype=np.float64))
    out = np.expm1(d) - d
    small = np.abs(d) < 0.1
    if np.any(small):
        ds = d[small]
        term = 0.5 * ds * ds
        acc = term.copy()
        for n in range(3, 14):
            term = term * ds / n
            acc += term
        out[small] = acc
    return out


def potential(phi):
    """U(phi) = exp(phi) - phi - 1, accurate near phi = 0."""
    phi = np.asarray(phi, dtype=np.float64)
    out = _expm1_minus_x(phi)
    return out.reshape(phi.shape) if phi.ndim else float(out[0])


def _rise(p: float, d):
    """U(p + d) - U(p), accurate for small d."""
    d = np.asarray(d, dtype=np.float64)
    near = _expm1_minus_x(d).reshape(d.shape) + math.expm1(p) * np.expm1(d)
    # for large steps the two terms above cancel; the plain form is fine there
    with np.errstate(over="ignore"):
        far = math.exp(p) * np.expm1(d) - d
    return np.where(np.abs(d) < 1.0, near, far)


def _bisect(g, lo: float, hi: float) -> float:
    """Bisection on a bracket with g(lo) and g(hi) of opposite sign, to full precision."""
    glo = g(lo)
    if glo == 0.0:
        return lo
    if g(hi) == 0.0:
        return hi
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        gm = g(mid)
        if gm == 0.0:
            return mid
        if (gm < 0.0) == (glo < 0.0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def turning_points(energy: float) -> tuple[float, float]:
    """Solutions phi- < 0 < phi+ of U(phi) = E."""
    if not energy > 0.0:
        raise ValueError("the energy must be positive")
    g = lambda p: potential(p) - energy
    lo = _bisect(g, -(energy + 1.0), 0.0)
    hi = _bisect(g, 0.0, math.log(energy + 2.0) + 2.0)
    return lo, hi


@lru_cache(maxsize=4096)
def _integrals(energy: float) -> tuple[float, float, float, float]:
    """(T, T1, phi-, phi+) by tanh-sinh quadrature on each side of phi = 0."""
    lo, hi = turning_points(energy)
    # on each half the only singular end is the turning point, and E - U is
    # written as the drop of U measured from that turning point
    def kin_lower(da):
        return np.sqrt(-_rise(lo, da))

    def kin_upper(db):
        return np.sqrt(-_rise(hi, -db))

    try:
        t_lo = tanh_sinh(lambda x, da, db: 1.0 / kin_lower(da), lo, 0.0, QUAD_TOL, QUAD_LEVELS)
        t_hi = tanh_sinh(lambda x, da, db: 1.0 / kin_upper(db), 0.0, hi, QUAD_TOL, QUAD_LEVELS)
        m_lo = tanh_sinh(lambda x, da, db: x / kin_lower(da), lo, 0.0, QUAD_TOL, QUAD_LEVELS)
        m_hi = tanh_sinh(lambda x, da, db: x / kin_upper(db), 0.0, hi, QUAD_TOL, QUAD_LEVELS)
    except ConvergenceError as exc:
        raise ConvergenceError(f"period integrals at E={energy!r}: {exc}") from None
    return t_lo + t_hi, m_lo + m_hi, lo, hi


def period_T(energy: float) -> float:
    """T(E) = int dphi / sqrt(E - U(phi)) between the turning points."""
    if not energy > 0.0:
        raise ValueError("the energy must be positive")
    return _integrals(float(energy))[0]


def moment_T1(energy: float) -> float:
    """T1(E) = int phi dphi / sqrt(E - U(phi)); negative for E > 0."""
    if not energy > 0.0:
        raise ValueError("the energy must be positive")
    return _integrals(float(energy))[1]


def action_S(energy: float) -> float:
    """Action of the one-bending-point instanton, S = E + 2 T1/T."""
    if not energy > 0.0:
        raise ValueError("the energy must be positive")
    t, t1, _, _ = _integrals(float(energy))
    return energy + 2.0 * t1 / t


@dataclass(frozen=True)
class EnergyPoint:
    E: float
    phi_minus: float
    phi_plus: float
    T: float
    T1: float
    S: float

    @property
    def z(self) -> float:
        return 0.25 * self.T * self.T


def energy_point(energy: float) -> EnergyPoint:
    if not energy > 0.0:
        raise ValueError("the energy must be positive")
    t, t1, lo, hi = _integrals(float(energy))
    return EnergyPoint(energy, lo, hi, t, t1, energy + 2.0 * t1 / t)


# --- small-E series -------------------------------------------------------

@dataclass(frozen=True)
class AlphaSeries:
    """Taylor coefficients alpha_1..alpha_n of the branch f(v) of e^f - f - 1 = v^2/2."""

    alpha: np.ndarray

    def __getitem__(self, n: int) -> float:
        # 1-based, matching the usual indexing of the coefficients
        if n < 1:
            raise IndexError("coefficients start at alpha_1")
        return float(self.alpha[n - 1])

    def __len__(self) -> int:
        return self.alpha.size


def alpha_coeffs(n_max: int) -> AlphaSeries:
    """Coefficients from alpha_1 = 1 and, for n > 1,

    alpha_n = -[(n-1)/2 alpha_{n-1} + sum_{k=2}^{n-1} k alpha_k alpha_{n+1-k}] / (n+1).
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    a = np.zeros(n_max + 1)
    a[1] = 1.0
    for n in range(2, n_max + 1):
        k = np.arange(2, n)
        conv = float(np.sum(k * a[k] * a[n + 1 - k])) if n > 2 else 0.0
        a[n] = -(0.5 * (n - 1) * a[n - 1] + conv) / (n + 1)
    return AlphaSeries(a[1:].copy())


def period_series_coeffs(n_terms: int) -> np.ndarray:
    """Coefficients c_j of T(E) = sum_j c_j E^j, j = 0..n_terms-1.

    c_j = Gamma(1/2) Gamma(n/2) / Gamma((n+1)/2) * n * alpha_n * 2^(n/2), n = 2j+1.
    """
    if n_terms < 1:
        raise ValueError("need at least one term")
    alpha = alpha_coeffs(2 * n_terms - 1).alpha
    c = np.empty(n_terms)
    for j in range(n_terms):
        n = 2 * j + 1
        a = alpha[n - 1]
        if a == 0.0:
            c[j] = 0.0
            continue
        log_mag = (math.lgamma(0.5) + math.lgamma(0.5 * n) - math.lgamma(0.5 * (n + 1))
                   + math.log(n) + math.log(abs(a)) + 0.5 * n * math.log(2.0))
        c[j] = math.copysign(math.exp(log_mag), a)
    return c


def moment_series_coeffs(n_terms: int) -> np.ndarray:
    """Coefficients d_j of T1(E) = sum_j d_j E^j, j = 0..n_terms.

    Term-wise integration of dT1/dE = -T/2 - E dT/dE with T1(0) = 0.
    """
    c = period_series_coeffs(n_terms)
    j = np.arange(n_terms)
    d = np.zeros(n_terms + 1)
    d[1:] = -c * (j + 0.5) / (j + 1.0)
    return d


@dataclass(frozen=True)
class SeriesValues:
    T: float
    T1: float
    S: float


def series_eval(energy: float, n_terms: int = 50) -> SeriesValues:
    """Partial sums of the small-E expansions with ``n_terms`` terms of T.

    T is summed through E^(n_terms-1) and T1 through E^n_terms; S is formed as
    E + 2 T1/T from the two partial sums. The expansions converge for |E| < 2 pi.
    """
    if abs(energy) >= 2.0 * math.pi:
        warnings.warn(f"E={energy!r} is outside the radius of convergence 2*pi",
                      RuntimeWarning, stacklevel=2)
    c = period_series_coeffs(n_terms)
    d = moment_series_coeffs(n_terms)
    t = float(np.polynomial.polynomial.polyval(energy, c))
    t1 = float(np.polynomial.polynomial.polyval(energy, d))
    return SeriesValues(t, t1, energy + 2.0 * t1 / t)


@dataclass(frozen=True)
class Asymptotics:
    T_approx: float
    T1_bound: float


def asymptotics(energy: float) -> Asymptotics:
    """Large-E forms from the piecewise approximation U ~ -1-phi (phi<0), e^phi (phi>0)."""
    if not energy > 1.0:
        raise ValueError("the large-E forms need E > 1")
    root = math.sqrt(energy)
    log_term = math.log(root + math.sqrt(energy - 1.0))
    t_approx = 2.0 * math.sqrt(energy + 1.0) + 2.0 / root * log_term
    t1_bound = -4.0 / 3.0 * (energy + 1.0) ** 1.5 + 2.0 * math.log(energy) / root * log_term
    return Asymptotics(t_approx, t1_bound)


# --- profiles ---------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)
_PANELS = 64


class _HalfLobe:
    """x(rho) on one side of phi = 0, with phi = turn + sign * rho^2.

    The substitution removes the inverse square root at the turning point,
    so dx/drho is smooth and a composite Gauss rule is accurate to rounding.
    """

    def __init__(self, turn: float, sign: float):
        self.turn = turn
        self.sign = sign
        self.r_max = math.sqrt(abs(turn))
        self.edges = np.linspace(0.0, self.r_max, _PANELS + 1)
        widths = np.diff(self.edges)
        mids = 0.5 * (self.edges[:-1] + self.edges[1:])
        nodes = mids[:, None] + 0.5 * widths[:, None] * _GL_NODES[None, :]
        self._panel_nodes = nodes
        self._panel_scale = 0.5 * widths[:, None] * _GL_WEIGHTS[None, :]
        parts = np.sum(self._panel_scale * self.speed(nodes), axis=1)
        self.cumulative = np.concatenate([[0.0], np.cumsum(parts)])
        self.total = float(self.cumulative[-1])

    def phi(self, rho):
        return self.turn + self.sign * rho * rho

    def speed(self, rho):
        """d(time)/d(rho) = 2 rho / sqrt(E - U(phi))."""
        rho = np.asarray(rho, dtype=np.float64)
        drop = -_rise(self.turn, self.sign * rho * rho)
        small = rho < 1e-7
        out = np.empty_like(rho)
        big = ~small
        out[big] = 2.0 * rho[big] / np.sqrt(drop[big])
        # limit rho -> 0: drop ~ |U'(turn)| rho^2
        out[small] = 2.0 / math.sqrt(abs(math.expm1(self.turn)))
        return out

    def moment(self, weight) -> float:
        """Integral of weight(phi) d(time) over the whole half-lobe."""
        nodes = self._panel_nodes
        return float(np.sum(self._panel_scale * weight(self.phi(nodes)) * self.speed(nodes)))

    def time(self, rho):
        """Elapsed time from the turning point; vectorised over rho."""
        rho = np.asarray(rho, dtype=np.float64)
        j = np.clip(np.searchsorted(self.edges, rho, side="right") - 1, 0, _PANELS - 1)
        left = self.edges[j]
        half = 0.5 * (rho - left)
        nodes = (left + half)[:, None] + half[:, None] * _GL_NODES[None, :]
        return self.cumulative[j] + half * np.sum(_GL_WEIGHTS[None, :] * self.speed(nodes), axis=1)

    def invert(self, target):
        """rho with time(rho) = target, by safeguarded Newton from a PCHIP guess."""
        target = np.asarray(target, dtype=np.float64)
        guess = PchipInterpolator(self.cumulative, self.edges)(target)
        lo = np.zeros_like(target)
        hi = np.full_like(target, self.r_max)
        rho = np.clip(guess, lo, hi)
        for _ in range(60):
            f = self.time(rho) - target
            lo = np.where(f <= 0.0, rho, lo)
            hi = np.where(f >= 0.0, rho, hi)
            step = f / self.speed(rho)
            new = rho - step
            outside = (new <= lo) | (new >= hi)
            new = np.where(outside, 0.5 * (lo + hi), new)
            if np.all(np.abs(new - rho) <= 1e-15 * max(self.r_max, 1.0)):
                return new
            rho = new
        if np.max(np.abs(self.time(rho) - target)) > 1e-12 * self.total:
            raise ConvergenceError("profile inversion did not converge")
        return rho


@dataclass(frozen=True)
class InstantonProfile:
    E: float
    k: int
    xs: np.ndarray
    phis: np.ndarray
    residual_max: float
    shift: float
    z: float

    @property
    def figure_phis(self) -> np.ndarray:
        """The profile without the normalising shift, so that phi(0) = phi-."""
        return self.phis - self.shift


class _BaseSolution:
    """One bending point: phi(0) = phi-, phi(1) = phi+, phi'(0) = phi'(1) = 0."""

    def __init__(self, energy: float):
        lo, hi = turning_points(energy)
        self.energy = energy
        self.lower = _HalfLobe(lo, 1.0)
        self.upper = _HalfLobe(hi, -1.0)
        self.period = self.lower.total + self.upper.total
        self.split = self.lower.total / self.period
        mass = (self.lower.moment(np.exp) + self.upper.moment(np.exp)) / self.period
        self.shift = 0.0 - math.log(mass)

    def __call__(self, x):
        """phi at x in [0, 1] (without the shift)."""
        x = np.asarray(x, dtype=np.float64)
        out = np.empty_like(x)
        low = x <= self.split
        if np.any(low):
            rho = self.lower.invert(x[low] * self.period)
            out[low] = self.lower.phi(rho)
        if np.any(~low):
            rho = self.upper.invert((1.0 - x[~low]) * self.period)
            out[~low] = self.upper.phi(rho)
        return out


def _fold(x, k: int):
    """Map x onto the base interval for k bending points (even reflection)."""
    y = np.asarray(x, dtype=np.float64) * k
    p = np.floor(y)
    local = y - p
    return np.where(np.mod(p, 2.0) == 1.0, 1.0 - local, local)


_FD6 = np.array([1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90])


def instanton_profile(energy: float, k: int = 1, grid: int = 201) -> InstantonProfile:
    """Solution with k bending points, sampled on ``grid`` uniform x values.

    The base solution runs from phi- at x = 0 to phi+ at x = 1; copies of it,
    alternately reflected, are squeezed into k equal pieces, which multiplies
    z by k^2. The returned ``phis`` satisfy int e^phi dx = 1.
    """
    if not energy > 0.0:
        raise ValueError("the energy must be positive")
    if k < 1:
        raise ValueError("k must be at least 1")
    if grid < 16:
        raise ValueError("grid must have at least 16 points")
    base = _BaseSolution(float(energy))
    z = 0.25 * (k * base.period) ** 2
    xs = np.linspace(0.0, 1.0, grid)
    phis = base(_fold(xs, k)) + base.shift

    # field-equation residual by sixth-order central differences
    h = 5e-3 / k
    inner = xs[1:-1]
    offsets = np.arange(-3, 4) * h
    sample = base(_fold(inner[:, None] + offsets[None, :], k).ravel()).reshape(inner.size, 7)
    second = sample @ _FD6 / (h * h)
    phi_inner = sample[:, 3] + base.shift
    residual = -second / (2.0 * z) + 1.0 - np.exp(phi_inner)
    res_max = float(np.max(np.abs(residual))) if residual.size else 0.0
    xs.setflags(write=False)
    phis.setflags(write=False)
    return InstantonProfile(float(energy), int(k), xs, phis, res_max, base.shift, z)


def profile_action(profile: InstantonProfile) -> float:
    """Action (1/4z) int phi'^2 dx + int phi dx evaluated on the sampled profile.

    Only as accurate as the sampling; used to check S = E + 2 T1/T.
    """
    slope = np.gradient(profile.phis, profile.xs, edge_order=2)
    kinetic = simpson(slope * slope, x=profile.xs)
    return float(kinetic / (4.0 * profile.z) + simpson(profile.phis, x=profile.xs))
