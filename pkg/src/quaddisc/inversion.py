"""Density of the discrepancy from its generating function.

H(t) = (1/2 pi) int e^{-(c+iy) t} G(c+iy) dy along a vertical line left of
every singularity of G, truncated to |y| <= z_max and summed with the
trapezoid rule. The grid is symmetric in y, so the imaginary part of the
sum cancels for a real density and is returned as a diagnostic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .genfun import GFSpec

IMAG_TOL = 1e-8


@dataclass(frozen=True)
class InversionParams:
    c: float = 0.0
    z_max: float = 400.0
    step: float = 0.05

    def __post_init__(self):
        if not self.step > 0.0:
            raise ValueError("step must be positive")
        if not self.z_max >= 10.0 * self.step:
            raise ValueError("z_max must be at least ten steps")

    @classmethod
    def defaults(cls, gf: GFSpec) -> "InversionParams":
        if gf.kind == "lego_zeroth":
            return cls(z_max=2000.0 / max(gf.m - 1, 1))
        # |G| on the imaginary axis decays only like exp(-sqrt(|y|)/2)
        return cls(z_max=4000.0)


def _check(gf: GFSpec, p: InversionParams) -> None:
    if not gf.is_zeroth_order:
        raise ValueError("only the zeroth-order generating functions can be inverted")
    if gf.kind == "lego_zeroth" and gf.m < 4:
        raise ValueError("Lego inversion needs M >= 4 for an absolutely convergent line integral")
    if not p.c < gf.singularity:
        raise ValueError(f"contour abscissa c={p.c} is not left of the singularity at {gf.singularity}")


def _line_sum(gf: GFSpec, ts: np.ndarray, p: InversionParams) -> np.ndarray:
    half = int(round(p.z_max / p.step))
    y = np.arange(-half, half + 1) * p.step
    zs = p.c + 1j * y
    g = np.asarray(gf.evaluate(zs))
    weights = np.full(y.size, p.step)
    weights[[0, -1]] *= 0.5
    out = np.empty(ts.size, dtype=np.complex128)
    # blocks of t keep the phase matrix small
    block = max(1, 2_000_000 // y.size)
    for start in range(0, ts.size, block):
        tt = ts[start:start + block]
        phase = np.exp(-np.outer(tt, zs))
        out[start:start + block] = phase @ (weights * g)
    return out / (2.0 * math.pi)


def bromwich_density_full(gf: GFSpec, t, p: InversionParams | None = None):
    """(H(t), imaginary residual) for scalar or array t > 0."""
    p = p or InversionParams.defaults(gf)
    _check(gf, p)
    ts = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if np.any(ts <= 0.0):
        raise ValueError("t must be positive")
    raw = _line_sum(gf, ts, p)
    if np.ndim(t):
        return raw.real, raw.imag
    return float(raw.real[0]), float(raw.imag[0])


def bromwich_density(gf: GFSpec, t: float, p: InversionParams | None = None) -> float:
    """H(t) by trapezoid integration along the vertical line Re z = c.

    Raises ArithmeticError if the imaginary residual exceeds 1e-8, which
    signals a broken symmetry or a bad truncation.
    """
    value, imag = bromwich_density_full(gf, t, p)
    if abs(imag) > IMAG_TOL:
        raise ArithmeticError(f"imaginary residual {imag:.3g} at t={t}")
    return value


@dataclass(frozen=True)
class DensityTable:
    t: np.ndarray
    H: np.ndarray
    imag: np.ndarray
    mass: float
    mean: float
    variance: float


def density_table(gf: GFSpec, t_grid, p: InversionParams | None = None) -> DensityTable:
    """H on a strictly increasing positive grid, with trapezoid moments."""
    ts = np.asarray(t_grid, dtype=np.float64)
    if ts.ndim != 1 or ts.size < 2 or np.any(np.diff(ts) <= 0.0) or ts[0] <= 0.0:
        raise ValueError("t_grid must be strictly increasing and positive")
    h, imag = bromwich_density_full(gf, ts, p)
    if np.max(np.abs(imag)) > IMAG_TOL:
        raise ArithmeticError(f"imaginary residual {np.max(np.abs(imag)):.3g} on the grid")
    mass = float(trapezoid(h, ts))
    mean = float(trapezoid(ts * h, ts))
    second = float(trapezoid(ts * ts * h, ts))
    return DensityTable(ts, h, imag, mass, mean, second - mean * mean)
