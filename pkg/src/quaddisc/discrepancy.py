"""Quadratic discrepancies D_N of a point set.

Three problem classes are covered:

* Lego: piecewise constant functions on M bins with strengths 1/w_n.
  D_N is Pearson's chi-square statistic of the bin counts.
* L2*: the standard L2 star discrepancy in any dimension, times N.
* Discretised Wiener: the L2* discrepancy with the anchor average taken
  over M equal bins; tends to L2* as M grows.
"""
from __future__ import annotations

import numpy as np

from .points import CountVector, LegoWeights, PointSet, bin_index


def lego_discrepancy(counts: CountVector, w: LegoWeights) -> float:
    """(1/N) sum_n S_n^2 / w_n - N."""
    if counts.m != w.m:
        raise ValueError(f"{counts.m} counts for {w.m} bins")
    n = counts.n_total
    if n < 1:
        raise ValueError("need at least one point")
    s = counts.counts.astype(np.float64)
    # expanding around the expected counts keeps exact zeros exact
    dev = s - n * w.w
    return max(float(np.sum(dev * dev / w.w)) / n, 0.0)


def l2star_discrepancy(ps: PointSet) -> float:
    """N times the squared L2 star discrepancy, by the pairwise closed form.

    D_N = (1/N) sum_{k,l} prod_nu (1 - max(x_k, x_l))
          - 2 sum_k prod_nu (1 - x_k^2)/2 + N 3^{-s}
    """
    x = ps.points
    n, s = x.shape
    c = 1.0 - x
    pair = np.ones((n, n))
    for nu in range(s):
        pair *= np.minimum(c[:, nu][:, None], c[:, nu][None, :])
    term1 = pair.sum() / n
    term2 = 2.0 * np.prod((1.0 - x * x) / 2.0, axis=1).sum()
    return max(term1 - term2 + n * 3.0 ** (-s), 0.0)


def r_matrix(m: int) -> np.ndarray:
    """R_{nm} = min(n, m)/M of the discretised Wiener class (1-based indices)."""
    idx = np.arange(1, m + 1)
    return np.minimum(idx[:, None], idx[None, :]) / m


def r_matrix_inverse(m: int) -> np.ndarray:
    """Analytic inverse of :func:`r_matrix`.

    The quadratic form is M phi_1^2 + M sum_{n>=2} (phi_n - phi_{n-1})^2,
    i.e. M times the second-difference matrix with a free last row.
    """
    inv = np.zeros((m, m))
    idx = np.arange(m)
    inv[idx, idx] = 2.0 * m
    inv[m - 1, m - 1] = float(m)
    inv[idx[:-1], idx[1:]] = -float(m)
    inv[idx[1:], idx[:-1]] = -float(m)
    return inv


def _kernel_form(counts: np.ndarray, w: np.ndarray, kernel: np.ndarray,
                 sigma2: np.ndarray, n: int) -> float:
    # (1/N) sum_rho sigma_rho^2 (sum_n K_n^rho (S_n - N w_n))^2
    proj = kernel @ (counts - n * w)
    return float(np.sum(sigma2 * proj * proj)) / n


def _r_form(counts: np.ndarray, w: np.ndarray, r: np.ndarray, n: int) -> float:
    # (1/N) S.R.S - 2 T.S + N U with T = R w, U = w.R.w
    t = r @ w
    u = w @ t
    return float(counts @ r @ counts) / n - 2.0 * float(t @ counts) + n * float(u)


def discrete_wiener_discrepancy(ps: PointSet, m: int) -> float:
    """Discretised L2* discrepancy on M equal bins (one dimension).

    Evaluated twice, once through the cumulative kernel K_n^rho = [rho <= n]
    with sigma_rho^2 = 1/M and once through the R-matrix quadratic form;
    the two must agree to 1e-10.
    """
    if ps.s != 1:
        raise ValueError("the discretised Wiener discrepancy needs s = 1")
    if m < 1:
        raise ValueError("need at least one bin")
    w = LegoWeights.uniform(m)
    counts = np.bincount(bin_index(ps.points[:, 0], w), minlength=m).astype(np.float64)
    n = ps.n
    kernel = np.triu(np.ones((m, m)))  # row rho, column n: [rho <= n]
    direct = _kernel_form(counts, w.w, kernel, np.full(m, 1.0 / m), n)
    via_r = _r_form(counts, w.w, r_matrix(m), n)
    if abs(direct - via_r) > 1e-10 * max(1.0, abs(direct)):
        raise ArithmeticError(f"kernel and R-matrix forms disagree: {direct!r} vs {via_r!r}")
    return max(direct, 0.0)


def l2star_discrepancy_1d_batch(x: np.ndarray) -> np.ndarray:
    """``l2star_discrepancy`` for many one-dimensional point sets at once.

    ``x`` has shape (reps, N). Uses the sorted-sample identity
    D_N = 1/(12N) + sum_i (x_(i) - (2i-1)/(2N))^2, which is O(N log N).
    """
    x = np.sort(np.asarray(x, dtype=np.float64), axis=-1)
    n = x.shape[-1]
    mid = (2.0 * np.arange(1, n + 1) - 1.0) / (2.0 * n)
    dev = x - mid
    return 1.0 / (12.0 * n) + np.sum(dev * dev, axis=-1)
