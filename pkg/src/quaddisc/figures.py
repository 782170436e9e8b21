"""Tabulated data behind the five instanton figures.

Each generator returns a :class:`Table`: column names, numeric rows and a
small dictionary of scalar annotations. Nothing here draws anything.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .lego_instanton import branch_scan, find_vc, wall_threshold, y_branches
from .wiener_instanton import (asymptotics, energy_point, instanton_profile,
                               series_eval)


@dataclass
class Table:
    columns: list[str]
    rows: list[list[float]]
    meta: dict = field(default_factory=dict)


def fig_y_branches(v: float = math.log(4.0), t_min: float = -2.0, t_max: float = 4.0,
                   steps: int = 301) -> Table:
    """f(t) = e^t / t with the two roots of f = e^v marked."""
    y_minus, y_plus = y_branches(v)
    ts = np.linspace(t_min, t_max, steps)
    ts = ts[np.abs(ts) > 1e-9]
    rows = [[t, math.exp(t) / t, math.exp(v), y_minus, y_plus] for t in ts]
    return Table(["t", "f", "e_v", "y_minus", "y_plus"], rows,
                 {"v": v, "e_v": math.exp(v), "y_minus": y_minus, "y_plus": y_plus})


def fig_lego_branch(w_plus: float = 0.09, v_max: float | None = None,
                    steps: int = 400) -> Table:
    """z(v) and Sigma(v) over (1, v_max], with v_c and the wall threshold."""
    v_c = find_vc(w_plus) if w_plus < 0.5 else math.nan
    if v_max is None:
        v_max = 10.0 if math.isnan(v_c) else max(10.0, math.ceil(v_c + 1.0))
    threshold = wall_threshold(w_plus)
    points = branch_scan(w_plus, v_max, steps)
    rows = [[bp.v, bp.z, bp.sigma, threshold] for bp in points]
    return Table(["v", "z", "sigma", "wall_threshold"], rows,
                 {"w_plus": w_plus, "v_c": v_c, "wall_threshold": threshold})


def fig_profiles(energy: float = 5.7, ks=(1, 2, 3), grid: int = 301) -> Table:
    """Profiles with k bending points, drawn with phi(0) = phi- (no normalising shift)."""
    profiles = [instanton_profile(energy, k, grid) for k in ks]
    xs = profiles[0].xs
    cols = np.column_stack([xs] + [p.figure_phis for p in profiles])
    meta = {"E": energy, "shift": profiles[0].shift}
    for p in profiles:
        meta[f"z_k{p.k}"] = p.z
        meta[f"residual_k{p.k}"] = p.residual_max
    return Table(["x"] + [f"phi_k{k}" for k in ks], cols.tolist(), meta)


def _energy_grid(e_min: float, e_max: float, steps: int) -> np.ndarray:
    if not 0.0 < e_min < e_max or steps < 2:
        raise ValueError("need 0 < e_min < e_max and at least two steps")
    return np.linspace(e_min, e_max, steps)


def fig_period(e_min: float = 0.05, e_max: float = 12.0, steps: int = 240,
               series_terms: int = 50) -> Table:
    """T(E) by quadrature, by the small-E series and by the large-E form."""
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for e in _energy_grid(e_min, e_max, steps):
            ep = energy_point(e)
            asym = asymptotics(e).T_approx if e > 1.0 else math.nan
            rows.append([e, ep.T, series_eval(e, series_terms).T, asym])
    return Table(["E", "T_quad", "T_series", "T_asymp"], rows,
                 {"series_terms": series_terms, "radius": 2.0 * math.pi})


def fig_action(e_min: float = 0.05, e_max: float = 12.0, steps: int = 240,
               series_terms: int = 50) -> Table:
    """S(E) by quadrature, by the series, and the large-E upper bound E + 2 T1_bound / T_approx."""
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for e in _energy_grid(e_min, e_max, steps):
            ep = energy_point(e)
            if e > 1.0:
                a = asymptotics(e)
                bound = e + 2.0 * a.T1_bound / a.T_approx
            else:
                bound = math.nan
            rows.append([e, ep.S, series_eval(e, series_terms).S, bound])
    return Table(["E", "S_quad", "S_series", "S_bound"], rows,
                 {"series_terms": series_terms, "radius": 2.0 * math.pi})
