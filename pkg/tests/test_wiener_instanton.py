import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad, simpson, solve_ivp
from scipy.optimize import brentq

from quaddisc.wiener_instanton import (action_S, alpha_coeffs, asymptotics, energy_point,
                                       instanton_profile, moment_T1, moment_series_coeffs,
                                       period_series_coeffs, period_T, potential,
                                       profile_action, series_eval, turning_points)

ROOT2PI = math.pi * math.sqrt(2.0)


def _u(phi):
    return math.expm1(phi) - phi


def _quad_integrals(e):
    """T and T1 by scipy quad after phi = turn +/- s^2 removes the endpoint singularity."""
    lo = brentq(lambda p: _u(p) - e, -(e + 1), 0.0, xtol=1e-15)
    hi = brentq(lambda p: _u(p) - e, 0.0, math.log(e + 2) + 2, xtol=1e-15)

    def lobe(turn, sign, weight):
        def f(s):
            phi = turn + sign * s * s
            gap = e - _u(phi)
            return 2 * s * weight(phi) / math.sqrt(gap) if gap > 0 else 0.0
        return quad(f, 0, math.sqrt(abs(turn)), epsabs=1e-13, epsrel=1e-13, limit=200)[0]

    t = lobe(lo, 1, lambda p: 1.0) + lobe(hi, -1, lambda p: 1.0)
    t1 = lobe(lo, 1, lambda p: p) + lobe(hi, -1, lambda p: p)
    return lo, hi, t, t1


# --- turning points, T, T1, S ------------------------------------------------

def test_turning_points_small_energy():
    for e in (1e-4, 1e-6, 1e-8):
        lo, hi = turning_points(e)
        assert -lo / math.sqrt(2 * e) == pytest.approx(1.0, abs=2 * math.sqrt(e))
        assert hi / math.sqrt(2 * e) == pytest.approx(1.0, abs=2 * math.sqrt(e))


@pytest.mark.parametrize("e, lo, hi", [(5.7, -6.70, 2.18), (0.5, -1.199, 0.857)])
def test_turning_point_examples(e, lo, hi):
    a, b = turning_points(e)
    assert a == pytest.approx(lo, abs=5e-3)
    assert b == pytest.approx(hi, abs=5e-3)


@settings(max_examples=60, deadline=None)
@given(e=st.floats(1e-6, 200.0))
def test_turning_points_solve_the_energy_relation(e):
    lo, hi = turning_points(e)
    assert lo < 0 < hi
    assert abs(_u(lo) - e) < 1e-12 * max(1.0, e)
    assert abs(_u(hi) - e) < 1e-12 * max(1.0, e)


def test_turning_point_validation():
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError):
            turning_points(bad)


def test_potential():
    assert potential(0.0) == 0.0
    assert potential(1e-9) == pytest.approx(5e-19, rel=1e-6)
    assert np.allclose(potential(np.array([-2.0, 1.0])), [math.exp(-2) + 1, math.e - 2], rtol=1e-15)


@pytest.mark.parametrize("e", [0.01, 0.5, 2.0, 5.7, 12.0])
def test_integrals_match_quad_oracle(e):
    _, _, t, t1 = _quad_integrals(e)
    ep = energy_point(e)
    assert ep.T == pytest.approx(t, abs=1e-9)
    assert ep.T1 == pytest.approx(t1, abs=1e-9)


def test_period_examples():
    assert period_T(1e-8) == pytest.approx(ROOT2PI, abs=1e-6)
    assert period_T(12.0) == pytest.approx(8.31, abs=0.15)
    assert period_T(2.0) == pytest.approx(series_eval(2.0, 50).T, abs=1e-8)
    assert period_T(1.0) == pytest.approx(series_eval(1.0, 50).T, abs=1e-8)


def test_moment_examples():
    assert abs(moment_T1(1e-8)) < 1e-6
    assert moment_T1(0.1) == pytest.approx(-0.2249, abs=1e-4)
    for e in (0.3, 3.0, 20.0):
        assert moment_T1(e) < 0


def test_action_examples():
    assert action_S(12.0) == pytest.approx(-2.58, abs=0.10)
    assert action_S(0.1) == pytest.approx(-0.000414, abs=1e-6)
    e = 1e-3
    assert action_S(e) / (-e * e / 24) == pytest.approx(1.0, abs=1e-3)


def test_energy_point_invariants():
    for e in (0.05, 1.0, 7.0, 30.0):
        ep = energy_point(e)
        assert ep.S == pytest.approx(e + 2 * ep.T1 / ep.T, rel=1e-12, abs=1e-15)
        assert ep.z == pytest.approx(ep.T ** 2 / 4, rel=1e-15)
        assert abs(_u(ep.phi_minus) - e) < 1e-10 and abs(_u(ep.phi_plus) - e) < 1e-10


@pytest.mark.parametrize("e", [0.5, 1.0, 2.0, 4.0])
def test_moment_derivative_identity(e):
    h = 1e-4
    dt = (period_T(e + h) - period_T(e - h)) / (2 * h)
    dt1 = (moment_T1(e + h) - moment_T1(e - h)) / (2 * h)
    assert dt1 == pytest.approx(-period_T(e) / 2 - e * dt, abs=1e-6)


def test_period_increasing_and_action_negative():
    grid = np.geomspace(1e-3, 12.0, 40)
    pts = [energy_point(float(e)) for e in grid]
    assert all(b.T > a.T for a, b in zip(pts, pts[1:]))
    assert all(p.S < 0 for p in pts)


# --- series -----------------------------------------------------------------

def _alpha_oracle(n_max):
    """Reversion of e^f - f - 1 = v^2/2 order by order in exact arithmetic."""
    order = n_max + 2
    alpha = [Fraction(0)] * (n_max + 1)
    alpha[1] = Fraction(1)

    def mul(p, q):
        out = [Fraction(0)] * order
        for i, a in enumerate(p):
            if a:
                for j in range(order - i):
                    out[i + j] += a * q[j]
        return out

    for n in range(2, n_max + 1):
        f = [Fraction(0)] * order
        for i in range(1, n):
            f[i] = alpha[i]
        # coefficient of v^(n+1) in sum_{m>=2} f^m / m!
        total, power = Fraction(0), f
        for m in range(2, n + 2):
            power = mul(power, f)
            total += power[n + 1] / math.factorial(m)
        alpha[n] = -total  # v^(n+1) gets alpha_n * alpha_1 from f^2/2
    return alpha[1:]


def test_alpha_exact():
    exact = _alpha_oracle(16)
    got = alpha_coeffs(16)
    assert got[1] == 1.0
    assert exact[1] == Fraction(-1, 6) and exact[2] == Fraction(1, 36)
    for n in range(1, 17):
        assert got[n] == pytest.approx(float(exact[n - 1]), rel=1e-13, abs=1e-300)


def test_alpha_series_inverts_the_relation():
    a = alpha_coeffs(30)
    for v in (0.1, 0.5, -0.7):
        f = sum(a[n] * v ** n for n in range(1, 31))
        assert math.expm1(f) - f == pytest.approx(v * v / 2, rel=1e-10)


def test_alpha_indexing():
    a = alpha_coeffs(5)
    assert len(a) == 5
    with pytest.raises(IndexError):
        a[0]
    with pytest.raises(ValueError):
        alpha_coeffs(0)


def test_alpha_envelope():
    a = alpha_coeffs(44)
    scaled = [abs(a[n]) * (4 * math.pi) ** (n / 2) * n ** 1.5 for n in range(36, 45)]
    assert 1.5 <= scaled[40 - 36] <= 3.2
    assert max(scaled) < 3.2
    # one coefficient in four nearly vanishes
    assert sum(s < 0.5 for s in scaled[:8]) == 2


def test_period_leading_coefficients():
    c = period_series_coeffs(5) / ROOT2PI
    expected = [1, Fraction(1, 12), Fraction(1, 4) / 144,
                -Fraction(139, 180) / 12 ** 3, -Fraction(571, 2880) / 12 ** 4]
    assert np.allclose(c, [float(x) for x in expected], rtol=1e-13, atol=0)


def test_moment_leading_coefficients():
    d = moment_series_coeffs(4) / ROOT2PI
    expected = [0, Fraction(-1, 2), Fraction(-1, 16), Fraction(-5, 3456), Fraction(973, 2488320)]
    assert np.allclose(d, [float(x) for x in expected], rtol=1e-13, atol=1e-16)


def test_action_leading_coefficients():
    c = np.polynomial.Polynomial(period_series_coeffs(8))
    d = np.polynomial.Polynomial(moment_series_coeffs(8))
    # S = E + 2 T1/T as a power series: divide by long division on low orders
    num = (np.polynomial.Polynomial([0, 1]) * c + 2 * d).coef[:6]
    den = c.coef[:6]
    s = np.zeros(5)
    for j in range(5):
        s[j] = (num[j] - sum(s[i] * den[j - i] for i in range(j))) / den[0]
    expected = [0, 0, -1 / 24, 1 / 432, 89 / 414720]
    assert np.allclose(s, expected, rtol=1e-12, atol=1e-15)


def test_series_small_energy_action():
    e = 0.1
    assert series_eval(e).S == pytest.approx(-e ** 2 / 24 + e ** 3 / 432 + 89 * e ** 4 / 414720, abs=1e-9)
    assert series_eval(0.0).T == pytest.approx(ROOT2PI, rel=1e-15)


def test_series_warns_outside_radius():
    with pytest.warns(RuntimeWarning):
        series_eval(6.5)


def test_series_convergence_radius():
    def cauchy(e):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return [abs(series_eval(e, n + 5).T - series_eval(e, n).T) for n in (10, 20, 30, 40)]
    inside, outside = cauchy(4.0), cauchy(7.0)
    assert all(b < a for a, b in zip(inside, inside[1:]))
    assert inside[-1] < 1e-4
    assert outside[-1] > outside[0]


# --- large E ----------------------------------------------------------------

def test_asymptotics():
    assert asymptotics(12.0).T_approx == pytest.approx(period_T(12.0), rel=0.02)
    assert asymptotics(50.0).T_approx == pytest.approx(period_T(50.0), rel=0.01)
    assert asymptotics(12.0).T1_bound > moment_T1(12.0)
    with pytest.raises(ValueError):
        asymptotics(1.0)


# --- profiles ---------------------------------------------------------------

@pytest.fixture(scope="module")
def profiles():
    return {k: instanton_profile(5.7, k, 301) for k in (1, 2, 3)}


def test_profile_residual_and_normalisation(profiles):
    for p in profiles.values():
        assert p.residual_max < 1e-6
        assert simpson(np.exp(p.phis), x=p.xs) == pytest.approx(1.0, abs=1e-6)
        assert abs(p.shift) < 1e-8


def test_profile_figure_convention(profiles):
    lo, hi = turning_points(5.7)
    p = profiles[1]
    assert p.figure_phis[0] == pytest.approx(lo, abs=1e-9)
    assert p.figure_phis[-1] == pytest.approx(hi, abs=1e-9)
    assert p.figure_phis.min() == pytest.approx(-6.7, abs=0.01)
    assert p.figure_phis.max() == pytest.approx(2.18, abs=0.01)


def test_profile_reflection(profiles):
    p = profiles[2]
    assert np.max(np.abs(p.phis - p.phis[::-1])) < 1e-10


def test_profile_z_scaling(profiles):
    z1 = profiles[1].z
    assert z1 == pytest.approx(period_T(5.7) ** 2 / 4, rel=1e-9)
    for k, p in profiles.items():
        assert p.z == pytest.approx(k * k * z1, rel=1e-15)


def test_profile_bending_points(profiles):
    for k, p in profiles.items():
        slope = np.diff(p.phis)
        signs = np.sign(slope[np.abs(slope) > 1e-12])
        # k monotone pieces, so k - 1 interior turns of the slope
        assert np.count_nonzero(np.diff(signs)) == k - 1
        centred = p.phis - np.mean(p.phis)
        assert np.count_nonzero(np.diff(np.sign(centred))) == k


def test_profile_end_slopes(profiles):
    # a vanishing end slope leaves only the curvature term: phi(h) - phi(0) ~ phi''(0) h^2 / 2
    for p in profiles.values():
        h = p.xs[1] - p.xs[0]
        for end, inner in ((0, 1), (-1, -2)):
            curvature = 2 * p.z * (1 - math.exp(p.phis[end]))
            assert p.phis[inner] - p.phis[end] == pytest.approx(curvature * h * h / 2, rel=0.05)


def test_profile_small_energy_shape():
    p = instanton_profile(0.01, 1, 201)
    centred = p.phis - p.phis.mean()
    ref = 1 - np.cos(np.pi * p.xs)
    ref -= ref.mean()
    assert abs(np.corrcoef(centred, ref)[0, 1]) > 0.9999


def test_profile_matches_ode_shooting():
    e = 2.0
    p = instanton_profile(e, 1, 101)
    lo, _ = turning_points(e)

    def rhs(x, y):
        return [y[1], 2 * p.z * (1 - math.exp(y[0]))]

    sol = solve_ivp(rhs, (0, 1), [lo, 0.0], t_eval=p.xs, rtol=1e-12, atol=1e-13, method="DOP853")
    assert np.max(np.abs(sol.y[0] - p.figure_phis)) < 1e-7


def test_profile_action_matches(profiles):
    assert profile_action(profiles[1]) == pytest.approx(action_S(5.7), abs=1e-3)
    p = instanton_profile(0.5, 1, 401)
    assert profile_action(p) == pytest.approx(action_S(0.5), abs=1e-5)


def test_profile_validation():
    with pytest.raises(ValueError):
        instanton_profile(0.0)
    with pytest.raises(ValueError):
        instanton_profile(1.0, 0)
    with pytest.raises(ValueError):
        instanton_profile(1.0, 1, 10)
