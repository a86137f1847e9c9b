import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plapaudit.bubbles import Bubble, bubble_constants
from plapaudit.errors import CriticalPointError, DomainError, QuadratureError
from plapaudit.fields import TestField
from plapaudit.integrals import (
    Cutoff,
    bubble_radial,
    check_cutoff_flux_identity,
    check_divergence_theorem,
    check_growth,
    cutoff_identity_q_grid,
    divergence_test_field,
    growth_q_grid,
    predicted_growth_slope,
    radial_integral,
    smoothstep,
)
from plapaudit.params import EqParams
from plapaudit.quadrature import adaptive_simpson, gauss_legendre_box, sphere_area
from plapaudit.suites import _hand_check_exact

P42 = EqParams(4, 2.0)
B4 = Bubble.centered(1.0, 4)


# -- quadrature ---------------------------------------------------------------


def test_sphere_area():
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    assert sphere_area(4) == pytest.approx(2 * math.pi**2)


def test_simpson_polynomial_and_smooth():
    assert adaptive_simpson(lambda x: x**3, 0.0, 2.0) == pytest.approx(4.0, rel=1e-14)
    assert adaptive_simpson(np.sin, 0.0, math.pi, rtol=1e-12) == pytest.approx(2.0, rel=1e-11)


def test_simpson_depth_limit():
    with pytest.raises(QuadratureError):
        adaptive_simpson(lambda x: np.where(x > 1.0 / 3.0, 1.0, 0.0), 0.0, 1.0, rtol=1e-15, atol=1e-300, max_depth=5)


def test_gauss_legendre_box():
    val = gauss_legendre_box(lambda x: x[:, 0] ** 2 * x[:, 1] ** 4, [-1, 0], [1, 2], 6)
    assert val == pytest.approx(2 / 3 * 32 / 5, rel=1e-14)
    both = gauss_legendre_box(lambda x: np.stack([np.ones(len(x)), x[:, 0]], axis=-1), [0, 0], [2, 3], 4)
    assert np.allclose(both, [6.0, 6.0])


@given(s=st.floats(-1.5, 3.0), n=st.integers(2, 6))
@settings(max_examples=30, deadline=None)
def test_radial_power_scaling(s, n):
    # doubling R multiplies the shell integral of r^s by 2^(n+s)
    params = EqParams(n, 1.5)
    f = lambda r, v, dv: r**s
    shell = lambda R: radial_integral(params, Bubble.centered(1.0, n), f, 2 * R, rtol=1e-11, inner=R)
    assert shell(8.0) / shell(4.0) == pytest.approx(2.0 ** (n + s), rel=1e-8)


def test_ball_volume():
    vol = radial_integral(P42, B4, lambda r, v, dv: np.ones_like(r), 1.0)
    assert vol == pytest.approx(math.pi**2 / 2, rel=1e-12)


def test_critical_weight_integral_increasing():
    f = lambda r, v, dv: v ** (-3.0)
    vals = [radial_integral(P42, B4, f, R) for R in (5.0, 10.0, 20.0)]
    assert 0 < vals[0] < vals[1] < vals[2]


def test_radial_integral_against_mpmath():
    params = EqParams(3, 1.5)
    b = Bubble.centered(0.7, 3)
    c = bubble_constants(params, b)
    q, R = 1.2, 6.0
    ours = radial_integral(params, b, lambda r, v, dv: v ** (-q) * np.abs(dv) ** 1.5, R, rtol=1e-11)
    mpmath.mp.dps = 30
    k = c.k

    def integrand(r):
        v = c.c1 + c.c2 * r**k
        dv = k * c.c2 * r ** (k - 1)
        return v ** (-q) * dv**1.5 * r**2

    ref = 4 * mpmath.pi * mpmath.quad(integrand, [0, 0.7, R])
    assert ours == pytest.approx(float(ref), rel=1e-9)


# -- cutoff -------------------------------------------------------------------


def test_cutoff_shape():
    cut = Cutoff(5.0)
    r = np.array([0.0, 4.9, 5.0, 7.5, 10.0, 12.0])
    assert np.allclose(cut.eta(r), [1, 1, 1, 0.5, 0, 0])
    assert cut.max_gradient() * 5.0 == pytest.approx(1.5, rel=1e-6)
    assert smoothstep(np.array([0.0, 1.0])).tolist() == [0.0, 1.0]
    with pytest.raises(DomainError):
        Cutoff(-1.0)


def test_cutoff_derivative_matches_fd():
    cut = Cutoff(3.0, theta=4)
    r = np.linspace(3.1, 5.9, 9)
    h = 1e-6
    assert np.allclose(cut.dpsi(r), (cut.psi(r + h) - cut.psi(r - h)) / (2 * h), rtol=1e-6, atol=1e-9)


def test_cutoff_identity_vanishing_coefficient():
    rep = check_cutoff_flux_identity(P42, B4, P42.a + 1.0, Cutoff(10.0))
    assert rep.relative <= 1e-6 and rep.passed


@pytest.mark.parametrize("R", [5.0, 20.0])
def test_cutoff_identity_q_equals_p(R):
    params = EqParams(3, 1.5)
    rep = check_cutoff_flux_identity(params, Bubble.centered(1.0, 3), 1.5, Cutoff(R))
    assert rep.relative <= 1e-6


def test_cutoff_identity_grid():
    params = EqParams(5, 3.0)
    for q in cutoff_identity_q_grid(params):
        assert check_cutoff_flux_identity(params, Bubble.centered(1.0, 5), q, Cutoff(8.0)).passed


def test_hand_check_polynomial_case():
    # sympy-independent: exact rational integration against the documented closed form
    from fractions import Fraction

    for R in (3, 10):
        assert _hand_check_exact(R) == Fraction(R**4 * (4973 * R**2 + 18150), 18480)
    params = P42
    bubble = Bubble.centered(2 * math.sqrt(2), 4)
    c = bubble_constants(params, bubble)
    assert (c.c1, c.c2) == pytest.approx((1.0, 1 / 8), rel=1e-14)
    rep = check_cutoff_flux_identity(params, bubble, 0.0, Cutoff(10.0, 2.0))
    exact = 2 * math.pi**2 * 64431250 / 231
    assert rep.lhs == pytest.approx(exact, rel=1e-12)
    assert rep.rhs == pytest.approx(exact, rel=1e-12)


def test_bubble_radial_profile():
    v, dv = bubble_radial(P42, B4)
    c = bubble_constants(P42, B4)
    assert v(np.array([2.0]))[0] == pytest.approx(c.c1 + 4 * c.c2)
    assert dv(np.array([2.0]))[0] == pytest.approx(4 * c.c2)


# -- growth -------------------------------------------------------------------


def test_growth_equality_case():
    fit = check_growth(P42, B4, 2.0, "gradient")
    assert fit.predicted_slope == 2.0 == fit.bound_slope
    assert fit.equality_case
    assert fit.fitted_slope == pytest.approx(2.0, abs=0.05)


def test_growth_plain_q1():
    fit = check_growth(P42, B4, 1.0, "plain")
    assert fit.predicted_slope == 2.0 and fit.bound_slope == 3.0
    assert fit.fitted_slope == pytest.approx(2.0, abs=0.05)
    assert fit.bound_ok and fit.passed


def test_growth_convergent_case():
    fit = check_growth(P42, B4, 3.0, "plain")
    assert fit.predicted_slope == 0.0 and not fit.compares_prediction
    assert abs(fit.fitted_slope) <= 0.05 and fit.bound_ok


def test_growth_shell_slope_tracks_prediction():
    for n, p in ((4, 2.0), (3, 1.5), (5, 3.0), (8, 4.0)):
        params = EqParams(n, p)
        for weight in ("plain", "gradient"):
            for q in growth_q_grid(params, weight):
                fit = check_growth(params, Bubble.centered(1.0, n), q, weight)
                assert fit.bound_ok
                if fit.compares_prediction:
                    assert fit.tail_prediction_ok


def test_growth_prediction_formula():
    assert predicted_growth_slope(P42, 1.0, "plain") == 2.0
    assert predicted_growth_slope(P42, 2.5, "gradient") == pytest.approx(1.0)
    with pytest.raises(DomainError):
        check_growth(P42, B4, 1.0, "gradient")
    with pytest.raises(DomainError):
        check_growth(P42, B4, 1.0, "plain", radii=[1.0, 2.0, 4.0, 8.0])


# -- divergence theorem -----------------------------------------------------------


def test_divergence_theorem_bubble_field_vanishes():
    params = EqParams(2, 1.5)
    f = TestField.bubble_v(Bubble(1.0, (3.0, 0.0)))
    rep = check_divergence_theorem(params, f, 0.0)
    assert abs(rep.volume_refined) <= 1e-12 and abs(rep.flux_refined) <= 1e-12


@pytest.mark.parametrize("n,p,m", [(2, 1.5, 0.0), (3, 1.7, -0.4)])
def test_divergence_theorem_random(n, p, m, rng):
    params = EqParams(n, p)
    rep = check_divergence_theorem(params, divergence_test_field(n, rng, params=params), m)
    assert rep.relative <= 1e-4 and rep.passed


def test_divergence_theorem_rejects():
    with pytest.raises(DomainError):
        check_divergence_theorem(P42, TestField.bubble_v(B4), 0.0)
    params = EqParams(2, 1.5)
    with pytest.raises(CriticalPointError):
        check_divergence_theorem(params, TestField.bubble_v(Bubble.centered(1.0, 2)), 0.0)
