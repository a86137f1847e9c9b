import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plapaudit import exponents as ex
from plapaudit.errors import AdmissibilityError, DomainError


def _exact_window_terms(n, p, variant):
    # rational recomputation of the min-list at rational (n, p)
    n, p = Fraction(n), Fraction(p)
    a = (p - 1) / p * n
    decay_den = a + 2 if variant == "displayed" else a + p + 1 / p
    terms = {
        "m-positive": (p - 1) / p,
        "hoelder-split": 1 / (2 * p),
        "gradient-growth": (p - 1) / p * (n - p),
        "decay-positive": (2 * p - 1) * (n - p) / (p * p * decay_den),
    }
    Q = 3 * p * p - 2 * (n + 1) * p + n
    if Q < 0:
        c = 3 * p - (n + 1)
        terms["negative-q"] = -Q / (p * (c / (2 * p) + 1 if variant == "displayed" else 2 * p * c + 1))
    return terms


def test_case_examples():
    assert ex.case_quadratic(4, 2.0) == -4.0
    assert ex.classify_case(4, 2.0).tag == ex.CASE_I
    assert ex.case_quadratic(10, 8.0) == 26.0
    assert ex.classify_case(10, 8.0).tag == ex.CASE_II
    t = (11 + math.sqrt(91)) / 3
    info = ex.classify_case(10, t)
    assert abs(info.quadratic) <= 1e-12 and info.tag == ex.CASE_II


def test_threshold_n2():
    assert ex.case_threshold(2) == pytest.approx(1 + 1 / math.sqrt(3), abs=1e-15)
    assert ex.case_threshold(2) == pytest.approx(1.577, abs=1e-3)


def test_classify_rejects_outside_region():
    with pytest.raises(DomainError):
        ex.classify_case(5, 1.5)
    assert ex.classify_case(5, 1.5, check_region=False).tag == ex.CASE_I


def test_window_n4_p2():
    w = ex.eps0_window(4, 2.0)
    expected = _exact_window_terms(4, 2, "displayed")
    assert expected["negative-q"] == Fraction(8, 5)
    for key, val in expected.items():
        assert w.terms[key] == pytest.approx(float(val), rel=1e-15)
    assert w.eps0_max == 0.25 and w.binding_term == "hoelder-split"


def test_window_n10_p8_case_ii():
    w = ex.eps0_window(10, 8.0)
    assert "negative-q" not in w.terms
    assert w.eps0_max == min(w.terms.values()) > 0
    assert w.binding_term == "decay-positive"
    assert ex.s_exponent(10, 8.0, w.eps0_max / 2) > 0


@pytest.mark.parametrize("n,p", [(3, 1.5), (6, 2.5), (9, 7.25), (2, 1.75)])
@pytest.mark.parametrize("variant", ex.VARIANTS)
def test_window_terms_rational(n, p, variant):
    terms = ex.window_terms(n, p, ex.classify_case(n, p).tag, variant)
    exact = _exact_window_terms(n, p, variant)
    assert set(terms) == set(exact)
    for key in exact:
        assert terms[key] == pytest.approx(float(exact[key]), rel=1e-14)


def test_s_examples():
    assert ex.s_exponent(4, 2.0, 0.1) == pytest.approx(0.4, abs=1e-15)
    n, p = 10, 8.0
    limit = (2 * p - 1) * (n - p) / (p * p * (p - 1))
    assert ex.s_formula(n, p, 1e-12, ex.CASE_II) == pytest.approx(limit, rel=1e-9)
    with pytest.raises(AdmissibilityError):
        ex.s_exponent(4, 2.0, 0.3)


def test_q_sign_in_both_cases():
    pi = ex.exponent_profile(4, 2.0)
    assert pi.case_tag == ex.CASE_I and -pi.a - 1 < pi.q < 0 and pi.q_sign_ok
    pii = ex.exponent_profile(10, 8.0)
    assert pii.case_tag == ex.CASE_II and pii.q > 0


def test_algebra_n4_p2():
    audit = ex.audit_exponent_algebra(4, 2.0, 0.1)
    assert audit.residuals["flux-growth"] <= 1e-14
    for key in ex.EXACT_IDENTITIES:
        assert audit.residuals[key] <= 1e-14


def test_flux_growth_at_zero():
    # eps0 = 0: (n-a-1)(p-1)/p + n/p + p~ = 2 - 1/p
    for n, p in ((4, 2.0), (7, 3.5), (3, 2.5)):
        a = (p - 1) / p * n
        lhs = (n - a - 1) * (p - 1) / p + n / p + ex.p_tilde(n, p, 0.0)
        assert lhs == pytest.approx(2 - 1 / p, abs=1e-14)


def test_simplified_volume_growth_off_by_eps0():
    for n, p in ((4, 2.0), (10, 8.0), (6, 5.0)):
        e = 0.5 * ex.eps0_window(n, p).eps0_max
        audit = ex.audit_exponent_algebra(n, p, e)
        assert audit.residuals["volume-growth"] == pytest.approx(e, rel=1e-9)
        assert audit.residuals["volume-growth-corrected"] <= 1e-12


@given(n=st.integers(2, 10), frac=st.floats(0.0, 0.999), efrac=st.floats(0.0, 0.999))
@settings(max_examples=300, deadline=None)
def test_exact_identities_sweep(n, frac, efrac):
    # residuals are absolute and the terms grow like 1/(p-1); stay on the scan grid
    lo = max((n + 1) / 3, 1.0 + 1e-3)
    p = lo + frac * (n - lo)
    e = efrac * ex.eps0_window(n, p).eps0_max
    audit = ex.audit_exponent_algebra(n, p, e)
    assert max(audit.residuals[k] for k in ex.EXACT_IDENTITIES) <= 1e-11


@given(n=st.integers(2, 10), frac=st.floats(0.0, 0.999), efrac=st.floats(0.01, 0.99))
@settings(max_examples=300, deadline=None)
def test_derived_window_keeps_q_sign_and_rate(n, frac, efrac):
    lo = max((n + 1) / 3, 1.0 + 1e-6)
    p = lo + frac * (n - lo)
    w = ex.eps0_window(n, p, "derived")
    pr = ex.exponent_profile(n, p, efrac * w.eps0_max, variant="derived")
    assert pr.q_sign_ok
    assert pr.s > 0 and pr.s_corrected > 0


def test_displayed_window_admits_wrong_q_sign():
    # just inside case (i) near the threshold the displayed bound is too loose
    n = 4
    p = ex.case_threshold(n) - 1e-3
    pr = ex.exponent_profile(n, p, variant="displayed")
    assert pr.case_tag == ex.CASE_I and pr.q > 0 and "q-sign" in pr.violations
    assert ex.exponent_profile(n, p, variant="derived").q_sign_ok


def test_region_scan_small():
    scan = ex.scan_admissible_region((2, 3), resolution=1e-2, variant="derived")
    assert scan.points > 0 and scan.violation_counts == {}
    lo, hi = scan.case_split(2)
    assert lo < ex.case_threshold(2) <= hi
    assert scan.max_algebra_residual(ex.EXACT_IDENTITIES) <= 1e-11
    text = scan.to_csv()
    assert text.splitlines()[0] == ",".join(ex.REGION_COLUMNS)
    assert len(text.splitlines()) == scan.points + 1


def test_p_grid_bounds():
    g = ex.p_grid(5, 1e-2)
    assert g[0] >= 2.0 and g[-1] < 5.0
    assert np.all(np.diff(g) > 0)


def test_boundary_probe_flags():
    rows = ex.boundary_probe(5)
    assert rows and all(r["below_lower_limit"] for r in rows)
    assert ex.boundary_probe(2) == []
