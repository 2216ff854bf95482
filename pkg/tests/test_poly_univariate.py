import numpy as np
import numpy.polynomial.polynomial as npoly
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from intreach.poly import ZERO_POLYNOMIAL, UniPoly, coefficients, integrate_abs, real_roots, real_roots_in, sign_changes_in


def test_simple_roots_inside_interval():
    # (s - 0.5)(s - 1.5)
    roots = real_roots_in([0.75, -2.0, 1.0], 0.0, 2.0)
    assert [m for _, m in roots] == [1, 1]
    assert np.allclose([x for x, _ in roots], [0.5, 1.5], atol=1e-14)


def test_double_root_reports_multiplicity():
    roots = real_roots_in(npoly.polyfromroots([1.0, 1.0]), 0.0, 2.0)
    assert len(roots) == 1
    x, m = roots[0]
    assert m == 2 and abs(x - 1.0) < 1e-7


def test_zero_polynomial_is_a_status_not_a_list():
    assert real_roots_in([0.0, 0.0], 0.0, 1.0) is ZERO_POLYNOMIAL
    assert not ZERO_POLYNOMIAL
    assert real_roots([0.0]) is ZERO_POLYNOMIAL


def test_roots_near_endpoint_are_clamped():
    roots = real_roots_in([-1.0 - 1e-14, 1.0], 0.0, 1.0)
    assert roots == [(1.0, 1)]


def test_constant_has_no_roots():
    assert real_roots_in([3.0], -1.0, 1.0) == []


def test_empty_interval_rejected():
    with pytest.raises(ValueError):
        real_roots_in([1.0, 1.0], 1.0, 1.0)


def test_unipoly_and_trailing_zeros_accepted():
    assert np.array_equal(coefficients(UniPoly([1.0, 2.0, 0.0, 0.0])), [1.0, 2.0])
    assert len(real_roots_in(UniPoly([-1.0, 0.0, 1.0]), -2.0, 2.0)) == 2


def test_high_degree_falls_back_to_isolation():
    # degree 14 is past the companion cut-off
    rts = np.linspace(0.05, 0.95, 14)
    found = real_roots_in(npoly.polyfromroots(rts), 0.0, 1.0)
    assert np.allclose([x for x, _ in found], rts, atol=1e-8)


def test_widely_separated_roots_stay_distinct():
    # tiny leading coefficient makes the Cauchy bound huge
    c = npoly.polyfromroots([-1525.0, -13.3, -0.003, 1485.0]) * 1e-7
    assert len(real_roots(c)) == 4


def test_sign_changes_skip_even_roots():
    c = npoly.polyfromroots([0.3, 0.6, 0.6])
    assert np.allclose(sign_changes_in(c, 0.0, 1.0), [0.3])


def _separated(r):
    r = sorted(r)
    return all(b - a > 1e-3 for a, b in zip(r, r[1:]))


@given(st.lists(st.floats(-1, 1), min_size=1, max_size=5).filter(_separated))
def test_roots_match_constructed_roots(rts):
    c = npoly.polyfromroots(rts)
    found = real_roots_in(c, -1.5, 1.5)
    assert len(found) == len(rts)
    assert np.allclose(sorted(rts), [x for x, _ in found], atol=1e-6)


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=6), st.floats(0.1, 3.0))
def test_integrate_abs_matches_quadrature(c, b):
    expected, _ = quad(lambda s: abs(npoly.polyval(s, c)), 0.0, b, limit=200, epsabs=1e-12)
    assert integrate_abs(c, 0.0, b) == pytest.approx(expected, rel=1e-7, abs=1e-9)


def test_integrate_abs_known_value():
    # int_0^2 |s - 1| ds = 1
    assert integrate_abs([-1.0, 1.0], 0.0, 2.0) == pytest.approx(1.0, abs=1e-15)
    assert integrate_abs([], 0.0, 2.0) == 0.0
