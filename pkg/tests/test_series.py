from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from intreach.poly import MultiPoly, bareiss_det, hankel_det, series_exp, series_log_lambdas, symbolic_lambdas


def taylor_oracle(lam, order):
    tau = sp.Symbol("tau")
    f = sp.exp(-sum(sp.nsimplify(l) / k * tau**k for k, l in enumerate(lam, start=1)))
    ser = sp.series(f, tau, 0, order + 1).removeO()
    return [ser.coeff(tau, n) for n in range(order + 1)]


def test_series_exp_matches_taylor_expansion():
    lam = [Fraction(1, 2), Fraction(-1, 3), Fraction(2)]
    A = series_exp(lam, 5)
    assert A == [Fraction(str(v)) for v in taylor_oracle(lam, 5)]


def test_series_of_rational_function():
    # lam(k) = s^k is the power-sum form of (1 - s tau): A = (1, -s, 0, 0, ...)
    s = 0.7
    A = series_exp([s**k for k in range(1, 6)])
    assert np.allclose(A, [1.0, -s, 0, 0, 0, 0], atol=1e-15)


def test_ints_become_fractions():
    assert series_exp([1, 1], 2) == [1, Fraction(-1), Fraction(0)]
    assert isinstance(series_exp([1], 1)[1], Fraction)


@given(st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=9), min_size=1, max_size=6))
def test_log_inverts_exp(lam):
    assert series_log_lambdas(series_exp(lam)) == lam


def test_bareiss_matches_sympy_determinant():
    M = [[Fraction(2), Fraction(1), Fraction(3)], [Fraction(0), Fraction(0), Fraction(1)], [Fraction(4), Fraction(5), Fraction(6)]]
    assert bareiss_det(M) == Fraction(int(sp.Matrix(M).det()))


def test_bareiss_on_polynomials():
    V = ("x", "y")
    x, y = (MultiPoly.var(v, V) for v in V)
    assert bareiss_det([[x, y], [y, x]]) == x * x - y * y


def test_hankel_window_and_order_check():
    a = [Fraction(k) for k in range(6)]
    # det [[1,2],[2,3]] = -1
    assert hankel_det(a, 1, 2) == -1
    with pytest.raises(ValueError):
        hankel_det(a, 4, 2)
    assert hankel_det([1.0, 2.0, 3.0, 5.0], 1, 2) == pytest.approx(1.0)


def test_symbolic_lambdas_names():
    lam = symbolic_lambdas(3)
    assert [str(l) for l in lam] == ["lam1", "lam2", "lam3"]
