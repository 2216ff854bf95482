"""Polynomial kernel: univariate real roots and |p| integrals, exact
multivariate polynomials, power-series exponentials and Hankel determinants."""

from .multivariate import MultiPoly
from .series import bareiss_det, hankel_det, series_exp, series_log_lambdas, symbolic_lambdas
from .univariate import (
    ZERO_POLYNOMIAL,
    UniPoly,
    coefficients,
    integrate_abs,
    real_roots,
    real_roots_in,
    sign_changes_in,
)

__all__ = [
    "MultiPoly",
    "UniPoly",
    "ZERO_POLYNOMIAL",
    "bareiss_det",
    "coefficients",
    "hankel_det",
    "integrate_abs",
    "real_roots",
    "real_roots_in",
    "series_exp",
    "series_log_lambdas",
    "sign_changes_in",
    "symbolic_lambdas",
]
