"""Truncated power-series exponentials and Hankel determinants.

The exponential of a polynomial without constant term, written in power-sum
form ``F(tau) = exp(-sum_k lam[k]/k tau^k)``, has coefficients ``A`` obeying
``n A(n) = -sum_{k=1}^{n} lam[k] A(n-k)`` (from ``F' = F * L'``). The same
recurrence runs over floats, Fractions or :class:`MultiPoly` entries.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

from .multivariate import MultiPoly

__all__ = ["series_exp", "series_log_lambdas", "symbolic_lambdas", "hankel_det", "bareiss_det"]


def _one_like(x):
    if isinstance(x, MultiPoly):
        return MultiPoly.constant(1, x.variables)
    if isinstance(x, (int, Fraction)):
        return Fraction(1)
    return 1.0


def _zero_like(x):
    return _one_like(x) * 0


def series_exp(lam: Sequence, order: int | None = None) -> list:
    """Coefficients ``A[0..order]`` of ``exp(-sum_k lam[k-1]/k tau^k)``.

    ``lam[k-1]`` holds the k-th power-sum coefficient; missing entries beyond
    ``len(lam)`` count as zero. ``A[0]`` is always one.
    """
    if order is None:
        order = len(lam)
    if order < 1:
        raise ValueError("series order must be >= 1")
    if len(lam) == 0:
        raise ValueError("need at least one coefficient")
    proto = lam[0]
    A = [_one_like(proto)]
    for n in range(1, order + 1):
        acc = _zero_like(proto)
        for k in range(1, min(n, len(lam)) + 1):
            acc = acc + lam[k - 1] * A[n - k]
        A.append(acc * (-Fraction(1, n)) if not isinstance(acc, float) else -acc / n)
    return A


def series_log_lambdas(A: Sequence) -> list:
    """Invert :func:`series_exp` term by term through the logarithmic derivative."""
    if len(A) < 2:
        return []
    lam: list = []
    for n in range(1, len(A)):
        acc = A[n] * n
        for k in range(1, n):
            acc = acc + lam[k - 1] * A[n - k]
        lam.append(-acc)
    return lam


def symbolic_lambdas(r: int, prefix: str = "lam") -> list[MultiPoly]:
    names = [f"{prefix}{k}" for k in range(1, r + 1)]
    return [MultiPoly.var(n, names) for n in names]


def bareiss_det(M: list[list]):
    """Fraction-free determinant (Bareiss) for exact entries."""
    n = len(M)
    if n == 0:
        return Fraction(1)
    M = [list(row) for row in M]
    sign = 1
    prev = _one_like(M[0][0])
    for k in range(n - 1):
        if _is_zero(M[k][k]):
            swap = next((i for i in range(k + 1, n) if not _is_zero(M[i][k])), None)
            if swap is None:
                return _zero_like(M[0][0])
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = M[i][j] * M[k][k] - M[i][k] * M[k][j]
                M[i][j] = num.exact_div(prev) if isinstance(num, MultiPoly) else num / prev
        prev = M[k][k]
    det = M[n - 1][n - 1]
    return det if sign > 0 else -det


def _is_zero(x) -> bool:
    return x.is_zero() if isinstance(x, MultiPoly) else x == 0


def hankel_det(a: Sequence, start: int, size: int):
    """Determinant of the ``size x size`` Hankel matrix ``[a[start+i+j]]``.

    Exact (Bareiss) for Fraction/int/MultiPoly entries, LU for floats.
    """
    if size < 1:
        raise ValueError("Hankel size must be >= 1")
    last = start + 2 * (size - 1)
    if start < 0 or last >= len(a):
        raise ValueError(f"series order {len(a) - 1} too small for Hankel window ending at {last}")
    M = [[a[start + i + j] for j in range(size)] for i in range(size)]
    if all(isinstance(x, float) or isinstance(x, np.floating) for row in M for x in row):
        return float(np.linalg.det(np.array(M, dtype=float)))
    return bareiss_det(M)
