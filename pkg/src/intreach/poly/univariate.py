"""Dense univariate polynomials with real coefficients.

Coefficients are stored in ascending order, ``c[0] + c[1] s + ... + c[n] s^n``,
the same convention as :mod:`numpy.polynomial.polynomial`, whose ``Polynomial``
class serves as the :class:`UniPoly` type here.
"""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np
import numpy.polynomial.polynomial as npoly
from numpy.polynomial import Polynomial as UniPoly
from scipy.optimize import brentq

__all__ = [
    "UniPoly",
    "ZERO_POLYNOMIAL",
    "coefficients",
    "real_roots_in",
    "real_roots",
    "sign_changes_in",
    "integrate_abs",
]

PolyLike = Union[UniPoly, Sequence[float], np.ndarray]

_COMPANION_MAX_DEGREE = 12


class _ZeroPolynomial:
    """Status returned by root finders for the identically-zero polynomial."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "ZERO_POLYNOMIAL"

    def __bool__(self) -> bool:
        return False


ZERO_POLYNOMIAL = _ZeroPolynomial()


def coefficients(p: PolyLike) -> np.ndarray:
    """Ascending float coefficients with trailing zeros stripped (``[]`` for 0)."""
    c = np.asarray(p.coef if isinstance(p, UniPoly) else p, dtype=float).ravel()
    nz = np.flatnonzero(c)
    if nz.size == 0:
        return c[:0]
    return c[: nz[-1] + 1]


def _noise(c: np.ndarray, x: float) -> float:
    # rounding-error bound for Horner evaluation at x
    ax = abs(x)
    return 8.0 * np.finfo(float).eps * float(np.polyval(np.abs(c[::-1]), ax)) * len(c)


def _multiplicity(c: np.ndarray, x: float, limit: int) -> int:
    m = 0
    d = c
    while m < limit and d.size > 1:
        v = float(npoly.polyval(x, d))
        if abs(v) > max(_noise(d, x), 1e-9 * float(np.max(np.abs(d))) * max(1.0, abs(x)) ** (len(d) - 1)):
            break
        m += 1
        d = npoly.polyder(d)
    return max(m, 1)


def _polish(c: np.ndarray, dc: np.ndarray, x: float, iters: int = 4) -> float:
    with np.errstate(all="ignore"):
        return _newton(c, dc, x, iters)


def _newton(c: np.ndarray, dc: np.ndarray, x: float, iters: int) -> float:
    for _ in range(iters):
        f = npoly.polyval(x, c)
        g = npoly.polyval(x, dc)
        if g == 0.0 or not np.isfinite(f / g):
            break
        step = f / g
        x_new = x - step
        if abs(npoly.polyval(x_new, c)) > abs(f):
            break
        x = x_new
        if abs(step) <= 1e-16 * max(1.0, abs(x)):
            break
    return float(x)


def _cluster(xs: list[float], rel: float) -> list[tuple[float, int]]:
    # width relative to the root's own size, not the search interval
    out: list[tuple[float, int]] = []
    for x in sorted(xs):
        if out and abs(x - out[-1][0]) <= rel * max(1.0, abs(x)):
            r, m = out[-1]
            out[-1] = ((r * m + x) / (m + 1), m + 1)
        else:
            out.append((x, 1))
    return out


def _companion(c: np.ndarray, a: float, b: float, tol: float) -> list[tuple[float, int]] | None:
    with np.errstate(all="ignore"):
        try:
            z = npoly.polyroots(c)
        except np.linalg.LinAlgError:
            return None
    if not np.all(np.isfinite(z)):
        return None
    real = [float(w.real) for w in z if abs(w.imag) <= 1e-7 * max(1.0, abs(w))]
    dc = npoly.polyder(c)
    real = [_polish(c, dc, x) for x in real]
    clusters = _cluster(real, 1e-6)
    out = []
    for x, m in clusters:
        if x < a - tol or x > b + tol:
            continue
        out.append((min(max(x, a), b), m))
    return out


def _consistent(c: np.ndarray, roots: list[tuple[float, int]], a: float, b: float) -> bool:
    knots = [a] + [x for x, _ in roots] + [b]
    signs = []
    for lo, hi in zip(knots[:-1], knots[1:]):
        if hi - lo <= 0.0:
            signs.append(None)
            continue
        mid = 0.5 * (lo + hi)
        v = float(npoly.polyval(mid, c))
        signs.append(None if abs(v) <= _noise(c, mid) else (v > 0))
    # sign must flip exactly across odd-multiplicity roots
    for i, (x, m) in enumerate(roots):
        left, right = signs[i], signs[i + 1]
        if left is None or right is None or x in (a, b):
            continue
        if (left != right) != (m % 2 == 1):
            return False
    # no hidden sign change between consecutive knots
    for lo, hi in zip(knots[:-1], knots[1:]):
        if hi - lo <= 0.0:
            continue
        vl = float(npoly.polyval(lo, c))
        vh = float(npoly.polyval(hi, c))
        if abs(vl) > _noise(c, lo) and abs(vh) > _noise(c, hi) and (vl > 0) != (vh > 0):
            if not any(lo < x < hi for x, _ in roots):
                return False
    return True


def _isolate(c: np.ndarray, a: float, b: float, tol: float) -> list[tuple[float, int]]:
    """Recursive isolation: critical points split [a, b] into monotone pieces."""
    deg = len(c) - 1
    if deg == 0:
        return []
    if deg == 1:
        x = -c[0] / c[1]
        if a - tol <= x <= b + tol:
            return [(min(max(float(x), a), b), 1)]
        return []
    crit = [x for x, _ in _isolate(coefficients(npoly.polyder(c)), a, b, tol)]
    knots = sorted(set([a, *crit, b]))
    vals = [float(npoly.polyval(x, c)) for x in knots]
    found: list[tuple[float, int]] = []
    for x, v in zip(knots, vals):
        if abs(v) <= _noise(c, x):
            found.append((x, _multiplicity(c, x, deg)))
    zero_knot = [abs(v) <= _noise(c, x) for x, v in zip(knots, vals)]
    for i in range(len(knots) - 1):
        lo, hi = knots[i], knots[i + 1]
        if zero_knot[i] or zero_knot[i + 1]:
            continue
        if (vals[i] > 0) != (vals[i + 1] > 0):
            x = brentq(lambda s: npoly.polyval(s, c), lo, hi, xtol=1e-15 * max(1.0, abs(lo), abs(hi)), rtol=4 * np.finfo(float).eps)
            found.append((float(x), 1))
    found.sort()
    out: list[tuple[float, int]] = []
    for x, m in found:
        if abs(x - a) <= tol:
            x = a
        elif abs(x - b) <= tol:
            x = b
        if out and abs(out[-1][0] - x) <= tol * max(1.0, abs(x)):
            continue
        out.append((x, m))
    return out


def real_roots_in(p: PolyLike, a: float, b: float, tol: float | None = None):
    """Real roots of ``p`` in ``[a, b]`` as a sorted list of ``(root, multiplicity)``.

    Returns :data:`ZERO_POLYNOMIAL` when ``p`` vanishes identically. Roots
    within ``tol`` of an endpoint are clamped onto it. The default tolerance is
    ``1e-12 * max(1, |a|, |b|)``.
    """
    if not a < b:
        raise ValueError(f"empty interval [{a}, {b}]")
    c = coefficients(p)
    if c.size == 0:
        return ZERO_POLYNOMIAL
    if tol is None:
        tol = 1e-12 * max(1.0, abs(a), abs(b))
    if c.size == 1:
        return []
    if c.size - 1 <= _COMPANION_MAX_DEGREE:
        roots = _companion(c, a, b, tol)
        if roots is not None:
            roots = [(a if abs(x - a) <= tol else b if abs(x - b) <= tol else x, m) for x, m in roots]
            if _consistent(c, roots, a, b):
                return roots
    with np.errstate(all="ignore"):
        return _isolate(c, a, b, tol)


def real_roots(p: PolyLike):
    """All real roots of ``p`` (Cauchy bound interval), with multiplicities."""
    c = coefficients(p)
    if c.size == 0:
        return ZERO_POLYNOMIAL
    if c.size == 1:
        return []
    bound = 1.0 + float(np.max(np.abs(c[:-1]))) / abs(c[-1])
    # the bound can be huge; keep the merge tolerance at unit scale
    return real_roots_in(c, -bound, bound, tol=1e-12)


def sign_changes_in(p: PolyLike, a: float, b: float, tol: float | None = None) -> list[float]:
    """Odd-multiplicity roots strictly inside ``(a, b)``; empty for the zero polynomial."""
    roots = real_roots_in(p, a, b, tol)
    if roots is ZERO_POLYNOMIAL:
        return []
    return [x for x, m in roots if m % 2 == 1 and a < x < b]


def integrate_abs(p: PolyLike, a: float, b: float) -> float:
    """Exact ``\\int_a^b |p(s)| ds``, integrating piecewise between sign changes."""
    if b < a:
        raise ValueError(f"integrate_abs needs a <= b, got [{a}, {b}]")
    c = coefficients(p)
    if c.size == 0 or a == b:
        return 0.0
    anti = npoly.polyint(c)
    knots = [a, *sign_changes_in(c, a, b), b]
    vals = npoly.polyval(np.asarray(knots), anti)
    return float(np.sum(np.abs(np.diff(vals))))


