"""Closed-form support function of the integrator reach set.

For a block of length ``r`` the input enters through
``xi(s) = (s^{r-1}/(r-1)!, ..., s, 1)`` with ``s`` the time-to-go, and

    h_j(y) = <y, e^{tA} x0 + nu * zeta(0, t)> + mu * int_0^t |<y, xi(s)>| ds.

``<y, xi(s)>`` is a polynomial of degree ``r - 1`` in ``s`` whose ascending
coefficients are ``y[r-1-n] / n!``, so the integral is computed exactly from
its sign changes. The full support function sums over blocks.
"""

from __future__ import annotations

import math

import numpy as np
import numpy.polynomial.polynomial as npoly

from .errors import FaceNotVertexError
from .model import BlockSpec, SystemSpec
from .poly import integrate_abs, sign_changes_in

__all__ = [
    "xi",
    "zeta",
    "drift",
    "center",
    "direction_poly",
    "support_block",
    "support",
    "supporting_point_block",
    "supporting_point",
    "support_block_batch",
    "supporting_point_block_batch",
    "support_and_point_block_batch",
    "support_batch",
]


def _inv_factorials(r: int) -> np.ndarray:
    return np.array([1.0 / math.factorial(n) for n in range(r + 1)])


def xi(r: int, s: float) -> np.ndarray:
    """``(s^{r-1}/(r-1)!, ..., s, 1)``."""
    n = np.arange(r - 1, -1, -1)
    return np.array([s**k / math.factorial(k) for k in n], dtype=float)


def zeta(r: int, t1: float, t2: float) -> np.ndarray:
    """Entry-wise integral of ``xi`` over ``[t1, t2]``: ``(t2^n - t1^n)/n!`` with ``n = r-k+1``."""
    n = np.arange(r, 0, -1)
    return np.array([(t2**k - t1**k) / math.factorial(k) for k in n], dtype=float)


def drift(b: BlockSpec, t: float) -> np.ndarray:
    """Free response ``e^{tA} x0`` using the upper-triangular entries ``t^{l-k}/(l-k)!``."""
    x0 = b.x0_array
    out = np.empty(b.r)
    for k in range(b.r):
        out[k] = sum(t ** (l - k) / math.factorial(l - k) * x0[l] for l in range(k, b.r))
    return out


def center(b: BlockSpec, t: float) -> np.ndarray:
    """Endpoint under the midpoint input ``u = nu``; the centre of symmetry of the block set."""
    return drift(b, t) + float(b.nu) * zeta(b.r, 0.0, t)


def direction_poly(y_j) -> np.ndarray:
    """Ascending coefficients of ``s -> <y_j, xi(s)>``."""
    y_j = np.asarray(y_j, dtype=float)
    r = y_j.shape[-1]
    return y_j[..., ::-1] * _inv_factorials(r - 1)


def support_block(b: BlockSpec, y_j, t: float) -> float:
    y_j = np.asarray(y_j, dtype=float)
    if y_j.shape != (b.r,):
        raise ValueError(f"direction block has shape {y_j.shape}, expected ({b.r},)")
    t = float(t)
    lin = float(y_j @ center(b, t))
    if t == 0.0 or b.mu == 0:
        return lin
    return lin + float(b.mu) * integrate_abs(direction_poly(y_j), 0.0, t)


def support(spec: SystemSpec, y, t: float | None = None) -> float:
    """Support function ``h_R(y)`` of the whole reach set (sum over blocks)."""
    t = float(spec.t if t is None else t)
    return float(sum(support_block(b, yj, t) for b, yj in zip(spec.blocks, spec.split(y))))


def _piece_signs(c: np.ndarray, knots: list[float]) -> list[float]:
    signs = []
    for lo, hi in zip(knots[:-1], knots[1:]):
        v = npoly.polyval(0.5 * (lo + hi), c)
        signs.append(1.0 if v >= 0 else -1.0)
    return signs


def supporting_point_block(b: BlockSpec, y_j, t: float) -> np.ndarray:
    """Endpoint of the bang-bang input ``u = beta`` where ``<y, xi> >= 0``, else ``alpha``."""
    y_j = np.asarray(y_j, dtype=float)
    if not np.any(y_j):
        raise FaceNotVertexError("face not a vertex: zero direction in block")
    t = float(t)
    x = center(b, t)
    if t == 0.0 or b.mu == 0:
        return x
    c = direction_poly(y_j)
    knots = [0.0, *sign_changes_in(c, 0.0, t), t]
    for sgn, lo, hi in zip(_piece_signs(c, knots), knots[:-1], knots[1:]):
        x = x + sgn * float(b.mu) * zeta(b.r, lo, hi)
    return x


def supporting_point(spec: SystemSpec, y, t: float | None = None) -> np.ndarray:
    t = float(spec.t if t is None else t)
    parts = []
    for j, (b, yj) in enumerate(zip(spec.blocks, spec.split(y))):
        try:
            parts.append(supporting_point_block(b, yj, t))
        except FaceNotVertexError:
            raise FaceNotVertexError(f"face not a vertex in block {j}") from None
    return np.concatenate(parts)


# batched evaluation ------------------------------------------------------
#
# Many directions at once. Roots come from stacked companion matrices; every
# root's real part (clipped to [0, t]) becomes a knot. Extra knots are harmless
# because splitting a piece where p keeps its sign leaves sum |int| unchanged.


def _batch_knots(C: np.ndarray, t: float) -> np.ndarray:
    n, width = C.shape
    deg = width - 1
    knots = np.zeros((n, deg + 2))
    knots[:, -1] = t
    if deg == 0:
        return knots
    nz = C != 0
    eff = np.where(nz.any(axis=1), width - 1 - np.argmax(nz[:, ::-1], axis=1), 0)
    for d in range(1, deg + 1):
        rows = np.flatnonzero(eff == d)
        if rows.size == 0:
            continue
        lead = C[rows, d]
        comp = np.zeros((rows.size, d, d))
        comp[:, 0, :] = -C[rows, d - 1 :: -1][:, :d] / lead[:, None]
        if d > 1:
            idx = np.arange(d - 1)
            comp[:, idx + 1, idx] = 1.0
        roots = np.linalg.eigvals(comp).real
        knots[rows, 1 : d + 1] = np.clip(roots, 0.0, t)
    knots[:, 1:-1] = np.sort(knots[:, 1:-1], axis=1)
    return knots


def _batch_pieces(Y: np.ndarray, t: float):
    C = direction_poly(Y)
    knots = _batch_knots(C, t)
    anti = np.concatenate([np.zeros((C.shape[0], 1)), C / np.arange(1, C.shape[1] + 1)], axis=1)
    # Horner on the antiderivative at every knot
    vals = np.zeros_like(knots)
    for k in range(anti.shape[1] - 1, -1, -1):
        vals = vals * knots + anti[:, k : k + 1]
    return knots, np.diff(vals, axis=1)


def support_block_batch(b: BlockSpec, Y, t: float) -> np.ndarray:
    """``support_block`` for every row of ``Y`` (shape ``(n, r)``)."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    t = float(t)
    lin = Y @ center(b, t)
    if t == 0.0 or b.mu == 0:
        return lin
    _, pieces = _batch_pieces(Y, t)
    return lin + float(b.mu) * np.abs(pieces).sum(axis=1)


def supporting_point_block_batch(b: BlockSpec, Y, t: float) -> np.ndarray:
    """Supporting points for every row of ``Y``; rows with ``Y = 0`` get the centre."""
    return support_and_point_block_batch(b, Y, t)[1]


def support_and_point_block_batch(b: BlockSpec, Y, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Support values and supporting points together, sharing one root computation."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    t = float(t)
    c = center(b, t)
    base = np.broadcast_to(c, Y.shape).copy()
    if t == 0.0 or b.mu == 0:
        return Y @ c, base
    knots, pieces = _batch_pieces(Y, t)
    sgn = np.where(pieces >= 0, 1.0, -1.0)
    sgn[~np.any(Y, axis=1)] = 0.0
    n = np.arange(b.r, 0, -1)
    fact = np.array([math.factorial(k) for k in n], dtype=float)
    # zeta over each piece: (hi^n - lo^n)/n!
    pw = knots[:, :, None] ** n[None, None, :] / fact
    seg = np.diff(pw, axis=1)
    h = Y @ c + float(b.mu) * np.abs(pieces).sum(axis=1)
    return h, base + float(b.mu) * np.einsum("ij,ijk->ik", sgn, seg)


def support_batch(spec: SystemSpec, Y, t: float | None = None) -> np.ndarray:
    t = float(spec.t if t is None else t)
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    return sum(support_block_batch(b, Yj, t) for b, Yj in zip(spec.blocks, spec.split(Y)))
