"""Implicit equations of the bounding hypersurfaces and membership tests.

On sheet ``sigma`` a boundary state maps affinely to coordinates

    rho(k) = n!/(2 mu) (x_k - drift_k) - (sigma (-1)^{r-1} + nu/mu) t^n / 2,   n = r-k+1,

which equal ``sigma * sum_q (-1)^{q+1} s_q^n``: alternating power sums of the
switching parameters. Hence with ``lam(k) = sigma * rho(r-k+1)`` the series
``exp(-sum lam(k)/k tau^k)`` is the rational function
``prod_{q odd}(1 - s_q tau) / prod_{q even}(1 - s_q tau)``, whose denominator
has degree ``delta = (r-1)//2``. Kronecker's criterion then makes the Hankel
determinant ``det[A(r - 2 delta + i + j)]_{i,j=0..delta}`` vanish.

The sheet sign in ``lam`` matters only for even ``r``. For odd ``r`` the
Hankel polynomial is even in ``rho``, and both sheets satisfy the same
equation in the plain coordinates.

Membership is decided by support-function duality, not by the sign of the
Hankel polynomial, because the real variety extends beyond the reach-set
boundary.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DegenerateBlockError, NonGenericLineError
from .model import BlockSpec, SystemSpec
from .poly import MultiPoly, hankel_det, real_roots, series_exp, symbolic_lambdas
from .support import center, drift, support_and_point_block_batch, support_block_batch, supporting_point_block_batch

__all__ = [
    "ImplicitSurface",
    "implicit_poly",
    "implicit_degree",
    "rho_of_state",
    "sheet_coordinates",
    "hankel_residual",
    "residual_scale",
    "implicit_in_state",
    "LineIntersections",
    "line_intersections",
    "Membership",
    "MembershipResult",
    "membership",
    "duality_margins",
    "DirectionPlan",
    "direction_plan",
]

MAX_SYMBOLIC_ORDER = 8


def implicit_degree(r: int) -> int:
    delta = (r - 1) // 2
    return (delta + 1) * (r - delta)


@dataclass(frozen=True)
class ImplicitSurface:
    """Normalized Hankel polynomial in ``rho1..rho_r``; ``poly == scale * det``."""

    r: int
    delta: int
    poly: MultiPoly
    degree: int
    scale: Fraction

    def __call__(self, coords) -> float:
        return self.poly.evaluate(list(coords))

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "delta": self.delta,
            "degree": self.degree,
            "variables": list(self.poly.variables),
            "scale": str(self.scale),
            "polynomial": str(self.poly),
            "terms": self.poly.to_json(),
        }


@lru_cache(maxsize=None)
def implicit_poly(r: int) -> ImplicitSurface:
    """Exact implicit polynomial of a chain of length ``r`` (``1 <= r <= 8``).

    Normalization: integer coefficients with content one and a positive
    coefficient on the graded-lexicographically leading term, with variables
    ordered ``rho1, ..., rho_r``.
    """
    if not isinstance(r, int) or not 1 <= r <= MAX_SYMBOLIC_ORDER:
        raise ValueError(f"symbolic implicitization supports 1 <= r <= {MAX_SYMBOLIC_ORDER}, got {r!r}")
    delta = (r - 1) // 2
    lam = symbolic_lambdas(r)
    A = series_exp(lam, r)
    det = hankel_det(A, r - 2 * delta, delta + 1)
    rho_names = tuple(f"rho{k}" for k in range(1, r + 1))
    # lam(k) -> rho(r-k+1)
    det_rho = det.rename({f"lam{k}": f"rho{r - k + 1}" for k in range(1, r + 1)}, rho_names)
    poly, scale = det_rho.normalized()
    return ImplicitSurface(r, delta, poly, poly.degree, scale)


def _rho_affine(b: BlockSpec, sheet: int, t: float):
    """``rho = gain * x + offset`` (elementwise) for block ``b`` on ``sheet``."""
    if b.mu == 0:
        raise DegenerateBlockError("degenerate block has no implicit surface")
    if sheet not in (1, -1):
        raise ValueError("sheet must be +1 or -1")
    t = float(t)
    mu, nu = float(b.mu), float(b.nu)
    n = np.arange(b.r, 0, -1)
    fact = np.array([math.factorial(k) for k in n], dtype=float)
    gain = fact / (2.0 * mu)
    offset = -gain * drift(b, t) - 0.5 * (sheet * (-1.0) ** (b.r - 1) + nu / mu) * t**n
    return gain, offset


def rho_of_state(b: BlockSpec, x_j, sheet: int, t: float) -> np.ndarray:
    """Affine coordinates ``rho(1..r)`` of a block state relative to ``sheet``."""
    gain, offset = _rho_affine(b, sheet, t)
    return gain * np.asarray(x_j, dtype=float) + offset


def sheet_coordinates(b: BlockSpec, x_j, sheet: int, t: float) -> np.ndarray:
    """Sheet-oriented coordinates ``sheet * rho``: the arguments of :func:`implicit_poly`."""
    return sheet * rho_of_state(b, x_j, sheet, t)


def hankel_residual(b: BlockSpec, x_j, sheet: int, t: float) -> float:
    """Numeric Hankel determinant; zero iff ``x_j`` lies on the sheet's hypersurface."""
    coords = sheet_coordinates(b, x_j, sheet, t)
    r = b.r
    lam = [float(coords[r - k]) for k in range(1, r + 1)]
    delta = (r - 1) // 2
    A = series_exp(lam, r)
    return hankel_det(A, r - 2 * delta, delta + 1)


def residual_scale(b: BlockSpec, x_j, sheet: int, t: float) -> float:
    """Magnitude the residual is measured against: ``max(L, t)^W`` with ``L``
    the largest ``|lam(k)|^{1/k}`` and ``W`` the polynomial's degree."""
    coords = sheet_coordinates(b, x_j, sheet, t)
    r = b.r
    L = max(abs(float(coords[r - k])) ** (1.0 / k) for k in range(1, r + 1))
    return max(L, float(t)) ** implicit_degree(r)


def implicit_in_state(b: BlockSpec, sheet: int, t) -> MultiPoly:
    """The hypersurface of ``sheet`` written in state coordinates ``x1..x_r``.

    Exact rationals throughout (float data enter through their binary value).
    """
    if b.mu == 0:
        raise DegenerateBlockError("degenerate block has no implicit surface")
    surf = implicit_poly(b.r)
    r = b.r
    xs = tuple(f"x{k}" for k in range(1, r + 1))
    F = lambda v: v if isinstance(v, Fraction) else Fraction(v)  # noqa: E731
    t_ = F(t)
    mu, nu = F(b.mu), F(b.nu)
    x0 = [F(v) for v in b.x0]
    subs = {}
    for k in range(1, r + 1):
        n = r - k + 1
        drift_k = sum(t_ ** (l - k) / math.factorial(l - k) * x0[l - 1] for l in range(k, r + 1))
        xk = MultiPoly.var(f"x{k}", xs)
        rho = (xk - drift_k) * Fraction(math.factorial(n), 2) / mu - (sheet * (-1) ** (r - 1) + nu / mu) * t_**n / 2
        subs[f"rho{k}"] = rho * sheet
    return surf.poly.substitute(subs, xs)


# line intersections --------------------------------------------------------


@dataclass(frozen=True)
class LineIntersections:
    per_sheet: tuple  # (plus, minus) distinct real intersection counts
    total: int
    roots: tuple  # (plus roots, minus roots) line parameters
    generic: bool

    def to_row(self) -> list:
        return [self.per_sheet[0], self.per_sheet[1], self.total, int(self.generic)]


def _composed(b: BlockSpec, p0, v, sheet: int, t: float) -> tuple[np.ndarray, float]:
    surf = implicit_poly(b.r)
    gain, offset = _rho_affine(b, sheet, t)
    off = sheet * (gain * np.asarray(p0, dtype=float) + offset)
    slope = sheet * gain * np.asarray(v, dtype=float)
    c = surf.poly.compose_affine(off, slope)
    scale_poly = MultiPoly(surf.poly.variables, {e: abs(k) for e, k in surf.poly.terms.items()})
    mag = float(np.sum(np.abs(scale_poly.compose_affine(np.abs(off), np.abs(slope)))))
    return c, mag


def line_intersections(b: BlockSpec, p0, v, t: float) -> LineIntersections:
    """Count real intersections of the line ``p0 + tau v`` with both sheets' hypersurfaces.

    ``generic`` is False when the line meets a hypersurface tangentially, is
    asymptotic to it (degree drop), or passes through both at one point.
    """
    v = np.asarray(v, dtype=float)
    if not np.any(v):
        raise ValueError("line direction must be nonzero")
    deg = implicit_degree(b.r)
    counts, roots_out, generic = [], [], True
    for sheet in (1, -1):
        c, mag = _composed(b, p0, v, sheet, t)
        if np.max(np.abs(c)) <= 1e-13 * max(mag, 1e-300):
            raise NonGenericLineError("non-generic line: composed polynomial vanishes identically")
        c = np.where(np.abs(c) <= 1e-15 * mag, 0.0, c)
        if abs(c[deg]) <= 1e-10 * mag:
            generic = False
        roots = real_roots(c)
        if any(m > 1 for _, m in roots):
            generic = False
        xs = [x for x, _ in roots]
        counts.append(len(xs))
        roots_out.append(tuple(xs))
    for x in roots_out[0]:
        if any(abs(x - y) <= 1e-9 * max(1.0, abs(x)) for y in roots_out[1]):
            generic = False
    return LineIntersections(tuple(counts), sum(counts), tuple(roots_out), generic)


# duality membership ---------------------------------------------------------


class Membership(enum.Enum):
    INSIDE = "inside"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class DirectionPlan:
    """Unit directions for the coarse duality sweep and their covering radius."""

    directions: np.ndarray
    covering: float


@lru_cache(maxsize=32)
def direction_plan(r: int, n: int | None = None, seed: int = 20211) -> DirectionPlan:
    if r == 1:
        return DirectionPlan(np.array([[1.0], [-1.0]]), 0.0)
    if r == 2:
        n = n or 1024
        th = (np.arange(n) + 0.5) * (2 * np.pi / n)
        return DirectionPlan(np.column_stack([np.cos(th), np.sin(th)]), 2.0 * math.sin(math.pi / (2 * n)))
    rng = np.random.Generator(np.random.Philox(seed))
    n = n or 600 * 4 ** (r - 3)
    if r == 3:
        # Fibonacci lattice on the sphere
        i = np.arange(n) + 0.5
        phi = np.arccos(1 - 2 * i / n)
        th = np.pi * (1 + 5**0.5) * i
        D = np.column_stack([np.cos(th) * np.sin(phi), np.sin(th) * np.sin(phi), np.cos(phi)])
    else:
        D = rng.normal(size=(n, r))
        D /= np.linalg.norm(D, axis=1, keepdims=True)
    D = np.vstack([D, np.eye(r), -np.eye(r)])
    probe = rng.normal(size=(20000, r))
    probe /= np.linalg.norm(probe, axis=1, keepdims=True)
    cover = 0.0
    for lo in range(0, probe.shape[0], 2000):
        P = probe[lo : lo + 2000]
        cover = max(cover, float(np.sqrt(np.maximum(2.0 - 2.0 * (P @ D.T).max(axis=1), 0.0)).max()))
    return DirectionPlan(D, 1.25 * cover)


def _g(b: BlockSpec, X: np.ndarray, Y: np.ndarray, t: float) -> np.ndarray:
    return support_block_batch(b, Y, t) - np.einsum("ij,ij->i", X, Y)


class _Frame:
    """``g`` seen through a linear change of coordinates ``x' = T (x - c)``.

    With ``z = T^T y'`` the transformed objective is ``h(z) - <z, x>``; it has
    the sign of ``g`` at ``z / |z|`` and its gradient is ``T (sp(z) - x)``.
    """

    def __init__(self, b: BlockSpec, t: float, T: np.ndarray):
        self.b, self.t, self.T = b, t, T

    def value(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        return _g(self.b, X, Y @ self.T, self.t)

    def value_grad(self, X: np.ndarray, Y: np.ndarray):
        Z = Y @ self.T
        h, P = support_and_point_block_batch(self.b, Z, self.t)
        return h - np.einsum("ij,ij->i", X, Z), (P - X) @ self.T.T

    def to_original(self, Y: np.ndarray) -> np.ndarray:
        Z = Y @ self.T
        return Z / np.linalg.norm(Z, axis=1, keepdims=True)


def _unit(Y: np.ndarray) -> np.ndarray:
    return Y / np.linalg.norm(Y, axis=-1, keepdims=True)


def _descend(frame: _Frame, X: np.ndarray, Y: np.ndarray, iters: int = 200, gtol: float = 1e-10):
    """Projected gradient descent on the unit sphere with per-point backtracking."""
    n = Y.shape[0]
    f, G = frame.value_grad(X, Y)
    eta = np.full(n, 0.5)
    active = np.ones(n, dtype=bool)
    # below this predicted decrease the objective is rounding noise
    floor = 1e-14 * (1.0 + np.linalg.norm(X, axis=1) * np.linalg.norm(frame.T, 2))
    for _ in range(iters):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        Ya, Ga = Y[idx], G[idx]
        Gt = Ga - np.einsum("ij,ij->i", Ga, Ya)[:, None] * Ya
        gn = np.linalg.norm(Gt, axis=1)
        done = gn <= gtol * (1.0 + np.abs(f[idx]))
        Yn = _unit(Ya - eta[idx, None] * Gt)
        fn, Gn = frame.value_grad(X[idx], Yn)
        ok = (fn <= f[idx] - 1e-4 * eta[idx] * gn**2) & ~done
        acc = idx[ok]
        Y[acc], f[acc], G[acc] = Yn[ok], fn[ok], Gn[ok]
        eta[acc] = np.minimum(eta[acc] * 2.0, 4.0)
        bad = ~ok & ~done
        rej = idx[bad]
        eta[rej] *= 0.25
        active[idx[done]] = False
        active[rej[eta[rej] * gn[bad] ** 2 < floor[rej]]] = False
    return f, Y


def _compass(frame: _Frame, X: np.ndarray, Y: np.ndarray, gY: np.ndarray, step0: float, iters: int = 80):
    """Pattern search on the unit sphere, all points in lock-step; copes with kinks."""
    n, r = Y.shape
    Y, gY = Y.copy(), gY.copy()
    step = np.full(n, step0)
    eye = np.eye(r)
    for _ in range(iters):
        idx = np.flatnonzero(step > 1e-12)
        if idx.size == 0:
            break
        Ya = Y[idx]
        T = eye[None, :, :] - Ya[:, :, None] * Ya[:, None, :]  # rows: projected axes
        T /= np.maximum(np.linalg.norm(T, axis=2, keepdims=True), 1e-300)
        cand = np.concatenate([Ya[:, None, :] + step[idx, None, None] * T, Ya[:, None, :] - step[idx, None, None] * T], axis=1)
        cand = _unit(cand)
        k = cand.shape[1]
        gc = frame.value(np.repeat(X[idx], k, axis=0), cand.reshape(-1, r)).reshape(-1, k)
        best = gc.argmin(axis=1)
        gbest = gc[np.arange(idx.size), best]
        better = gbest < gY[idx]
        upd = idx[better]
        Y[upd] = cand[np.flatnonzero(better), best[better]]
        gY[upd] = gbest[better]
        step[idx[~better]] *= 0.5
    return gY, Y


def _local_min(frame: _Frame, X: np.ndarray, Y: np.ndarray):
    f, Y = _descend(frame, X, Y.copy())
    # gradient steps stop near kinks; a short pattern search finishes the job
    return _compass(frame, X, Y, f, 1e-4, iters=40)


def _whitener(b: BlockSpec, t: float, D: np.ndarray) -> np.ndarray:
    """``T`` with ``T (K - c)`` roughly round: inverse Cholesky factor of the
    covariance of the supporting points along ``D``."""
    P = supporting_point_block_batch(b, D, t)
    C = np.cov(P.T).reshape(b.r, b.r)
    C += 1e-14 * np.trace(C) * np.eye(b.r)
    L = np.linalg.cholesky(C)
    return np.linalg.inv(L)


def duality_margins(
    b: BlockSpec,
    X,
    t: float,
    plan: DirectionPlan | None = None,
    refine: bool | str = True,
    chunk: int = 4096,
    starts: int = 3,
) -> tuple[np.ndarray, np.ndarray]:
    """``min_{|y|=1} h(y) - <y, x>`` for each row of ``X`` and the minimizing directions.

    Positive inside, zero on the boundary, minus the distance to the set
    outside. The search runs in whitened coordinates, where the set is
    roughly round and the objective well conditioned; a linear change of
    coordinates keeps the sign of the objective. A coarse sweep over
    ``plan`` bounds the minimum from above, and its Lipschitz constant times
    the plan's covering radius says which points the sweep cannot decide.
    Those get a local search from the best few sweep directions, and the
    result is polished in the original metric.

    ``refine``: ``True`` polishes every point. ``"band"`` polishes only
    undecided points and leaves upper bounds elsewhere (signs are exact).
    ``"sign"`` additionally skips points already shown to be outside, and
    their margins are upper bounds with the right sign. ``False`` returns the
    coarse sweep in whitened coordinates mapped back to the original metric.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n, r = X.shape
    t = float(t)
    c = center(b, t)
    if b.mu == 0 or t == 0.0:
        diff = X - c
        dist = np.linalg.norm(diff, axis=1)
        Y = np.where(dist[:, None] > 0, diff / np.maximum(dist, 1e-300)[:, None], np.eye(r)[0])
        return -dist, Y
    if r == 1:
        D = np.array([[1.0], [-1.0]])
        G = support_block_batch(b, D, t)[None, :] - X @ D.T
        k = G.argmin(axis=1)
        return G[np.arange(n), k], D[k]
    plan = plan or direction_plan(r)
    D = plan.directions
    frame = _Frame(b, t, _whitener(b, t, D))
    plain = _Frame(b, t, np.eye(r))
    Z = D @ frame.T
    hD = support_block_batch(b, Z, t)
    # Lipschitz bound of the whitened objective: |x'| + radius of T(K - c)
    Tc = frame.T @ c
    radius = float(np.linalg.norm(support_block_batch(b, frame.T, t) - Tc))
    lip = np.linalg.norm(X @ frame.T.T - Tc, axis=1) + radius
    k0 = min(starts, D.shape[0])
    coarse = np.empty(n)
    top = np.empty((n, k0), dtype=int)
    for lo in range(0, n, chunk):
        G = hD[None, :] - X[lo : lo + chunk] @ Z.T
        part = np.argpartition(G, k0 - 1, axis=1)[:, :k0]
        order = np.take_along_axis(G, part, axis=1).argsort(axis=1)
        top[lo : lo + chunk] = np.take_along_axis(part, order, axis=1)
        coarse[lo : lo + chunk] = G[np.arange(G.shape[0]), top[lo : lo + chunk, 0]]
    best_w = D[top[:, 0]].copy()
    if refine is True or refine == "all":
        pending = np.arange(n)
    elif refine in ("band", "sign"):
        band = coarse < lip * plan.covering
        if refine == "sign":
            band &= coarse >= 0.0
        pending = np.flatnonzero(band)
    elif not refine:
        pending = np.empty(0, dtype=int)
    else:
        raise ValueError(f"unknown refine mode {refine!r}")
    if pending.size:
        Xt = X[pending]
        gw = coarse[pending].copy()
        yw = best_w[pending]
        for k in range(k0):
            f, Yk = _local_min(frame, Xt, D[top[pending, k]])
            better = f < gw
            gw[better], yw[better] = f[better], Yk[better]
        best_w[pending] = yw
    Y = frame.to_original(best_w)
    margins = _g(b, X, Y, t)
    if pending.size and refine != "sign":
        Xt = X[pending]
        # polish in the original metric from the mapped optimum and from the plain sweep
        G0 = support_block_batch(b, D, t)[None, :] - Xt @ D.T
        for Y0 in (Y[pending], D[G0.argmin(axis=1)]):
            f, Yp = _local_min(plain, Xt, Y0)
            better = f < margins[pending]
            margins[pending[better]] = f[better]
            Y[pending[better]] = Yp[better]
    return margins, Y


@dataclass(frozen=True)
class MembershipResult:
    overall: Membership
    blocks: tuple
    margins: tuple
    tol: float


def classify(margin: float, tol: float) -> Membership:
    if margin > tol:
        return Membership.INSIDE
    if margin < -tol:
        return Membership.OUTSIDE
    return Membership.BOUNDARY


def membership(spec: SystemSpec, x, t: float | None = None, tol: float | None = None) -> MembershipResult:
    """Classify a state as inside, on the boundary of, or outside the reach set.

    The default tolerance is ``1e-7 * (1 + |x|)``. The set is a Cartesian
    product, so the state is outside if any block is, on the boundary if no
    block is outside but some block is on its boundary, and inside otherwise.
    """
    t = float(spec.t if t is None else t)
    x = np.asarray(x, dtype=float)
    if tol is None:
        tol = 1e-7 * (1.0 + float(np.linalg.norm(x)))
    labels, margins = [], []
    for b, xj in zip(spec.blocks, spec.split(x)):
        m, _ = duality_margins(b, xj[None, :], t)
        margins.append(float(m[0]))
        labels.append(classify(float(m[0]), tol))
    if Membership.OUTSIDE in labels:
        overall = Membership.OUTSIDE
    elif Membership.BOUNDARY in labels:
        overall = Membership.BOUNDARY
    else:
        overall = Membership.INSIDE
    return MembershipResult(overall, tuple(labels), tuple(margins), tol)
