"""Trajectory endpoints, Monte Carlo clouds, containment audits, volumes and
over-approximation gaps.

Everything random draws from ``numpy.random.Generator(Philox(seed))``; work
that is split into chunks gets child streams spawned from one
``SeedSequence`` so results do not depend on the thread count
(``REACH_THREADS``).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .boundary import boundary_points
from .errors import SpecError
from .implicit import duality_margins
from .model import InputSet, SystemSpec
from .support import center, drift, support_batch, support_block_batch

__all__ = [
    "InputSchedule",
    "simulate_endpoint",
    "bang_bang_schedule",
    "sample_input_set",
    "random_cloud",
    "CloudReport",
    "containment_audit",
    "BlockVolume",
    "VolumeEstimate",
    "mc_volume",
    "boundary_polygon",
    "shoelace_area",
    "GapReport",
    "overapprox_gap",
    "thread_count",
]


def thread_count() -> int:
    try:
        n = int(os.environ.get("REACH_THREADS", "1"))
    except ValueError:
        return 1
    return max(1, n)


def _map(fn, items):
    n = thread_count()
    if n == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def _rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _zeta_rows(r: int, lo, hi) -> np.ndarray:
    """``zeta(r, lo_k, hi_k)`` for arrays of time-to-go intervals; shape ``(K, r)``."""
    n = np.arange(r, 0, -1)
    fact = np.array([math.factorial(k) for k in n], dtype=float)
    lo = np.asarray(lo, dtype=float)[:, None]
    hi = np.asarray(hi, dtype=float)[:, None]
    return (hi**n - lo**n) / fact


# schedules ------------------------------------------------------------------


@dataclass(frozen=True)
class InputSchedule:
    """Piecewise-constant input: ``values[k]`` is applied on ``[breakpoints[k], breakpoints[k+1])``."""

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float).ravel()
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)
        if bp.size < 2:
            raise SpecError("schedule needs at least one segment")
        if vals.shape[0] != bp.size - 1:
            raise SpecError(f"{bp.size - 1} segments but {vals.shape[0]} input values")
        if np.any(np.diff(bp) <= 0):
            raise SpecError("schedule breakpoints must be strictly increasing")

    @classmethod
    def constant(cls, u, t) -> "InputSchedule":
        return cls(np.array([0.0, float(t)]), np.atleast_2d(np.asarray(u, dtype=float)))

    def validate(self, spec: SystemSpec, t: float | None = None) -> None:
        t = float(spec.t if t is None else t)
        tol = 1e-12 * max(1.0, t)
        if self.breakpoints[0] != 0.0 or abs(self.breakpoints[-1] - t) > tol:
            raise SpecError(f"schedule must cover [0, {t}], got [{self.breakpoints[0]}, {self.breakpoints[-1]}]")
        if self.values.shape[1] != spec.m:
            raise SpecError(f"schedule has {self.values.shape[1]} inputs, system has {spec.m}")
        for j, b in enumerate(spec.blocks):
            lo, hi = float(b.alpha), float(b.beta)
            slack = 1e-12 * max(1.0, abs(lo), abs(hi))
            col = self.values[:, j]
            if np.any(col < lo - slack) or np.any(col > hi + slack):
                raise SpecError(f"input {j} leaves [{lo}, {hi}]")
        if spec.input_set is not None and spec.input_set.kind == "lp":
            u = spec.input_set
            c = np.array([float(v) for v in u.center])
            norms = np.linalg.norm(self.values - c, ord=u.p, axis=1)
            if np.any(norms > float(u.radius) * (1 + 1e-12) + 1e-15):
                raise SpecError("schedule value outside the input ball")


def simulate_endpoint(spec: SystemSpec, sched: InputSchedule, t: float | None = None) -> np.ndarray:
    """Exact state at ``t``: free response plus one ``zeta`` term per segment.

    Segment ``[t_{k-1}, t_k]`` in real time is ``[t - t_k, t - t_{k-1}]`` in time-to-go.
    """
    t = float(spec.t if t is None else t)
    sched.validate(spec, t)
    bp = sched.breakpoints.copy()
    bp[-1] = t
    lo, hi = t - bp[1:], t - bp[:-1]
    parts = []
    for j, b in enumerate(spec.blocks):
        Z = _zeta_rows(b.r, lo, hi)
        parts.append(drift(b, t) + sched.values[:, j] @ Z)
    return np.concatenate(parts)


def bang_bang_schedule(spec: SystemSpec, params, t: float | None = None) -> InputSchedule:
    """Extremal schedule realizing one :class:`BoundaryParams` per block.

    Block switches are merged into one breakpoint list; each block's value
    on a merged segment is ``beta`` or ``alpha`` by the sign of its piece.
    """
    t = float(spec.t if t is None else t)
    if len(params) != spec.m:
        raise SpecError(f"need one parameter set per block, got {len(params)}")
    cuts = {0.0, t}
    for p in params:
        cuts.update(t - s for s in p.s if 0.0 < s < t)
    bp = np.array(sorted(cuts))
    mids_ttg = t - 0.5 * (bp[:-1] + bp[1:])
    vals = np.empty((bp.size - 1, spec.m))
    for j, (b, p) in enumerate(zip(spec.blocks, params)):
        p.check(b.r, t)
        # piece index q in time-to-go = number of switches below the midpoint
        q = np.searchsorted(np.array(p.s, dtype=float), mids_ttg)
        sign = p.sheet * np.where(q % 2 == 0, 1, -1)
        vals[:, j] = np.where(sign > 0, float(b.beta), float(b.alpha))
    return InputSchedule(bp, vals)


# sampling -------------------------------------------------------------------


def sample_input_set(u: InputSet, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` uniform draws from a box or an l_1 / l_2 / l_inf ball; shape ``(n, dim)``."""
    m = u.dim
    if u.kind == "box":
        lo = np.array([float(v) for v in u.lower])
        hi = np.array([float(v) for v in u.upper])
        return lo + (hi - lo) * rng.random((n, m))
    c = np.array([float(v) for v in u.center])
    rad = float(u.radius)
    if u.p == float("inf"):
        z = rng.uniform(-1.0, 1.0, (n, m))
    elif u.p == 2:
        g = rng.standard_normal((n, m))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        z = g * rng.random((n, 1)) ** (1.0 / m)
    elif u.p == 1:
        e = rng.exponential(size=(n, m + 1))
        z = e[:, :m] / e.sum(axis=1, keepdims=True)
        z *= rng.choice([-1.0, 1.0], size=(n, m))
    else:
        raise SpecError(f"cannot sample l_{u.p} balls")
    return c + rad * z


def random_cloud(
    spec: SystemSpec,
    u_set: InputSet | None = None,
    K: int = 4,
    N: int = 10_000,
    seed: int = 0,
    t: float | None = None,
) -> np.ndarray:
    """``N`` endpoints of ``K``-segment piecewise-constant inputs drawn uniformly from ``u_set``.

    Segments split ``[0, t]`` evenly. Rows are states, shape ``(N, d)``.
    """
    if K < 1:
        raise SpecError("need at least one segment")
    if N < 0:
        raise SpecError("sample count must be non-negative")
    t = float(spec.t if t is None else t)
    u_set = u_set or spec.box_input_set()
    if u_set.dim != spec.m:
        raise SpecError(f"input set has dimension {u_set.dim}, system has {spec.m} inputs")
    rng = _rng(seed)
    U = sample_input_set(u_set, N * K, rng).reshape(N, K, spec.m)
    bp = np.linspace(0.0, t, K + 1)
    lo, hi = t - bp[1:], t - bp[:-1]
    parts = []
    for j, b in enumerate(spec.blocks):
        Z = _zeta_rows(b.r, lo, hi)  # (K, r)
        parts.append(drift(b, t) + U[:, :, j] @ Z)
    return np.concatenate(parts, axis=1) if N else np.empty((0, spec.d))


# audits ---------------------------------------------------------------------


@dataclass
class CloudReport:
    n_samples: int
    n_inside: int
    max_violation: float
    tol: float
    violations: np.ndarray = field(repr=False)
    margins: np.ndarray = field(repr=False)
    gap_directions: np.ndarray = field(repr=False)
    support_gaps: np.ndarray = field(repr=False)

    @property
    def ok(self) -> bool:
        return self.violations.size == 0

    def summary(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "n_inside": self.n_inside,
            "n_violations": int(self.violations.size),
            "max_violation": self.max_violation,
            "tol": self.tol,
            "max_support_gap": float(self.support_gaps.max()) if self.support_gaps.size else 0.0,
            "min_support_gap": float(self.support_gaps.min()) if self.support_gaps.size else 0.0,
        }


def _default_gap_directions(d: int, seed: int = 7, n: int = 64) -> np.ndarray:
    rng = _rng(seed)
    D = rng.standard_normal((n, d))
    D /= np.linalg.norm(D, axis=1, keepdims=True)
    return np.vstack([np.eye(d), -np.eye(d), D])


def containment_audit(
    cloud,
    spec: SystemSpec,
    directions=None,
    tol: float = 1e-9,
    t: float | None = None,
    gap_directions=None,
    chunk: int = 2048,
) -> CloudReport:
    """Per-point duality margins; a point violates when some block margin is below ``-tol``.

    ``directions`` optionally maps block index to a :class:`DirectionPlan`
    for the coarse sweep. ``support_gaps[i]`` is ``h(y_i) - max_x <y_i, x>``
    over the cloud, which is non-negative for a sound cloud and shrinks as it
    fills the set.
    """
    t = float(spec.t if t is None else t)
    X = np.asarray(cloud, dtype=float).reshape(-1, spec.d)
    n = X.shape[0]
    G = _default_gap_directions(spec.d) if gap_directions is None else np.atleast_2d(np.asarray(gap_directions, float))
    if n == 0:
        empty = np.empty(0)
        return CloudReport(0, 0, 0.0, tol, empty.astype(int), empty, G, empty)
    plans = directions or {}
    margins = np.empty(n)
    starts = list(range(0, n, chunk))

    def work(lo):
        Xc = X[lo : lo + chunk]
        per = [duality_margins(b, Xj, t, plans.get(j), refine="band")[0] for j, (b, Xj) in enumerate(zip(spec.blocks, spec.split(Xc)))]
        return lo, np.min(np.vstack(per), axis=0)

    for lo, m in _map(work, starts):
        margins[lo : lo + m.size] = m
    viol = np.flatnonzero(margins < -tol)
    gaps = support_batch(spec, G, t) - (X @ G.T).max(axis=0)
    return CloudReport(
        n_samples=n,
        n_inside=int(np.count_nonzero(margins >= -tol)),
        max_violation=float(max(0.0, -margins.min())),
        tol=tol,
        violations=viol,
        margins=margins,
        gap_directions=G,
        support_gaps=gaps,
    )


# volumes --------------------------------------------------------------------


@dataclass(frozen=True)
class BlockVolume:
    volume: float
    stderr: float
    accepted: int
    samples: int
    box_volume: float


@dataclass(frozen=True)
class VolumeEstimate:
    blocks: tuple
    total: float
    stderr: float

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "stderr": self.stderr,
            "blocks": [b.__dict__ for b in self.blocks],
        }


def bounding_box(b, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Tight axis-aligned box of a block set from its ``+-e_i`` support values."""
    E = np.eye(b.r)
    return -support_block_batch(b, -E, t), support_block_batch(b, E, t)


def _block_volume(b, t: float, N: int, rng: np.random.Generator, chunk: int = 50_000) -> BlockVolume:
    lo, hi = bounding_box(b, t)
    box = float(np.prod(hi - lo))
    if b.mu == 0 or t == 0.0:
        return BlockVolume(0.0, 0.0, 0, N, box)
    hits = 0
    done = 0
    while done < N:
        k = min(chunk, N - done)
        P = lo + (hi - lo) * rng.random((k, b.r))
        m, _ = duality_margins(b, P, t, refine="sign")
        hits += int(np.count_nonzero(m >= 0.0))
        done += k
    p = hits / N
    return BlockVolume(box * p, box * math.sqrt(p * (1 - p) / N), hits, N, box)


def mc_volume(spec: SystemSpec, t: float | None = None, N: int = 100_000, seed: int = 0) -> VolumeEstimate:
    """Per-block rejection estimates in each block's bounding box; total is their product.

    The total's standard error comes from the delta method,
    ``total * sqrt(sum (se_j / v_j)^2)``.
    """
    t = float(spec.t if t is None else t)
    children = np.random.SeedSequence(seed).spawn(spec.m)
    jobs = list(zip(spec.blocks, children))
    blocks = tuple(_map(lambda bc: _block_volume(bc[0], t, N, _rng(bc[1])), jobs))
    vols = np.array([v.volume for v in blocks])
    total = float(np.prod(vols))
    if total == 0.0:
        return VolumeEstimate(blocks, 0.0, 0.0)
    rel = math.sqrt(sum((v.stderr / v.volume) ** 2 for v in blocks))
    return VolumeEstimate(blocks, total, total * rel)


def boundary_polygon(b, t: float, n: int = 10_000) -> np.ndarray:
    """Closed boundary of a 2-d block: plus sheet followed by minus sheet, ``n`` points."""
    if b.r != 2:
        raise ValueError("boundary polygons exist only for r = 2 blocks")
    half = n // 2
    s = np.linspace(0.0, float(t), half)
    plus = boundary_points(b, 1, s[:, None], t)
    minus = boundary_points(b, -1, s[:, None], t)
    return np.vstack([plus, minus])


def shoelace_area(P) -> float:
    P = np.asarray(P, dtype=float)
    x, y = P[:, 0], P[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


# over-approximation gaps -----------------------------------------------------


@dataclass(frozen=True)
class GapReport:
    method: str
    n_directions: int
    augmented: bool
    outer_volume: float
    exact_volume: float
    volume_ratio: float
    max_overshoot: float
    mean_overshoot: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _polytope_support(Aub: np.ndarray, bub: np.ndarray, Y: np.ndarray) -> np.ndarray:
    out = np.empty(Y.shape[0])
    for i, y in enumerate(Y):
        res = linprog(-y, A_ub=Aub, b_ub=bub, bounds=[(None, None)] * Aub.shape[1], method="highs")
        out[i] = -res.fun if res.status == 0 else np.inf
    return out


def overapprox_gap(
    spec: SystemSpec,
    t: float | None = None,
    method: str = "box",
    n_directions: int | None = None,
    directions=None,
    n_test: int = 200,
    N: int = 100_000,
    seed: int = 0,
) -> GapReport:
    """Compare an outer approximation built from exact support values with the exact set.

    ``method`` is ``"box"`` (supports along ``+-e_i``) or ``"polytope"``
    (supports along ``directions`` or ``n_directions`` random unit vectors).
    A polytope that comes out unbounded gets the ``+-e_i`` faces added, and
    ``augmented`` records it. Volumes are Monte Carlo estimates over the
    common bounding box.
    """
    t = float(spec.t if t is None else t)
    d = spec.d
    rng = _rng(seed)
    E = np.vstack([np.eye(d), -np.eye(d)])
    hE = support_batch(spec, E, t)
    lo, hi = -hE[d:], hE[:d]
    T = rng.standard_normal((n_test, d))
    T /= np.linalg.norm(T, axis=1, keepdims=True)
    hT = support_batch(spec, T, t)

    augmented = False
    if method == "box":
        A, rhs = E, hE
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        outer_T = T @ mid + np.abs(T) @ half
        n_dirs = 2 * d
    elif method == "polytope":
        if directions is None:
            if n_directions is None or n_directions < d + 1:
                raise SpecError(f"support polytope needs at least d+1 = {d + 1} directions")
            A = rng.standard_normal((n_directions, d))
        else:
            A = np.atleast_2d(np.asarray(directions, dtype=float))
        A = A / np.linalg.norm(A, axis=1, keepdims=True)
        rhs = support_batch(spec, A, t)
        if not np.all(np.isfinite(_polytope_support(A, rhs, E))):
            A, rhs, augmented = np.vstack([A, E]), np.concatenate([rhs, hE]), True
        outer_T = _polytope_support(A, rhs, T)
        n_dirs = A.shape[0]
    else:
        raise SpecError(f"unknown over-approximation method {method!r}")

    overshoot = np.maximum(outer_T - hT, 0.0)
    box_vol = float(np.prod(hi - lo))
    P = lo + (hi - lo) * rng.random((N, d))
    in_outer = np.all(P @ A.T <= rhs + 1e-12 * (1 + np.abs(rhs)), axis=1)
    in_exact = np.ones(N, dtype=bool)
    for b, Pj in zip(spec.blocks, spec.split(P)):
        idx = np.flatnonzero(in_exact)
        m, _ = duality_margins(b, Pj[idx], t, refine="sign")
        in_exact[idx[m < 0]] = False
    v_out = box_vol * np.count_nonzero(in_outer) / N
    v_ex = box_vol * np.count_nonzero(in_exact) / N
    return GapReport(
        method=method,
        n_directions=int(n_dirs),
        augmented=augmented,
        outer_volume=v_out,
        exact_volume=v_ex,
        volume_ratio=v_out / v_ex if v_ex > 0 else float("inf"),
        max_overshoot=float(overshoot.max()) if overshoot.size else 0.0,
        mean_overshoot=float(overshoot.mean()) if overshoot.size else 0.0,
    )


def center_point(spec: SystemSpec, t: float | None = None) -> np.ndarray:
    """Endpoint of the midpoint input; interior whenever every block has ``mu > 0``."""
    t = float(spec.t if t is None else t)
    return np.concatenate([center(b, t) for b in spec.blocks])
