"""Parametric boundary of a block reach set.

Boundary points are endpoints of bang-bang inputs with at most ``r - 1``
switches. In time-to-go ``s`` the switches sit at ``0 <= s_1 <= ... <= s_{r-1} <= t``;
the sheet sign says whether the input on the first piece ``[0, s_1]`` is
``beta`` (sheet +1) or ``alpha`` (sheet -1). Component ``k`` (1-based) is

    drift_k + nu t^n/n! + sheet * mu/n! * ((-1)^{r-1} t^n + 2 sum_q (-1)^{q+1} s_q^n),

with ``n = r - k + 1``. Repeated parameters are fine: the piece between them
has zero length.

Sheet grids are uniform in parameter space, not in arc length, so the points
they produce are spread unevenly over the surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import NamedTuple

import numpy as np
import numpy.polynomial.polynomial as npoly

from .model import BlockSpec
from .support import drift, zeta

__all__ = [
    "BoundaryParams",
    "BoundaryPoint",
    "boundary_point",
    "boundary_points",
    "sample_sheet",
    "sheet_seam_points",
    "direction_from_params",
    "random_params",
]


@dataclass(frozen=True)
class BoundaryParams:
    sheet: int
    s: tuple = ()

    def __post_init__(self):
        if self.sheet not in (1, -1):
            raise ValueError(f"sheet must be +1 or -1, got {self.sheet!r}")
        object.__setattr__(self, "s", tuple(float(v) for v in self.s))

    def check(self, r: int, t: float) -> None:
        if len(self.s) != r - 1:
            raise ValueError(f"expected {r - 1} boundary parameters, got {len(self.s)}")
        prev = 0.0
        for v in self.s:
            if v < prev:
                raise ValueError(f"boundary parameters must be ordered in [0, t]: {self.s}")
            prev = v
        if self.s and self.s[-1] > t:
            raise ValueError(f"boundary parameter {self.s[-1]} exceeds t={t}")


@dataclass(frozen=True)
class BoundaryPoint:
    block: int
    x: np.ndarray
    params: BoundaryParams


def _sheet_term(r: int, s: np.ndarray, t: float) -> np.ndarray:
    """``((-1)^{r-1} t^n + 2 sum_q (-1)^{q+1} s_q^n)/n!`` for ``n = r..1``; ``s`` may be batched."""
    n = np.arange(r, 0, -1)
    fact = np.array([math.factorial(k) for k in n], dtype=float)
    alt = np.where(np.arange(r - 1) % 2 == 0, 1.0, -1.0)
    sums = np.einsum("q,...qn->...n", alt, s[..., :, None] ** n) if r > 1 else np.zeros(s.shape[:-1] + (r,))
    return ((-1.0) ** (r - 1) * t**n + 2.0 * sums) / fact


def boundary_point(b: BlockSpec, p: BoundaryParams, t: float, block: int = 0) -> BoundaryPoint:
    t = float(t)
    p.check(b.r, t)
    s = np.array(p.s, dtype=float)
    x = drift(b, t) + float(b.nu) * zeta(b.r, 0.0, t) + p.sheet * float(b.mu) * _sheet_term(b.r, s, t)
    return BoundaryPoint(block, x, p)


def boundary_points(b: BlockSpec, sheet: int, S, t: float) -> np.ndarray:
    """Vectorized boundary points for parameter rows ``S`` (shape ``(n, r-1)``)."""
    t = float(t)
    S = np.asarray(S, dtype=float).reshape(-1, b.r - 1)
    base = drift(b, t) + float(b.nu) * zeta(b.r, 0.0, t)
    return base + sheet * float(b.mu) * _sheet_term(b.r, S, t)


def sample_sheet(b: BlockSpec, sheet: int, n: int, t: float, block: int = 0) -> list[BoundaryPoint]:
    """Boundary points at every ordered tuple drawn from an ``n``-point grid of ``[0, t]``."""
    if n < 1:
        raise ValueError("grid resolution must be >= 1")
    grid = np.linspace(0.0, float(t), n)
    out = []
    for idx in combinations_with_replacement(range(n), b.r - 1):
        out.append(boundary_point(b, BoundaryParams(sheet, grid[list(idx)]), t, block))
    return out


class SeamPoints(NamedTuple):
    lower: np.ndarray  # u == alpha throughout
    upper: np.ndarray  # u == beta throughout


def sheet_seam_points(b: BlockSpec, t: float) -> SeamPoints:
    """Endpoints of the constant extremal inputs, where the two sheets meet."""
    t = float(t)
    base = drift(b, t)
    z = zeta(b.r, 0.0, t)
    return SeamPoints(base + float(b.alpha) * z, base + float(b.beta) * z)


def seam_params(r: int, sheet: int, which: str, t: float) -> BoundaryParams:
    """Parameters in ``{0, t}`` on ``sheet`` that reproduce a seam point.

    ``which`` is ``"upper"`` (u == beta) or ``"lower"`` (u == alpha). For
    ``r == 1`` each sheet carries only one of them.
    """
    want_first = (which == "upper") == (sheet == 1)
    if want_first:
        return BoundaryParams(sheet, (float(t),) * (r - 1))
    if r == 1:
        raise ValueError("a scalar block reaches only one seam point per sheet")
    return BoundaryParams(sheet, (0.0,) + (float(t),) * (r - 2))


def direction_from_params(r: int, p: BoundaryParams) -> np.ndarray:
    """Outward normal whose polynomial ``<y, xi(s)>`` vanishes exactly at ``p.s``.

    The polynomial is ``sheet * (-1)^{r-1} * prod_q (s - s_q)``, positive on the
    first piece for the plus sheet.
    """
    c = npoly.polyfromroots(p.s) if p.s else np.array([1.0])
    c = c * p.sheet * (-1.0) ** (r - 1)
    fact = np.array([math.factorial(n) for n in range(r)], dtype=float)
    return (c * fact)[::-1].copy()


def random_params(rng: np.random.Generator, r: int, t: float, size: int | None = None) -> np.ndarray:
    """Uniform samples from the ordered simplex ``0 <= s_1 <= ... <= s_{r-1} <= t``."""
    shape = (r - 1,) if size is None else (size, r - 1)
    return np.sort(rng.uniform(0.0, float(t), size=shape), axis=-1)
