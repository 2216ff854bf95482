"""Integrator-chain systems, input sets and spec validation.

A system is a list of single-input chains (blocks) of lengths ``r_j``. Block
``j`` sees its input only through the interval ``[alpha_j, beta_j]``, the
coordinate projection of the input set, so input sets are reduced to those
intervals on construction and kept around only for sampling.

Numbers supplied as ints or ``"p/q"`` strings stay exact (:class:`Fraction`);
floats stay floats.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import SpecError

__all__ = [
    "SpecError",
    "BlockSpec",
    "InputSet",
    "SystemSpec",
    "normalize_spec",
    "project_input_set",
    "load_spec",
    "spec_to_dict",
    "parse_number",
]


def parse_number(v: Any, what: str = "value"):
    """Int/Fraction/float from JSON-ish input; ``"p/q"`` strings become Fractions."""
    if isinstance(v, bool):
        raise SpecError(f"{what}: expected a number, got a boolean")
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    if isinstance(v, float):
        if not np.isfinite(v):
            raise SpecError(f"{what}: must be finite")
        return v
    if isinstance(v, Real):
        return float(v)
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except (ValueError, ZeroDivisionError):
            pass
        try:
            return parse_number(float(v), what)
        except ValueError:
            raise SpecError(f"{what}: cannot parse {v!r} as a number") from None
    raise SpecError(f"{what}: expected a number, got {type(v).__name__}")


def _dump_number(v):
    if isinstance(v, Fraction):
        return v.numerator if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return float(v)


@dataclass(frozen=True)
class BlockSpec:
    """One chain of ``r`` integrators with input confined to ``[alpha, beta]``."""

    r: int
    x0: tuple
    alpha: Any
    beta: Any

    def __post_init__(self):
        if not isinstance(self.r, int) or self.r < 1:
            raise SpecError(f"chain length r must be a positive integer, got {self.r!r}")
        object.__setattr__(self, "x0", tuple(self.x0))
        if len(self.x0) != self.r:
            raise SpecError(f"x0 has length {len(self.x0)}, expected r={self.r}")
        if self.alpha > self.beta:
            raise SpecError(f"alpha={self.alpha} exceeds beta={self.beta}")

    @property
    def mu(self):
        """Half-width ``(beta - alpha) / 2`` of the input interval."""
        return (self.beta - self.alpha) / 2

    @property
    def nu(self):
        """Midpoint ``(beta + alpha) / 2`` of the input interval."""
        return (self.beta + self.alpha) / 2

    @property
    def x0_array(self) -> np.ndarray:
        return np.array([float(v) for v in self.x0])

    @property
    def degenerate(self) -> bool:
        return self.mu == 0


@dataclass(frozen=True)
class InputSet:
    """Compact input set: an axis-aligned box or an l_p ball (p in {1, 2, inf})."""

    kind: str
    dim: int
    lower: tuple = ()
    upper: tuple = ()
    p: float | None = None
    radius: Any = 1
    center: tuple = ()

    def __post_init__(self):
        if self.kind == "box":
            if len(self.lower) != self.dim or len(self.upper) != self.dim:
                raise SpecError("box bounds must match the input dimension")
            if any(lo > hi for lo, hi in zip(self.lower, self.upper)):
                raise SpecError("box lower bound exceeds upper bound")
        elif self.kind == "lp":
            if self.p not in (1, 2, float("inf")):
                raise SpecError(f"unsupported l_p ball p={self.p!r}; use 1, 2 or inf")
            if self.radius < 0:
                raise SpecError("ball radius must be non-negative")
            if not self.center:
                object.__setattr__(self, "center", (0,) * self.dim)
            if len(self.center) != self.dim:
                raise SpecError("ball center must match the input dimension")
        else:
            raise SpecError(f"unknown input set kind {self.kind!r}")

    @classmethod
    def box(cls, lower: Sequence, upper: Sequence) -> "InputSet":
        return cls("box", len(lower), lower=tuple(lower), upper=tuple(upper))

    @classmethod
    def ball(cls, p, dim: int, radius=1, center: Sequence | None = None) -> "InputSet":
        p = float("inf") if p in ("inf", "infinity", float("inf")) else p
        return cls("lp", dim, p=p, radius=radius, center=tuple(center) if center is not None else ())

    def interval(self, j: int) -> tuple:
        """Coordinate-wise min and max of input ``j`` (0-based) over the set."""
        return project_input_set(self, j)

    def to_dict(self) -> dict:
        if self.kind == "box":
            return {
                "kind": "box",
                "lower": [_dump_number(v) for v in self.lower],
                "upper": [_dump_number(v) for v in self.upper],
            }
        p = "inf" if self.p == float("inf") else int(self.p)
        return {
            "kind": "lp",
            "p": p,
            "radius": _dump_number(self.radius),
            "center": [_dump_number(v) for v in self.center],
        }


def project_input_set(u: InputSet, j: int) -> tuple:
    """Exact interval hull ``[alpha_j, beta_j]`` of coordinate ``j`` (0-based).

    Every l_p ball with p >= 1 reaches exactly ``center_j +- radius`` along a
    coordinate axis.
    """
    if not 0 <= j < u.dim:
        raise IndexError(f"input index {j} out of range for dimension {u.dim}")
    if u.kind == "box":
        return u.lower[j], u.upper[j]
    return u.center[j] - u.radius, u.center[j] + u.radius


@dataclass(frozen=True)
class SystemSpec:
    """Multi-input integrator system in Brunovsky form over horizon ``t``."""

    blocks: tuple
    t: Any
    input_set: InputSet | None = None
    offsets: tuple = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if not self.blocks:
            raise SpecError("a system needs at least one block")
        if not self.t > 0:
            raise SpecError(f"horizon t must be positive, got {self.t}")
        offs = [0]
        for b in self.blocks:
            offs.append(offs[-1] + b.r)
        object.__setattr__(self, "offsets", tuple(offs))
        if self.input_set is not None and self.input_set.dim != len(self.blocks):
            raise SpecError("input set dimension must equal the number of blocks")

    @property
    def d(self) -> int:
        return self.offsets[-1]

    @property
    def m(self) -> int:
        return len(self.blocks)

    @property
    def r(self) -> tuple:
        return tuple(b.r for b in self.blocks)

    def split(self, v) -> list[np.ndarray]:
        """Block views of a length-``d`` vector (or the last axis of an array)."""
        v = np.asarray(v, dtype=float)
        if v.shape[-1] != self.d:
            raise ValueError(f"expected vectors of length {self.d}, got {v.shape[-1]}")
        return [v[..., lo:hi] for lo, hi in zip(self.offsets[:-1], self.offsets[1:])]

    def with_t(self, t) -> "SystemSpec":
        return SystemSpec(self.blocks, t, self.input_set)

    def box_input_set(self) -> InputSet:
        """The retained input set, or the box of block intervals if none."""
        if self.input_set is not None:
            return self.input_set
        return InputSet.box([b.alpha for b in self.blocks], [b.beta for b in self.blocks])


_BLOCK_KEYS = {"r", "x0", "alpha", "beta"}
_TOP_KEYS = {"blocks", "t", "input_set"}
_SET_KEYS = {"kind", "p", "radius", "center", "lower", "upper"}


def _parse_input_set(raw: Mapping, m: int) -> InputSet:
    unknown = set(raw) - _SET_KEYS
    if unknown:
        raise SpecError(f"unknown input_set fields: {sorted(unknown)}")
    kind = raw.get("kind")
    if kind == "box":
        return InputSet.box(
            [parse_number(v, "input_set.lower") for v in raw["lower"]],
            [parse_number(v, "input_set.upper") for v in raw["upper"]],
        )
    if kind in ("lp", "ball"):
        p = raw.get("p")
        if isinstance(p, str):
            p = float("inf") if p.lower() in ("inf", "infinity") else parse_number(p, "input_set.p")
        center = raw.get("center")
        return InputSet.ball(
            p,
            m,
            radius=parse_number(raw.get("radius", 1), "input_set.radius"),
            center=[parse_number(v, "input_set.center") for v in center] if center is not None else None,
        )
    raise SpecError(f"unknown input set kind {kind!r}")


def normalize_spec(raw: Mapping | SystemSpec) -> SystemSpec:
    """Validate a JSON-style spec mapping and build a :class:`SystemSpec`.

    Blocks may omit ``alpha``/``beta`` when an ``input_set`` is given; the
    projection of the set fills them in. When both appear they must agree.
    """
    if isinstance(raw, SystemSpec):
        return raw
    if not isinstance(raw, Mapping):
        raise SpecError("spec must be a JSON object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise SpecError(f"unknown spec fields: {sorted(unknown)}")
    blocks_raw = raw.get("blocks")
    if not isinstance(blocks_raw, Sequence) or isinstance(blocks_raw, str) or not blocks_raw:
        raise SpecError("spec needs a non-empty 'blocks' list")
    if "t" not in raw:
        raise SpecError("spec needs a horizon 't'")
    t = parse_number(raw["t"], "t")
    u = _parse_input_set(raw["input_set"], len(blocks_raw)) if raw.get("input_set") is not None else None

    blocks = []
    for j, b in enumerate(blocks_raw):
        if not isinstance(b, Mapping):
            raise SpecError(f"block {j} must be an object")
        unknown = set(b) - _BLOCK_KEYS
        if unknown:
            raise SpecError(f"block {j}: unknown fields {sorted(unknown)}")
        r = b.get("r")
        if isinstance(r, bool) or not isinstance(r, int):
            raise SpecError(f"block {j}: r must be an integer")
        x0 = b.get("x0", [0] * r if isinstance(r, int) and r > 0 else [])
        if not isinstance(x0, Sequence) or isinstance(x0, str):
            raise SpecError(f"block {j}: x0 must be a list")
        x0 = [parse_number(v, f"block {j} x0") for v in x0]
        if u is not None:
            lo, hi = project_input_set(u, j)
            alpha = parse_number(b["alpha"], f"block {j} alpha") if "alpha" in b else lo
            beta = parse_number(b["beta"], f"block {j} beta") if "beta" in b else hi
            if alpha != lo or beta != hi:
                raise SpecError(f"block {j}: [alpha, beta] disagrees with the input set projection")
        else:
            if "alpha" not in b or "beta" not in b:
                raise SpecError(f"block {j}: alpha and beta are required without an input_set")
            alpha = parse_number(b["alpha"], f"block {j} alpha")
            beta = parse_number(b["beta"], f"block {j} beta")
        blocks.append(BlockSpec(r, x0, alpha, beta))
    return SystemSpec(blocks, t, u)


def spec_to_dict(spec: SystemSpec) -> dict:
    out: dict[str, Any] = {
        "blocks": [
            {
                "r": b.r,
                "x0": [_dump_number(v) for v in b.x0],
                "alpha": _dump_number(b.alpha),
                "beta": _dump_number(b.beta),
            }
            for b in spec.blocks
        ],
        "t": _dump_number(spec.t),
    }
    if spec.input_set is not None:
        out["input_set"] = spec.input_set.to_dict()
    return out


def load_spec(path) -> SystemSpec:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecError(f"spec is not valid JSON: {exc}") from None
    return normalize_spec(raw)
