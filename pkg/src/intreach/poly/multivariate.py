"""Sparse multivariate polynomials over exact rationals.

Terms live in a dict mapping exponent tuples to :class:`~fractions.Fraction`
coefficients. Zero coefficients are never stored, and every listing of terms
uses graded-lexicographic order (total degree first, then the exponent tuple,
both descending), so printing and serialization are deterministic.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = ["MultiPoly", "grlex_key"]


def grlex_key(exps: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    return (sum(exps), exps)


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    if isinstance(c, float):
        return Fraction(c)  # exact binary value
    raise TypeError(f"cannot use {type(c).__name__} as an exact coefficient")


class MultiPoly:
    __slots__ = ("variables", "terms")

    def __init__(self, variables: Sequence[str], terms: Mapping[tuple[int, ...], object] | None = None):
        self.variables = tuple(variables)
        n = len(self.variables)
        clean: dict[tuple[int, ...], Fraction] = {}
        for e, c in (terms or {}).items():
            e = tuple(int(k) for k in e)
            if len(e) != n:
                raise ValueError(f"exponent {e} does not match {n} variables")
            c = _as_fraction(c)
            if c:
                clean[e] = clean.get(e, Fraction(0)) + c
                if not clean[e]:
                    del clean[e]
        self.terms = clean

    # construction -------------------------------------------------------
    @classmethod
    def constant(cls, c, variables: Sequence[str]) -> "MultiPoly":
        return cls(variables, {(0,) * len(variables): c})

    @classmethod
    def var(cls, name: str, variables: Sequence[str]) -> "MultiPoly":
        variables = tuple(variables)
        e = [0] * len(variables)
        e[variables.index(name)] = 1
        return cls(variables, {tuple(e): 1})

    @classmethod
    def _raw(cls, variables, terms) -> "MultiPoly":
        p = cls.__new__(cls)
        p.variables = variables
        p.terms = terms
        return p

    # inspection ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def sorted_terms(self) -> list[tuple[tuple[int, ...], Fraction]]:
        return sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]), reverse=True)

    def leading_term(self) -> tuple[tuple[int, ...], Fraction]:
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        e = max(self.terms, key=grlex_key)
        return e, self.terms[e]

    def coefficient(self, exps: Iterable[int]) -> Fraction:
        return self.terms.get(tuple(exps), Fraction(0))

    def __eq__(self, other) -> bool:
        if isinstance(other, MultiPoly):
            return self.variables == other.variables and self.terms == other.terms
        try:
            other = _as_fraction(other)
        except TypeError:
            return NotImplemented
        return self.terms == ({(0,) * len(self.variables): other} if other else {})

    def __hash__(self) -> int:
        return hash((self.variables, frozenset(self.terms.items())))

    # arithmetic ---------------------------------------------------------
    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other.variables != self.variables:
                raise ValueError(f"variable mismatch: {self.variables} vs {other.variables}")
            return other
        return MultiPoly.constant(other, self.variables)

    def __add__(self, other) -> "MultiPoly":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return MultiPoly._raw(self.variables, out)

    __radd__ = __add__

    def __neg__(self) -> "MultiPoly":
        return MultiPoly._raw(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "MultiPoly":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "MultiPoly":
        return (-self) + other

    def __mul__(self, other) -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            try:
                f = _as_fraction(other)
            except TypeError:
                return NotImplemented
            if not f:
                return MultiPoly._raw(self.variables, {})
            return MultiPoly._raw(self.variables, {e: c * f for e, c in self.terms.items()})
        other = self._coerce(other)
        out: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return MultiPoly._raw(self.variables, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __truediv__(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            return self.exact_div(other)
        f = _as_fraction(other)
        if not f:
            raise ZeroDivisionError("division of polynomial by zero")
        return self * (1 / f)

    def __pow__(self, n: int) -> "MultiPoly":
        if not isinstance(n, int) or n < 0:
            raise ValueError("power must be a non-negative integer")
        result = MultiPoly.constant(1, self.variables)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def exact_div(self, other: "MultiPoly") -> "MultiPoly":
        """Quotient of an exact division; raises ``ArithmeticError`` on a remainder."""
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        lead_e, lead_c = other.leading_term()
        rem = dict(self.terms)
        quot: dict[tuple[int, ...], Fraction] = {}
        while rem:
            e = max(rem, key=grlex_key)
            d = tuple(a - b for a, b in zip(e, lead_e))
            if min(d) < 0:
                raise ArithmeticError("polynomial division is not exact")
            f = rem[e] / lead_c
            quot[d] = f
            for oe, oc in other.terms.items():
                ne = tuple(a + b for a, b in zip(d, oe))
                v = rem.get(ne, 0) - f * oc
                if v:
                    rem[ne] = v
                else:
                    rem.pop(ne, None)
        return MultiPoly._raw(self.variables, quot)

    # transformation -----------------------------------------------------
    def rename(self, mapping: Mapping[str, str], variables: Sequence[str] | None = None) -> "MultiPoly":
        """Rename variables, optionally into a new variable order."""
        new_names = [mapping.get(v, v) for v in self.variables]
        target = tuple(variables) if variables is not None else tuple(new_names)
        idx = [target.index(v) for v in new_names]
        out = {}
        for e, c in self.terms.items():
            ne = [0] * len(target)
            for i, k in zip(idx, e):
                ne[i] += k
            out[tuple(ne)] = c
        return MultiPoly(target, out)

    def substitute(self, values: Mapping[str, "MultiPoly"], variables: Sequence[str]) -> "MultiPoly":
        """Compose with polynomials (over ``variables``) given for every variable."""
        subs = []
        for v in self.variables:
            s = values[v]
            subs.append(s if isinstance(s, MultiPoly) else MultiPoly.constant(s, variables))
        result = MultiPoly(variables, {})
        cache: dict[tuple[int, int], MultiPoly] = {}
        for e, c in self.terms.items():
            term = MultiPoly.constant(c, variables)
            for i, k in enumerate(e):
                if k:
                    if (i, k) not in cache:
                        cache[(i, k)] = subs[i] ** k
                    term = term * cache[(i, k)]
            result = result + term
        return result

    def normalized(self) -> tuple["MultiPoly", Fraction]:
        """Integer-coefficient primitive form with positive leading coefficient.

        Returns ``(q, scale)`` with ``q == scale * self``.
        """
        if self.is_zero():
            return self, Fraction(1)
        den = 1
        for c in self.terms.values():
            den = den * c.denominator // math.gcd(den, c.denominator)
        nums = [int(c * den) for c in self.terms.values()]
        g = 0
        for n in nums:
            g = math.gcd(g, n)
        scale = Fraction(den, g)
        if self.leading_term()[1] < 0:
            scale = -scale
        return self * scale, scale

    # evaluation ---------------------------------------------------------
    def __call__(self, *values):
        return self.evaluate(values)

    def evaluate(self, values):
        """Evaluate at a point. Exact for Fraction/int input, float otherwise.

        Accepts a sequence ordered like ``variables`` or a name mapping; numpy
        arrays broadcast.
        """
        if isinstance(values, Mapping):
            values = [values[v] for v in self.variables]
        values = list(values)
        if len(values) != len(self.variables):
            raise ValueError(f"expected {len(self.variables)} values")
        exact = all(isinstance(v, (int, Fraction)) for v in values)
        total = Fraction(0) if exact else 0.0
        for e, c in self.terms.items():
            term = c if exact else float(c)
            for v, k in zip(values, e):
                if k:
                    term = term * v**k
            total = total + term
        return total

    def abs_evaluate(self, values) -> float:
        """Sum of ``|c| * prod |v|^k`` over terms; the rounding scale of :meth:`evaluate`."""
        values = [abs(float(v)) for v in values]
        return float(sum(abs(float(c)) * math.prod(v**k for v, k in zip(values, e)) for e, c in self.terms.items()))

    def compose_affine(self, offset: Sequence[float], slope: Sequence[float]) -> np.ndarray:
        """Ascending float coefficients of ``tau -> p(offset + tau * slope)``."""
        n = len(self.variables)
        lin = [np.array([float(offset[i]), float(slope[i])]) for i in range(n)]
        powers: dict[tuple[int, int], np.ndarray] = {}

        def power(i: int, k: int) -> np.ndarray:
            if (i, k) not in powers:
                powers[(i, k)] = np.array([1.0]) if k == 0 else np.convolve(power(i, k - 1), lin[i])
            return powers[(i, k)]

        out = np.zeros(self.degree + 1 if self.terms else 1)
        for e, c in self.terms.items():
            term = np.array([float(c)])
            for i, k in enumerate(e):
                if k:
                    term = np.convolve(term, power(i, k))
            out[: term.size] += term
        return out

    # text / serialization -----------------------------------------------
    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(v if k == 1 else f"{v}^{k}" for v, k in zip(self.variables, e) if k)
            mag = abs(c)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self) -> str:
        return f"MultiPoly({self.variables!r}, {str(self)!r})"

    def to_json(self) -> list[dict]:
        return [
            {"exponents": list(e), "num": str(c.numerator), "den": str(c.denominator)}
            for e, c in self.sorted_terms()
        ]

    @classmethod
    def from_json(cls, data: list[dict] | str, variables: Sequence[str]) -> "MultiPoly":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(variables, {tuple(t["exponents"]): Fraction(int(t["num"]), int(t["den"])) for t in data})
