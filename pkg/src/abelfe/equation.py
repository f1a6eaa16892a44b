"""The generalized Abel equation ``(dz/dx)^n = sum_k g_k(x) z^{m_k}`` with an
explicit initial value ``z(x0) = z0``, and its ladder specializations."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Sequence

from .errors import DomainError, InvalidEquation
from .expr import Expr, Number, _eval, add, as_expr, compile_expr, free_vars, parse, real_pow, to_text

__all__ = [
    "Term",
    "AbelEquation",
    "make_equation",
    "rhs_eval",
    "merge_equal_exponent_terms",
    "specialize_zero_term",
    "parse_number",
    "equation_from_json",
    "equation_to_json",
]


def parse_number(value) -> Number:
    """Numbers from configs: ints and ``"p/q"`` strings are exact, floats stay floats."""
    if isinstance(value, bool):
        raise InvalidEquation(f"not a number: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise InvalidEquation(f"non-finite number {value!r}")
        return value
    if isinstance(value, str):
        s = value.strip()
        try:
            if "/" in s or s.lstrip("+-").isdigit():
                return Fraction(s)
            return float(s)
        except (ValueError, ZeroDivisionError):
            raise InvalidEquation(f"not a number: {value!r}") from None
    raise InvalidEquation(f"not a number: {value!r}")


def is_integer(v: Number) -> bool:
    return (isinstance(v, Fraction) and v.denominator == 1) or (isinstance(v, float) and v.is_integer())


@dataclass(frozen=True)
class Term:
    coeff: Expr
    exponent: Number

    def __post_init__(self):
        extra = free_vars(self.coeff) - {"x"}
        if extra:
            raise InvalidEquation(f"coefficient {to_text(self.coeff)!r} uses variables {sorted(extra)}; only x allowed")
        if not math.isfinite(self.exponent):
            raise InvalidEquation(f"exponent must be finite, got {self.exponent}")

    @property
    def is_constant(self) -> bool:
        return not free_vars(self.coeff)


@dataclass(frozen=True)
class AbelEquation:
    n: int
    terms: tuple[Term, ...]
    z0: Number
    x0: Number = Fraction(0)

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 1:
            raise InvalidEquation(f"derivative power n must be a positive integer, got {self.n!r}")
        if not self.terms:
            raise InvalidEquation("an Abel equation needs at least one term")
        if not self.z0 > 0:
            raise InvalidEquation(f"initial value z0 must be positive, got {self.z0}")
        object.__setattr__(self, "terms", tuple(self.terms))

    @property
    def K(self) -> int:
        return len(self.terms)

    @property
    def exponents(self) -> tuple[Number, ...]:
        return tuple(t.exponent for t in self.terms)

    @property
    def is_constant_coefficient(self) -> bool:
        return all(t.is_constant for t in self.terms)

    def coefficient_values(self) -> tuple[Number, ...]:
        """Coefficients u_k of a constant-coefficient equation."""
        if not self.is_constant_coefficient:
            raise InvalidEquation("equation has x-dependent coefficients")
        return tuple(_eval(t.coeff, {}) for t in self.terms)

    @property
    def mergeable_pairs(self) -> list[tuple[int, int]]:
        """1-based index pairs of terms sharing an exponent."""
        ex = self.exponents
        return [(i + 1, j + 1) for i in range(len(ex)) for j in range(i + 1, len(ex)) if ex[i] == ex[j]]

    @cached_property
    def _compiled(self) -> list[tuple[Callable[[float], float], float, bool]]:
        return [(compile_expr(t.coeff, ["x"]), float(t.exponent), is_integer(t.exponent) and t.exponent >= 0)
                for t in self.terms]

    @property
    def has_fractional_exponent(self) -> bool:
        return not all(is_integer(m) for m in self.exponents)

    def rhs(self, x: float, z: float) -> float:
        """Float fast path of :func:`rhs_eval` (the polynomial side of the equation)."""
        if z <= 0:
            total = 0.0
            for g, m, nonneg_int in self._compiled:
                if not nonneg_int:
                    raise DomainError(f"z = {z} with exponent {m}")
                total += g(x) * z ** int(m)
            return total
        total = 0.0
        for g, m, _ in self._compiled:
            total += g(x) * z**m
        return total

    def with_constants(self, u: Sequence[Number], m: Sequence[Number] | None = None, z0: Number | None = None):
        """Same shape with constant coefficients ``u`` (and optionally new exponents / z0)."""
        if len(u) != self.K or (m is not None and len(m) != self.K):
            raise InvalidEquation("slot lengths must equal the number of terms")
        m = self.exponents if m is None else m
        terms = tuple(Term(as_expr(uk), mk) for uk, mk in zip(u, m))
        return replace(self, terms=terms, z0=self.z0 if z0 is None else z0)


def _as_term(t) -> Term:
    if isinstance(t, Term):
        return t
    coeff, exponent = t
    if isinstance(coeff, str):
        coeff = parse(coeff, ["x"])
    return Term(as_expr(coeff), parse_number(exponent))


def make_equation(n: int, terms: Iterable, z0, x0=0) -> AbelEquation:
    """Build a validated equation.  ``terms`` holds ``Term`` objects or
    ``(coeff, exponent)`` pairs, coefficients as strings/Exprs/numbers."""
    return AbelEquation(n, tuple(_as_term(t) for t in terms), parse_number(z0), parse_number(x0))


def rhs_eval(eq: AbelEquation, x, z) -> Number:
    """``sum_k g_k(x) z^{m_k}``, exact when ``x``, ``z`` and the data are exact."""
    if z <= 0:
        bad = [m for m in eq.exponents if not is_integer(m) or m < 0]
        if bad:
            raise DomainError(f"z = {z} is outside the domain of z^{bad[0]}")
    xv = Fraction(x) if isinstance(x, int) else x
    zv = Fraction(z) if isinstance(z, int) else z
    return sum((_eval(t.coeff, {"x": xv}) * real_pow(zv, t.exponent) for t in eq.terms), Fraction(0))


def merge_equal_exponent_terms(eq: AbelEquation) -> AbelEquation:
    merged: dict[Number, Expr] = {}
    order: list[Number] = []
    for t in eq.terms:
        key = t.exponent
        if key in merged:
            merged[key] = add(merged[key], t.coeff)
        else:
            merged[key] = t.coeff
            order.append(key)
    if len(order) == eq.K:
        return eq
    return replace(eq, terms=tuple(Term(merged[k], k) for k in order))


def specialize_zero_term(eq: AbelEquation, k: int) -> AbelEquation:
    """Drop term ``k`` (1-based): the ``u_k = 0`` rung of the ladder."""
    if not 1 <= k <= eq.K:
        raise IndexError(f"term index {k} out of range 1..{eq.K}")
    if eq.K == 1:
        raise InvalidEquation("dropping the only term leaves an empty equation")
    return replace(eq, terms=eq.terms[: k - 1] + eq.terms[k:])


# ---------------------------------------------------------------------------
# JSON config: {"n": int, "x0": num, "z0": num, "terms": [{"coeff": str, "m": num | "p/q"}]}

def _number_json(v: Number):
    if isinstance(v, Fraction):
        return v.numerator if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return v


def equation_to_json(eq: AbelEquation) -> dict:
    return {
        "n": eq.n,
        "x0": _number_json(eq.x0),
        "z0": _number_json(eq.z0),
        "terms": [{"coeff": to_text(t.coeff), "m": _number_json(t.exponent)} for t in eq.terms],
    }


def equation_from_json(doc) -> AbelEquation:
    """Accepts a dict or a JSON string.  Raises ``InvalidEquation`` or
    ``ParseError`` on malformed input."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise InvalidEquation(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise InvalidEquation("config must be a JSON object")
    missing = {"n", "z0", "terms"} - doc.keys()
    if missing:
        raise InvalidEquation(f"config missing keys {sorted(missing)}")
    terms = doc["terms"]
    if not isinstance(terms, list) or not all(isinstance(t, dict) and {"coeff", "m"} <= t.keys() for t in terms):
        raise InvalidEquation('"terms" must be a list of {"coeff", "m"} objects')
    n = doc["n"]
    if isinstance(n, bool) or not isinstance(n, int):
        raise InvalidEquation(f"n must be an integer, got {n!r}")
    return make_equation(n, [(str(t["coeff"]), t["m"]) for t in terms], doc["z0"], doc.get("x0", 0))
