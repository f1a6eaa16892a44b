"""The one-parameter alpha-transform.

Multiplying the equation by ``z^alpha`` and setting ``w = z^((n+alpha)/n)``
gives an equation of the same shape for ``w`` with

* coefficients scaled by ``((n+alpha)/n)^n``,
* exponents mapped by ``m -> n(m+alpha)/(n+alpha)``,
* initial value mapped by ``z0 -> z0^((n+alpha)/n)``.

The transforms with a fixed ``n`` form a group under composition
(``gamma = alpha + beta + alpha*beta/n``), with ``alpha = 0`` the identity.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence

from .equation import AbelEquation, Term
from .errors import TransformError
from .expr import Expr, Num, Number, mul, real_pow


def exact_number(v) -> Number:
    if isinstance(v, bool):
        raise TypeError("bool is not a number")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    return v


@dataclass(frozen=True)
class AlphaTransform:
    alpha: Number
    n: int = 1

    def __post_init__(self):
        object.__setattr__(self, "alpha", exact_number(self.alpha))
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 1:
            raise TransformError(f"n must be a positive integer, got {self.n!r}")
        if self.alpha == -self.n:
            raise TransformError(f"alpha = -n = {-self.n} is not admissible")

    @property
    def ratio(self) -> Number:
        """``(n+alpha)/n``: the power taking z to w."""
        return (self.n + self.alpha) / self.n

    @property
    def coefficient_factor(self) -> Number:
        return self.ratio**self.n

    def map_exponent(self, m: Number) -> Number:
        return self.n * (m + self.alpha) / (self.n + self.alpha)

    def map_coefficient(self, u):
        if isinstance(u, Expr):
            return mul(Num(self.coefficient_factor), u)
        return self.coefficient_factor * u

    def map_initial(self, z0: Number) -> Number:
        return real_pow(z0, self.ratio)

    def back(self, w: float) -> float:
        """Recover z from w = z^((n+alpha)/n)."""
        return float(w) ** (1.0 / float(self.ratio))


def apply_to_parameters(t: AlphaTransform, u: Sequence, m: Sequence) -> tuple[list, list]:
    if len(u) != len(m):
        raise ValueError("coefficient and exponent lists must have equal length")
    return [t.map_coefficient(exact_number(uk)) for uk in u], [t.map_exponent(exact_number(mk)) for mk in m]


def apply_to_equation(t: AlphaTransform, eq: AbelEquation) -> AbelEquation:
    """Equation satisfied by ``w = z^((n+alpha)/n)``, including its initial value."""
    if t.n != eq.n:
        raise TransformError(f"transform built for n={t.n} applied to an equation with n={eq.n}")
    if t.alpha == 0:
        return eq
    terms = tuple(Term(t.map_coefficient(term.coeff), t.map_exponent(term.exponent)) for term in eq.terms)
    return replace(eq, terms=terms, z0=t.map_initial(eq.z0))


def compose(t1: AlphaTransform, t2: AlphaTransform) -> AlphaTransform:
    """Transform equal to applying ``t2`` first, then ``t1``."""
    if t1.n != t2.n:
        raise TransformError("cannot compose transforms with different n")
    n = t1.n
    gamma = t1.alpha + t2.alpha + t1.alpha * t2.alpha / n
    if gamma == -n:
        raise TransformError(f"composition of alpha={t1.alpha} and alpha={t2.alpha} gives the excluded value -n")
    return AlphaTransform(gamma, n)


def invert(t: AlphaTransform) -> AlphaTransform:
    return AlphaTransform(-t.n * t.alpha / (t.n + t.alpha), t.n)
