"""Closed-form solutions at the boundary rungs of the ladder.

Bernoulli, ``z' = g(x) z^m + h(x) z`` with ``m != 1``.  Setting
``y = z^(1-m)`` linearizes it to ``y' = (1-m)(g + h y)``, hence with
``H(t) = int_{x0}^t h``::

    z(x) = exp(H(x)) * [ z0^(1-m) + (1-m) int_{x0}^x g(t) exp((m-1) H(t)) dt ]^(1/(1-m))

Note the placement: the outer integral carries ``g`` (the coefficient of the
nonlinear term) and the bracket starts at ``z0^(1-m)``.

One-term, ``z' = v(x) z^p``::

    z(x) = [ z0^(1-p) + (1-p) int v ]^(1/(1-p))      (p != 1)
    z(x) = z0 exp(int v)                              (p == 1)
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

from .equation import AbelEquation, Term, make_equation, parse_number
from .errors import DomainExit, InvalidEquation
from .expr import Expr, Number, as_expr, compile_expr, free_vars, parse
from .solve import quadrature

# the bracket is monitored at no fewer than this many points on [x0, x]
_MONITOR_SEGMENTS = 16


def _coeff(e) -> Expr:
    e = parse(e, ["x"]) if isinstance(e, str) else as_expr(e)
    if free_vars(e) - {"x"}:
        raise InvalidEquation(f"coefficient may depend on x only, got {e}")
    return e


@dataclass(frozen=True)
class BernoulliSpec:
    """``dz/dx = g(x) z^m + h(x) z``, ``z(x0) = z0``."""

    g: Expr
    h: Expr
    m: Number
    z0: Number
    x0: Number = 0

    def __post_init__(self):
        object.__setattr__(self, "g", _coeff(self.g))
        object.__setattr__(self, "h", _coeff(self.h))
        object.__setattr__(self, "m", parse_number(self.m))
        object.__setattr__(self, "z0", parse_number(self.z0))
        if self.m == 1:
            raise InvalidEquation("Bernoulli exponent m must differ from 1")
        if not self.z0 > 0:
            raise InvalidEquation(f"z0 must be positive, got {self.z0}")

    def equation(self) -> AbelEquation:
        return make_equation(1, [Term(self.g, self.m), Term(self.h, parse_number(1))], self.z0, self.x0)


def _nodes(x0: float, xs: Sequence[float]) -> list[float]:
    top = max(xs)
    grid = {x0 + (top - x0) * i / _MONITOR_SEGMENTS for i in range(1, _MONITOR_SEGMENTS)}
    return sorted(grid | {float(x) for x in xs})


def bernoulli_solution_at(spec: BernoulliSpec, xs: Sequence[float], tol: float = 1e-10) -> list[float]:
    """Bernoulli closed form at every abscissa in ``xs`` (each >= x0).

    Nested adaptive quadrature: the inner antiderivative of ``h`` is computed
    to ``tol/10``, the outer integral to ``tol``.  Raises :class:`DomainExit`
    if the bracket reaches zero on the way.
    """
    x0 = float(spec.x0)
    if any(x < x0 for x in xs):
        raise ValueError("abscissae must not precede x0")
    g = compile_expr(spec.g, ["x"])
    h = compile_expr(spec.h, ["x"])
    m = float(spec.m)
    one_m = 1.0 - m
    inner_tol = tol / 10

    def H(t: float) -> float:
        return quadrature(h, x0, t, inner_tol)

    def integrand(t: float) -> float:
        return g(t) * math.exp(-one_m * H(t))

    bracket0 = float(spec.z0) ** one_m
    values: dict[float, float] = {x0: float(spec.z0)}
    acc = 0.0
    left = x0
    for node in _nodes(x0, xs):
        if node == left:
            continue
        acc += quadrature(integrand, left, node, tol)
        left = node
        bracket = bracket0 + one_m * acc
        if bracket <= 0:
            raise DomainExit(f"Bernoulli bracket {bracket:.6g} <= 0 at x = {node:.17g}; solution is no longer real-positive")
        values[node] = math.exp(H(node)) * bracket ** (1.0 / one_m)
    return [values[float(x)] for x in xs]


def bernoulli_solution(spec: BernoulliSpec, x: float, tol: float = 1e-10) -> float:
    return bernoulli_solution_at(spec, [x], tol)[0]


def separable_solution_at(v, n_exp, z0, xs: Sequence[float], tol: float = 1e-10, x0: float = 0.0) -> list[float]:
    """Solution of ``z' = v(x) z^n_exp``, ``z(x0) = z0`` at each of ``xs``."""
    vf = compile_expr(_coeff(v), ["x"])
    p = float(parse_number(n_exp))
    z0 = float(parse_number(z0))
    x0 = float(x0)
    if not z0 > 0:
        raise InvalidEquation(f"z0 must be positive, got {z0}")
    if any(x < x0 for x in xs):
        raise ValueError("abscissae must not precede x0")
    one_p = 1.0 - p
    values = {x0: z0}
    acc = 0.0
    left = x0
    for node in _nodes(x0, xs) if xs else []:
        if node == left:
            continue
        acc += quadrature(vf, left, node, tol)
        left = node
        if p == 1:
            values[node] = z0 * math.exp(acc)
            continue
        # bracket = z0^(1-p) * (1 + (1-p) z0^(p-1) acc); log1p keeps p -> 1 accurate
        scaled = one_p * acc * z0 ** (p - 1)
        if scaled <= -1:
            raise DomainExit(f"separable bracket reached zero before x = {node:.17g}")
        values[node] = z0 * math.exp(math.log1p(scaled) / one_p)
    return [values[float(x)] for x in xs]


def separable_solution(v, n_exp, z0, x: float, tol: float = 1e-10, x0: float = 0.0) -> float:
    return separable_solution_at(v, n_exp, z0, [x], tol, x0)[0]


def bernoulli_role_swap(spec: BernoulliSpec) -> BernoulliSpec:
    """Exchange the coefficients: ``z' = h z^m + g z``."""
    return replace(spec, g=spec.h, h=spec.g)
