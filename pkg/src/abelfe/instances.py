"""Seeded random instances for the verification suites.

Every generator takes a ``random.Random`` and redraws until the instance
solves cleanly (no blow-up or domain exit, solution bounded away from 0) on
the requested window, so a given seed always yields the same instances.
"""
from __future__ import annotations

import random
from fractions import Fraction
from typing import Optional

from .closedform import BernoulliSpec
from .equation import AbelEquation, Term, make_equation
from .errors import AbelError
from .expr import Expr, Num, Var, add, call, mul, power
from .solve import integrate

X = Var("x")
MAX_TRIES = 200


def instance_rng(seed: int, suite: str, index: int) -> random.Random:
    return random.Random(f"{seed}/{suite}/{index}")


def round6(v: float) -> float:
    return round(v, 6)


def random_constant(rng: random.Random, scale: float, positive: bool = False) -> Expr:
    lo = 0.05 * scale if positive else -scale
    return Num(round6(rng.uniform(lo, scale)))


def random_polynomial(rng: random.Random, scale: float, degree: int = 2, positive: bool = False) -> Expr:
    lo = 0.0 if positive else -scale
    e: Expr = random_constant(rng, scale, positive)
    for d in range(1, degree + 1):
        c = round6(rng.uniform(lo, scale))
        e = add(e, mul(Num(c), power(X, Num(Fraction(d)))))
    return e


def random_exponential(rng: random.Random, scale: float) -> Expr:
    return mul(Num(round6(rng.uniform(-scale, scale))), call("exp", mul(Num(round6(rng.uniform(-1.0, 1.0))), X)))


def _solves(eq: AbelEquation, span: float, tol: float = 1e-8) -> bool:
    try:
        traj = integrate(eq, float(eq.x0) + span, tol)
    except (AbelError, OverflowError, ZeroDivisionError):
        return False
    return all(1e-2 < z < 1e2 for z in traj.zs)


def random_equation(rng: random.Random, n: int = 1, K: Optional[int] = None, coefficients: str = "mixed",
                    m_range=(-1.0, 3.0), z0_range=(0.5, 2.0), scale: float = 0.5, span: float = 0.3,
                    positive: bool = False) -> AbelEquation:
    """A screened random Abel equation.

    ``coefficients`` is ``"constant"``, ``"polynomial"`` or ``"mixed"``;
    ``positive`` forces positive coefficients (so the right-hand side stays
    positive, as ``n > 1`` needs).
    """
    for _ in range(MAX_TRIES):
        k = K if K is not None else rng.choice((1, 2, 3))
        terms = []
        for _ in range(k):
            kind = coefficients if coefficients != "mixed" else rng.choice(("constant", "polynomial"))
            coeff = random_constant(rng, scale, positive) if kind == "constant" else random_polynomial(rng, scale, positive=positive)
            terms.append(Term(coeff, round6(rng.uniform(*m_range))))
        eq = AbelEquation(n, tuple(terms), round6(rng.uniform(*z0_range)), Fraction(0))
        if _solves(eq, span):
            return eq
    raise RuntimeError("could not draw a well-behaved instance")


def random_alpha(rng: random.Random, lo: float = -0.9, hi: float = 2.0) -> float:
    while True:
        a = round6(rng.uniform(lo, hi))
        if abs(a + 1) > 1e-3:
            return a


def random_bernoulli(rng: random.Random, m_range=(-1.0, 3.0), z0_range=(0.5, 2.0), scale: float = 0.5,
                     span: float = 0.3) -> BernoulliSpec:
    for _ in range(MAX_TRIES):
        def coeff():
            return random_polynomial(rng, scale) if rng.random() < 0.5 else random_exponential(rng, scale)

        m = round6(rng.uniform(*m_range))
        if abs(m - 1) < 0.05:
            continue
        spec = BernoulliSpec(coeff(), coeff(), m, round6(rng.uniform(*z0_range)))
        if _solves(spec.equation(), span):
            return spec
    raise RuntimeError("could not draw a well-behaved Bernoulli instance")


def random_two_term(rng: random.Random, span: float = 0.3) -> AbelEquation:
    """Constant positive coefficients, exponents in [-1, 3] (the reconstruction paths
    integrate coefficients up from 0, which keeps every intermediate solve tame)."""
    for _ in range(MAX_TRIES):
        u = round6(rng.uniform(0.05, 0.8))
        v = round6(rng.uniform(0.05, 0.8))
        eq = make_equation(1, [(Num(u), round6(rng.uniform(-1.0, 3.0))), (Num(v), round6(rng.uniform(-1.0, 3.0)))],
                           round6(rng.uniform(0.5, 1.5)))
        if _solves(eq, span):
            return eq
    raise RuntimeError("could not draw a well-behaved two-term instance")
