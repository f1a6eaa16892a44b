"""Linear functional equations satisfied by the logarithmic sensitivities,
and the instruments that check them.

Under the alpha-transform (coefficients ``u -> ((n+a)/n)^n u``, exponents
with ``m - n -> n/(n+a) (m - n)``) the solution map ``F`` obeys
``F(u, m) = F(u_bar, m_bar)^(n/(n+a))``.  Differentiating its logarithm gives

    Lambda_k(u, m) = ((n+a)/n)^(n-1) * Lambda_k(u_bar, m_bar)
    Omega_k(u, m)  = (n/(n+a))^2     * Omega_k(u_bar, m_bar)

A monomial ``c * prod u_j^a_j * prod (m_j - n)^b_j`` picks up the factor
``((n+a)/n)^(n*sum(a) - sum(b))`` under the transform, so it solves the
Lambda equation iff ``n*sum(a) - sum(b) = 1 - n`` and the Omega equation iff
``n*sum(a) - sum(b) = 2``.  The Lambda value is found by
:func:`oracle_constraint_value` rather than hard-coded.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Optional, Sequence, Union

from .closedform import separable_solution
from .equation import AbelEquation
from .errors import AbelError, DomainError, InvalidEquation
from .expr import Expr, Number, as_expr, compile_expr, evaluate, free_vars, to_text
from .solve import quadrature, sensitivities, solve_at
from .transform import AlphaTransform, apply_to_equation, apply_to_parameters, exact_number


class Kind(str, enum.Enum):
    LAMBDA = "lambda"
    OMEGA = "omega"

    @classmethod
    def of(cls, value) -> "Kind":
        if isinstance(value, Kind):
            return value
        aliases = {"lambda": cls.LAMBDA, "Λ": cls.LAMBDA, "omega": cls.OMEGA, "Ω": cls.OMEGA}
        key = str(value).strip()
        try:
            return aliases[key if key in aliases else key.lower()]
        except KeyError:
            raise ValueError(f"unknown sensitivity kind {value!r}") from None


def _json_number(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else v.numerator
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


# ---------------------------------------------------------------------------
# Monomial ansatz

@dataclass(frozen=True)
class MonomialTerm:
    """``c * prod_j u_j^a_j * prod_j (m_j - n)^b_j``."""

    a: tuple[int, ...]
    b: tuple[int, ...]
    c: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(self.a))
        object.__setattr__(self, "b", tuple(self.b))
        object.__setattr__(self, "c", Fraction(self.c))
        if len(self.a) != len(self.b):
            raise ValueError("a and b must have the same length K")
        if any((not isinstance(v, int)) or v < 0 for v in self.a + self.b):
            raise ValueError("monomial exponents must be nonnegative integers")

    @property
    def K(self) -> int:
        return len(self.a)

    def constraint_value(self, n: int) -> int:
        return n * sum(self.a) - sum(self.b)

    def evaluate(self, u: Sequence, m: Sequence, n: int):
        out = self.c
        for uj, aj in zip(u, self.a):
            out *= uj**aj
        for mj, bj in zip(m, self.b):
            out *= (mj - n) ** bj
        return out

    def to_record(self) -> dict:
        return {"a": list(self.a), "b": list(self.b), "c": _json_number(self.c)}


def _compositions(total: int, parts: int):
    """All tuples of ``parts`` nonnegative ints summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def expected_factor(kind, n: int, alpha) -> Number:
    """Scale relating a solution at (u, m) to its value at (u_bar, m_bar)."""
    kind = Kind.of(kind)
    t = AlphaTransform(alpha, n)
    if kind is Kind.LAMBDA:
        return t.ratio ** (n - 1)
    return (1 / t.ratio) ** 2


def alternative_lambda_constraint(n: int) -> int:
    """The sign-flipped Lambda candidate ``n - 1``; it matches the oracle value only at n = 1."""
    return n - 1


# exact sample point; u_j nonzero and m_j != n so every monomial is nonzero
def _exact_points(K: int, n: int) -> list[tuple[list[Fraction], list[Fraction]]]:
    return [([Fraction(j + 2, 3) for j in range(K)], [n + Fraction(2 * j + 1, 5) for j in range(K)])]


@dataclass(frozen=True)
class ScalingCheck:
    kind: Kind
    alpha: Number
    lhs: Number
    rhs: Number
    passed: bool
    index: Optional[int] = None  # term index k (1-based) for numeric checks

    def to_record(self) -> dict:
        rec = {"kind": self.kind.value, "alpha": _json_number(self.alpha), "lhs": _json_number(self.lhs),
               "rhs": _json_number(self.rhs), "pass": self.passed}
        if self.index is not None:
            rec["k"] = self.index
        return rec


@dataclass(frozen=True)
class ScalingReport:
    kind: str
    n: int
    mode: str  # "exact" | "numeric"
    checks: tuple[ScalingCheck, ...]
    monomials: tuple[MonomialTerm, ...] = ()
    constraint_value: Optional[int] = None

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def to_record(self) -> dict:
        rec = {"kind": self.kind, "n": self.n, "mode": self.mode, "pass": self.passed,
               "checks": [c.to_record() for c in self.checks]}
        if self.monomials:
            rec["monomials"] = [mono.to_record() for mono in self.monomials]
        if self.constraint_value is not None:
            rec["constraint_value"] = self.constraint_value
        return rec


def verify_scaling_exact(mono: Union[MonomialTerm, Sequence[MonomialTerm]], kind, n: int,
                         alpha: Union[Number, Iterable[Number]]) -> ScalingReport:
    """Check ``M(u, m) = factor * M(u_bar, m_bar)`` as an exact rational identity.

    ``mono`` may be a single monomial or a list read as their sum; ``alpha``
    a single value or several.  Substituting the transform into a monomial
    only rescales its coefficient, so the identity holds iff, for every
    distinct exponent pattern, the summed coefficient is reproduced exactly.
    ``lhs``/``rhs`` in each check are the two sides at an exact sample point.
    """
    kind = Kind.of(kind)
    monos = (mono,) if isinstance(mono, MonomialTerm) else tuple(mono)
    if not monos:
        raise ValueError("need at least one monomial")
    K = monos[0].K
    if any(mn.K != K for mn in monos):
        raise ValueError("all monomials must share K")
    combined: dict[tuple, Fraction] = {}
    for mn in monos:
        combined[(mn.a, mn.b)] = combined.get((mn.a, mn.b), Fraction(0)) + mn.c
    alphas = [alpha] if isinstance(alpha, (int, Fraction, float, str)) else list(alpha)
    ((u, m),) = _exact_points(K, n)
    checks = []
    for al in alphas:
        t = AlphaTransform(al, n)
        factor = expected_factor(kind, n, t.alpha)
        u_scale = t.map_coefficient(Fraction(1))
        shift_scale = t.map_exponent(n + 1) - n  # (m_bar - n) / (m - n)
        ok = all(c == factor * c * u_scale ** sum(a) * shift_scale ** sum(b) for (a, b), c in combined.items())
        ub, mb = apply_to_parameters(t, u, m)
        lhs = sum((mn.evaluate(u, m, n) for mn in monos), Fraction(0))
        rhs = factor * sum((mn.evaluate(ub, mb, n) for mn in monos), Fraction(0))
        checks.append(ScalingCheck(kind, t.alpha, lhs, rhs, ok))
    values = {mn.constraint_value(n) for mn in monos}
    return ScalingReport(kind.value, n, "exact", tuple(checks), monos, values.pop() if len(values) == 1 else None)


_ORACLE_ALPHAS = (Fraction(1, 3), Fraction(2), Fraction(-1, 2), Fraction(7, 5))


@lru_cache(maxsize=None)
def oracle_constraint_value(kind, n: int) -> int:
    """The unique ``n*sum(a) - sum(b)`` for which monomials satisfy the
    functional equation, found by exact substitution over a search window."""
    kind = Kind.of(kind)
    passing = []
    for value in range(-4 * n - 4, 4 * n + 5):
        s = 0 if value <= 0 else -(-value // n)
        mono = MonomialTerm((s,), (n * s - value,))
        alphas = [a for a in _ORACLE_ALPHAS if a != -n]
        if verify_scaling_exact(mono, kind, n, alphas).passed:
            passing.append(value)
    if len(passing) != 1:
        raise AbelError(f"expected one admissible constraint value for {kind.value}, n={n}; found {passing}")
    return passing[0]


def enumerate_monomials(kind, n: int, K: int, degree_cap: int,
                        constraint_value: Optional[int] = None) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """All nonnegative ``(a, b)`` with ``sum(a) <= degree_cap`` and
    ``n*sum(a) - sum(b) = constraint_value`` (oracle value by default)."""
    if degree_cap < 0:
        raise ValueError("degree_cap must be nonnegative")
    if n < 1 or K < 1:
        raise ValueError("n and K must be positive")
    if constraint_value is None:
        constraint_value = oracle_constraint_value(kind, n)
    out = []
    for s in range(degree_cap + 1):
        sb = n * s - constraint_value
        if sb < 0:
            continue
        for a in _compositions(s, K):
            for b in _compositions(sb, K):
                out.append((a, b))
    return sorted(out, key=lambda ab: (sum(ab[0]), ab[0], ab[1]))


def monomials_to_csv(rows: Sequence[tuple[Sequence[int], Sequence[int]]], K: int) -> str:
    header = [f"a_{j}" for j in range(1, K + 1)] + [f"b_{j}" for j in range(1, K + 1)]
    lines = [",".join(header)]
    lines += [",".join(str(v) for v in tuple(a) + tuple(b)) for a, b in rows]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Numeric scaling checks

def _close(a: float, b: float, rtol: float, atol: float = 1e-12) -> bool:
    return abs(a - b) <= rtol * max(abs(a), abs(b)) + atol


def scaling_identity_numeric(fn: Callable[[Sequence[float], Sequence[float]], float], kind, n: int, alpha,
                             u: Sequence[float], m: Sequence[float], tol: float) -> ScalingCheck:
    """Float check of the functional equation for an arbitrary candidate ``fn(u, m)``."""
    kind = Kind.of(kind)
    t = AlphaTransform(alpha, n)
    ub, mb = apply_to_parameters(t, [float(v) for v in u], [float(v) for v in m])
    lhs = float(fn(list(map(float, u)), list(map(float, m))))
    rhs = float(expected_factor(kind, n, t.alpha)) * float(fn(ub, mb))
    return ScalingCheck(kind, t.alpha, lhs, rhs, _close(lhs, rhs, tol))


def verify_scaling_numeric(eq: AbelEquation, t: AlphaTransform, X: float, tol: float = 1e-4,
                           solver_tol: float = 1e-11, method: str = "auto") -> ScalingReport:
    """Compare sensitivities before and after the transform at ``x = X``.

    Both sides come from :func:`sensitivities` (variational for n = 1,
    central differences otherwise, unless ``method`` says otherwise).
    """
    if not eq.is_constant_coefficient:
        raise InvalidEquation("numeric scaling checks need constant coefficients")
    before = sensitivities(eq, X, solver_tol, method)
    after = sensitivities(apply_to_equation(t, eq), X, solver_tol, method)
    lam = float(expected_factor(Kind.LAMBDA, eq.n, t.alpha))
    om = float(expected_factor(Kind.OMEGA, eq.n, t.alpha))
    checks = []
    for k in range(eq.K):
        l, r = before.lambdas[k], lam * after.lambdas[k]
        checks.append(ScalingCheck(Kind.LAMBDA, t.alpha, l, r, _close(l, r, tol), k + 1))
        l, r = before.omegas[k], om * after.omegas[k]
        checks.append(ScalingCheck(Kind.OMEGA, t.alpha, l, r, _close(l, r, tol), k + 1))
    return ScalingReport("both", eq.n, "numeric", tuple(checks))


# ---------------------------------------------------------------------------
# Power relation  z = w^(n/(n+alpha))  and its beta-power closure

@dataclass(frozen=True)
class PowerRelationReport:
    alpha: Number
    beta: float
    xs: tuple[float, ...]
    z: tuple[float, ...]
    w: tuple[float, ...]
    base_error: float
    closure_error: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.base_error <= self.tol and self.closure_error <= self.tol

    def to_record(self) -> dict:
        return {"alpha": _json_number(self.alpha), "beta": self.beta, "base_error": self.base_error,
                "closure_error": self.closure_error, "tol": self.tol, "pass": self.passed}


def verify_power_relation(eq: AbelEquation, t: AlphaTransform, beta: float, X: float, tol: float = 1e-6,
                          solver_tol: float = 1e-10, checkpoints: int = 10) -> PowerRelationReport:
    """Solve the equation and its transform, compare ``z`` with
    ``w^(n/(n+alpha))`` and ``z^beta`` with ``(w^beta)^(n/(n+alpha))`` at
    ``checkpoints`` evenly spaced points of ``(x0, X]`` (max relative error)."""
    x0 = float(eq.x0)
    xs = [x0 + (X - x0) * (i + 1) / checkpoints for i in range(checkpoints)]
    z = solve_at(eq, xs, solver_tol)
    w = solve_at(apply_to_equation(t, eq), xs, solver_tol)
    inv = 1.0 / float(t.ratio)
    base = max(abs(zi - wi**inv) / abs(zi) for zi, wi in zip(z, w))
    closure = max(abs(zi**beta - (wi**beta) ** inv) / abs(zi**beta) for zi, wi in zip(z, w))
    return PowerRelationReport(t.alpha, beta, tuple(xs), tuple(z), tuple(w), base, closure, tol)


# ---------------------------------------------------------------------------
# n = 1: the substitution alpha = m_k - 1 and the mixed functional-differential residual

@dataclass(frozen=True)
class Slots:
    """Arguments of the solution map: coefficients, exponents and the initial value."""

    u: tuple
    m: tuple
    z0: Number

    def __post_init__(self):
        object.__setattr__(self, "u", tuple(self.u))
        object.__setattr__(self, "m", tuple(self.m))
        if len(self.u) != len(self.m):
            raise ValueError("u and m must have equal length")

    def to_record(self) -> dict:
        return {"u": [_json_number(v) if not isinstance(v, Expr) else to_text(v) for v in self.u],
                "m": [_json_number(v) for v in self.m], "z0": _json_number(self.z0)}


def _slots_of(source) -> Slots:
    if isinstance(source, Slots):
        return source
    if isinstance(source, AbelEquation):
        if source.n != 1:
            raise InvalidEquation("the alpha = m_k - 1 substitution is defined for n = 1")
        u = source.coefficient_values() if source.is_constant_coefficient else tuple(t.coeff for t in source.terms)
        return Slots(u, source.exponents, source.z0)
    raise TypeError(f"expected Slots or AbelEquation, got {type(source).__name__}")


def alpha_substitution(source, k: int) -> Slots:
    """Slots at which ``F`` equals ``z^{m_k}``: the n = 1 transform with
    ``alpha = m_k - 1``, initial value included (``z0 -> z0^{m_k}``)."""
    s = _slots_of(source)
    if not 1 <= k <= len(s.m):
        raise IndexError(f"term index {k} out of range")
    mk = exact_number(s.m[k - 1])
    if mk == 0:
        raise DomainError("m_k = 0 makes the exponent map singular (alpha = -1)")
    t = AlphaTransform(mk - 1, 1)
    u, m = apply_to_parameters(t, list(s.u), list(s.m))
    return Slots(u, m, t.map_initial(s.z0))


SlotFunction = Callable[[Slots], float]


def slot_evaluator(expr, u_names: Sequence[str], m_names: Sequence[str], z0_name: str = "z0") -> SlotFunction:
    """Turn an expression in named slots into a candidate ``F(slots)``."""
    expr = as_expr(expr)
    names = list(u_names) + list(m_names) + [z0_name]
    fn = compile_expr(expr, names)

    def F(s: Slots) -> float:
        return fn(*map(float, s.u), *map(float, s.m), float(s.z0))

    F.__doc__ = to_text(expr)
    return F


@dataclass(frozen=True)
class ResidualSample:
    slots: Slots
    left: float
    right: float
    residual: float
    partials: tuple[float, ...] = ()
    error: Optional[str] = None

    def to_record(self) -> dict:
        rec = {"slots": self.slots.to_record(), "left": self.left, "right": self.right,
               "residual": self.residual, "partials": list(self.partials)}
        if self.error is not None:
            rec["error"] = self.error
        return rec


def partial_u(F: SlotFunction, s: Slots, k: int, rel_step: float = 1e-6) -> float:
    """Central difference of ``F`` in coefficient slot ``k`` (0-based)."""
    uk = float(s.u[k])
    h = rel_step * max(1.0, abs(uk))
    up = list(s.u)
    up[k] = uk + h
    dn = list(s.u)
    dn[k] = uk - h
    return (F(Slots(up, s.m, s.z0)) - F(Slots(dn, s.m, s.z0))) / (2 * h)


def mixed_residual(F: SlotFunction, derivative_callables: Sequence[Callable[[float], float]],
                   samples: Iterable[Slots], rel_step: float = 1e-6) -> list[ResidualSample]:
    """Residual of the n = 1 mixed functional-differential equation
    ``sum_k F_{u,k} phi_k(u_k) - sum_k u_k F(slots after alpha = m_k - 1)``.

    ``derivative_callables[k]`` is ``g_k' o g_k^{-1}`` expressed in ``u_k``.
    Candidates are black boxes; nothing here assumes the residual vanishes.
    """
    out = []
    for s in samples:
        s = _slots_of(s)
        try:
            K = len(s.u)
            if len(derivative_callables) != K:
                raise ValueError(f"need {K} derivative callables, got {len(derivative_callables)}")
            partials = tuple(partial_u(F, s, k, rel_step) for k in range(K))
            left = sum(partials[k] * derivative_callables[k](float(s.u[k])) for k in range(K))
            right = sum(float(s.u[k]) * F(alpha_substitution(s, k + 1)) for k in range(K))
            out.append(ResidualSample(s, left, right, left - right, partials))
        except (DomainError, ZeroDivisionError, OverflowError, ValueError) as exc:
            nan = float("nan")
            out.append(ResidualSample(s, nan, nan, nan, (), f"{type(exc).__name__}: {exc}"))
    return out


# ---------------------------------------------------------------------------
# Two-term boundary reconstruction and mixed partials

def _two_term(eq: AbelEquation) -> tuple[float, float, float, float]:
    if eq.n != 1 or eq.K != 2 or not eq.is_constant_coefficient:
        raise InvalidEquation("expected a two-term, constant-coefficient equation with n = 1")
    u, v = (float(c) for c in eq.coefficient_values())
    m, p = (float(e) for e in eq.exponents)
    return u, v, m, p


@dataclass(frozen=True)
class ReconstructionReport:
    direct: float
    boundary_u0: float
    boundary_v0: float
    via_u: float
    via_v: float
    tol: float

    @property
    def error_u(self) -> float:
        return abs(self.via_u - self.direct) / abs(self.direct)

    @property
    def error_v(self) -> float:
        return abs(self.via_v - self.direct) / abs(self.direct)

    @property
    def error_between(self) -> float:
        return abs(self.via_u - self.via_v) / abs(self.direct)

    @property
    def passed(self) -> bool:
        return self.error_u <= self.tol and self.error_v <= self.tol and self.error_between <= 2 * self.tol

    def to_record(self) -> dict:
        return {"direct": self.direct, "via_u": self.via_u, "via_v": self.via_v, "error_u": self.error_u,
                "error_v": self.error_v, "error_between": self.error_between, "tol": self.tol, "pass": self.passed}


def reconstruct_from_boundary(eq: AbelEquation, X: float, tol: float = 1e-3, solver_tol: float = 1e-10,
                              quad_tol: float = 1e-8) -> ReconstructionReport:
    """Rebuild ``F(u, v, m, p)`` at ``x = X`` from the one-term boundary
    solutions and the integrated coefficient sensitivities:

        F(0, v, m, p) * exp(int_0^u Lambda_u(theta, v) dtheta)
        F(u, 0, m, p) * exp(int_0^v Lambda_v(u, theta) dtheta)
    """
    u, v, m, p = _two_term(eq)
    x0 = float(eq.x0)
    z0 = float(eq.z0)
    direct = solve_at(eq, [X], solver_tol)[0]

    def lam(k: int, uu: float, vv: float) -> float:
        return sensitivities(eq.with_constants([uu, vv]), X, solver_tol, "variational").lambdas[k]

    boundary_u0 = separable_solution(v, p, z0, X, tol=quad_tol, x0=x0)
    boundary_v0 = separable_solution(u, m, z0, X, tol=quad_tol, x0=x0)
    via_u = boundary_u0 * math.exp(quadrature(lambda th: lam(0, th, v), 0.0, u, quad_tol))
    via_v = boundary_v0 * math.exp(quadrature(lambda th: lam(1, u, th), 0.0, v, quad_tol))
    return ReconstructionReport(direct, boundary_u0, boundary_v0, via_u, via_v, tol)


@dataclass(frozen=True)
class MixedPartial:
    pair: tuple[str, str]
    first: float  # d/d(pair[1]) of the pair[0]-sensitivity
    second: float  # d/d(pair[0]) of the pair[1]-sensitivity
    passed: bool

    def to_record(self) -> dict:
        return {"pair": list(self.pair), "first": self.first, "second": self.second, "pass": self.passed}


@dataclass(frozen=True)
class MixedPartialReport:
    checks: tuple[MixedPartial, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_record(self) -> dict:
        return {"checks": [c.to_record() for c in self.checks], "pass": self.passed}


_SLOT_INDEX = {"u": 0, "v": 1, "m": 2, "p": 3}


def mixed_partial_check(eq: AbelEquation, X: float, h: float = 1e-4, rtol: float = 1e-3, atol: float = 1e-6,
                        pairs: Sequence[tuple[str, str]] = (("u", "v"), ("u", "m"), ("m", "p")),
                        solver_tol: float = 1e-12) -> MixedPartialReport:
    """Symmetry of second derivatives of ``ln F`` in slot pairs.

    For a pair (s, t) the two orderings are the central difference in ``t``
    of the ``s``-sensitivity and the central difference in ``s`` of the
    ``t``-sensitivity, with sensitivities from the variational equations.
    """
    base = list(_two_term(eq))

    def sens(slot: str, vals: Sequence[float]) -> float:
        b = sensitivities(eq.with_constants(vals[:2], vals[2:]), X, solver_tol, "variational")
        i = _SLOT_INDEX[slot]
        return b.lambdas[i] if i < 2 else b.omegas[i - 2]

    def d(slot_fn: str, slot_var: str) -> float:
        i = _SLOT_INDEX[slot_var]
        step = h * max(1.0, abs(base[i]))
        hi, lo = list(base), list(base)
        hi[i] += step
        lo[i] -= step
        return (sens(slot_fn, hi) - sens(slot_fn, lo)) / (2 * step)

    checks = []
    for s, t in pairs:
        first, second = d(s, t), d(t, s)
        checks.append(MixedPartial((s, t), first, second, _close(first, second, rtol, atol)))
    return MixedPartialReport(tuple(checks))


# ---------------------------------------------------------------------------
# Non-uniqueness of multivariable representations

@dataclass(frozen=True)
class RepresentationResult:
    representation: str
    max_deviation: float
    passed: bool
    error: Optional[str] = None

    def to_record(self) -> dict:
        rec = {"representation": self.representation, "max_deviation": self.max_deviation, "pass": self.passed}
        if self.error is not None:
            rec["error"] = self.error
        return rec


def nonuniqueness_demo(representations: Sequence, g1, g2, target, grid: Sequence[float],
                       tol: float = 1e-10) -> list[RepresentationResult]:
    """Substitute ``u1 -> g1(x)``, ``u2 -> g2(x)`` into each representation
    and measure its largest deviation from ``target(x)`` over ``grid``."""
    g1, g2, target = as_expr(g1), as_expr(g2), as_expr(target)
    tf = compile_expr(target, ["x"])
    out = []
    for rep in representations:
        rep = as_expr(rep)
        text = to_text(rep)
        try:
            extra = free_vars(rep) - {"u1", "u2"}
            if extra:
                raise ValueError(f"representation uses slots {sorted(extra)} beyond u1, u2")
            fx = compile_expr(evaluate(rep, {"u1": g1, "u2": g2}), ["x"])
            dev = max(abs(fx(x) - tf(x)) for x in grid)
            out.append(RepresentationResult(text, dev, dev <= tol))
        except (DomainError, ValueError) as exc:
            out.append(RepresentationResult(text, float("inf"), False, f"{type(exc).__name__}: {exc}"))
    return out
