"""Numerical solution of Abel equations.

* :func:`integrate` -- Dormand-Prince 5(4) with a PI step-size controller.
  For ``n > 1`` the principal (positive) real n-th root of the right-hand
  side is integrated.
* :func:`sensitivities` -- logarithmic parameter sensitivities
  ``Lambda_k = d ln z / d u_k`` and ``Omega_k = d ln z / d m_k`` of a
  constant-coefficient equation, through the forward variational equations
  (n = 1) or central differences of full solves (any n).
* :func:`quadrature` -- adaptive Simpson rule.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .equation import AbelEquation
from .errors import BlowUp, DomainError, DomainExit, InvalidEquation, MaxDepth

BLOWUP_THRESHOLD = 1e12
MIN_STEP = 1e-14

REACHED_END = "reached_end"
BLOW_UP = "blow_up"
DOMAIN_EXIT = "domain_exit"


@dataclass(frozen=True)
class Trajectory:
    xs: tuple[float, ...]
    zs: tuple[float, ...]
    tol: float
    status: str = REACHED_END
    steps_rejected: int = 0

    @property
    def x_end(self) -> float:
        return self.xs[-1]

    @property
    def z_end(self) -> float:
        return self.zs[-1]

    def value_at(self, x: float) -> float:
        """Value at a sample abscissa (checkpoints are always samples)."""
        for xi, zi in zip(self.xs, self.zs):
            if xi == x:
                return zi
        raise KeyError(f"x = {x} is not a sample of this trajectory")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "z"])
        for x, z in zip(self.xs, self.zs):
            w.writerow([f"{x:.17g}", f"{z:.17g}"])
        return buf.getvalue()


# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
# difference between the 5th and embedded 4th order weights
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

_SAFE = 0.9
_BETA = 0.04
_EXPO = 0.2 - 0.75 * _BETA
_FAC_MIN = 0.2  # step may shrink at most 5x
_FAC_MAX = 10.0


@dataclass
class _Result:
    xs: list[float] = field(default_factory=list)
    ys: list[list[float]] = field(default_factory=list)
    rejected: int = 0


def _norm(e: Sequence[float], y0: Sequence[float], y1: Sequence[float], tol: float) -> float:
    acc = 0.0
    for ei, a, b in zip(e, y0, y1):
        sc = tol * (1.0 + max(abs(a), abs(b)))
        acc += (ei / sc) ** 2
    return math.sqrt(acc / len(e))


def _initial_step(f, x0, y0, f0, x_end, tol) -> float:
    span = x_end - x0
    d0 = math.sqrt(sum((y / (tol * (1 + abs(y)))) ** 2 for y in y0) / len(y0))
    d1 = math.sqrt(sum((g / (tol * (1 + abs(y)))) ** 2 for g, y in zip(f0, y0)) / len(y0))
    h = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    return min(h, span, 0.1 * span if span > 0 else h)


def dopri(
    f: Callable[[float, list[float]], list[float]],
    x0: float,
    y0: Sequence[float],
    x_end: float,
    tol: float,
    checkpoints: Iterable[float] = (),
    guard: Optional[Callable[[float, list[float]], None]] = None,
) -> _Result:
    """Integrate ``y' = f(x, y)`` from ``x0`` to ``x_end``.

    Every value in ``checkpoints`` becomes a step endpoint.  ``f`` may raise
    :class:`DomainError` at trial stages; the step is then halved.  ``guard``
    runs on each accepted state and raises to terminate.  On termination the
    partial result is attached to the raised error as ``.partial``.
    """
    y = [float(v) for v in y0]
    x = float(x0)
    targets = sorted({float(c) for c in checkpoints if x0 < c < x_end} | {float(x_end)})
    res = _Result([x], [list(y)])
    k1 = f(x, y)
    h = _initial_step(f, x, y, k1, x_end, tol)
    facold = 1e-4
    dim = len(y)
    ti = 0
    last_domain = False
    while ti < len(targets):
        target = targets[ti]
        if h < MIN_STEP:
            err_cls = DomainExit if last_domain else BlowUp
            exc = err_cls(f"step size fell below {MIN_STEP:g} at x = {x:.17g}")
            exc.partial = res
            raise exc
        hit = x + h >= target - 1e-15 * max(1.0, abs(target))
        step = target - x if hit else h
        try:
            ks = [k1]
            for s in range(1, 7):
                a = _A[s]
                yi = [y[i] + step * sum(a[j] * ks[j][i] for j in range(s)) for i in range(dim)]
                ks.append(f(x + _C[s] * step, yi))
            # stage 7 is evaluated at the 5th-order solution (FSAL)
            ynew = yi
        except (DomainError, OverflowError):
            last_domain = True
            h = 0.5 * step
            res.rejected += 1
            continue
        last_domain = False
        e = [step * sum(_E[j] * ks[j][i] for j in range(7)) for i in range(dim)]
        err = _norm(e, y, ynew, tol)
        if not math.isfinite(err):
            h = 0.5 * step
            res.rejected += 1
            continue
        fac11 = err**_EXPO if err > 0 else 0.0
        if err <= 1.0:
            fac = fac11 / facold**_BETA
            fac = min(1 / _FAC_MIN, max(1 / _FAC_MAX, fac / _SAFE))
            x = target if hit else x + step
            y = ynew
            k1 = ks[6]
            facold = max(err, 1e-4)
            res.xs.append(x)
            res.ys.append(list(y))
            if guard is not None:
                try:
                    guard(x, y)
                except Exception as exc:
                    exc.partial = res
                    raise
            if hit:
                ti += 1
                # keep the controller's proposal for the next interval
                h = max(h, step / fac) if step < h else step / fac
            else:
                h = step / fac
        else:
            h = step / min(1 / _FAC_MIN, fac11 / _SAFE)
            res.rejected += 1
    return res


def _check_tol(tol: float):
    if not 1e-12 <= tol <= 1e-3:
        raise ValueError(f"tol must lie in [1e-12, 1e-3], got {tol}")


def _rhs_function(eq: AbelEquation) -> Callable[[float, list[float]], list[float]]:
    rhs = eq.rhs
    if eq.n == 1:
        return lambda x, y: [rhs(x, y[0])]
    inv_n = 1.0 / eq.n

    def f(x, y):
        r = rhs(x, y[0])
        if r <= 0:
            raise DomainError(f"right-hand side {r} is not positive; no principal {eq.n}-th root")
        return [r**inv_n]

    return f


def _guard_for(eq: AbelEquation):
    def guard(x, y):
        z = y[0]
        if not math.isfinite(z) or abs(z) > BLOWUP_THRESHOLD:
            raise BlowUp(f"|z| exceeded {BLOWUP_THRESHOLD:g} at x = {x:.17g}")
        # trajectories stay on the positive half-line even for integer exponents
        if z <= 0:
            raise DomainExit(f"z = {z:.6g} <= 0 at x = {x:.17g}")
        if eq.n > 1 and eq.rhs(x, z) <= 0:
            raise DomainExit(f"right-hand side vanished at x = {x:.17g}")

    return guard


def integrate(eq: AbelEquation, x_end: float, tol: float = 1e-10, checkpoints: Iterable[float] = ()) -> Trajectory:
    """Solve ``(dz/dx)^n = sum g_k z^{m_k}``, ``z(x0) = z0`` on ``[x0, x_end]``.

    Raises :class:`BlowUp` or :class:`DomainExit`; the partial trajectory
    (with its termination status) is available as ``exc.trajectory``.
    """
    _check_tol(tol)
    x0 = float(eq.x0)
    if not x_end > x0:
        raise ValueError(f"x_end = {x_end} must exceed x0 = {x0}")
    z0 = float(eq.z0)
    if eq.n > 1 and not eq.rhs(x0, z0) > 0:
        raise DomainExit(f"right-hand side is not positive at x0 = {x0}",
                         Trajectory((x0,), (z0,), tol, DOMAIN_EXIT))
    try:
        res = dopri(_rhs_function(eq), x0, [z0], float(x_end), tol, checkpoints, _guard_for(eq))
    except (BlowUp, DomainExit) as exc:
        part = exc.partial
        exc.trajectory = Trajectory(tuple(part.xs), tuple(y[0] for y in part.ys), tol, exc.status, part.rejected)
        raise
    return Trajectory(tuple(res.xs), tuple(y[0] for y in res.ys), tol, REACHED_END, res.rejected)


def solve_at(eq: AbelEquation, xs: Sequence[float], tol: float = 1e-10) -> list[float]:
    """z at each abscissa in ``xs`` (all > x0)."""
    traj = integrate(eq, max(xs), tol, checkpoints=xs)
    return [traj.value_at(float(x)) for x in xs]


# ---------------------------------------------------------------------------
# Sensitivities

@dataclass(frozen=True)
class SensitivityBundle:
    z_end: float
    lambdas: tuple[float, ...]
    omegas: tuple[float, ...]
    method: str  # "variational" | "finite-difference"


def _variational_rhs(u: Sequence[float], m: Sequence[float]):
    K = len(u)

    def f(x, y):
        z = y[0]
        if z <= 0:
            raise DomainError(f"z = {z} left the positive half-line")
        lnz = math.log(z)
        zm = [z**mk for mk in m]
        jac = sum(u[j] * m[j] * zm[j] for j in range(K)) / z
        out = [sum(u[j] * zm[j] for j in range(K))]
        out += [zm[k] + jac * y[1 + k] for k in range(K)]
        out += [u[k] * zm[k] * lnz + jac * y[1 + K + k] for k in range(K)]
        return out

    return f


def _variational(eq: AbelEquation, x_end: float, tol: float) -> SensitivityBundle:
    u = [float(v) for v in eq.coefficient_values()]
    m = [float(v) for v in eq.exponents]
    K = eq.K
    zguard = _guard_for(eq)

    def guard(x, y):
        zguard(x, y)
        if any(not math.isfinite(v) for v in y):
            raise BlowUp(f"sensitivities diverged at x = {x:.17g}")

    y0 = [float(eq.z0)] + [0.0] * (2 * K)
    res = dopri(_variational_rhs(u, m), float(eq.x0), y0, float(x_end), tol, (), guard)
    y = res.ys[-1]
    z = y[0]
    return SensitivityBundle(z, tuple(y[1 + k] / z for k in range(K)), tuple(y[1 + K + k] / z for k in range(K)),
                             "variational")


def _central(fn: Callable[[float], float], v: float, rel_step: float) -> float:
    h = rel_step * max(1.0, abs(v))
    return (fn(v + h) - fn(v - h)) / (2 * h)


def finite_difference_sensitivities(eq: AbelEquation, x_end: float, tol: float = 1e-12,
                                    rel_step: float = 1e-5) -> SensitivityBundle:
    """Central differences of ``ln z(x_end)`` in every coefficient and exponent slot."""
    u = [float(v) for v in eq.coefficient_values()]
    m = [float(v) for v in eq.exponents]

    def lnz(uu, mm):
        return math.log(integrate(eq.with_constants(uu, mm), x_end, tol).z_end)

    lambdas, omegas = [], []
    for k in range(eq.K):
        lambdas.append(_central(lambda v: lnz(u[:k] + [v] + u[k + 1:], m), u[k], rel_step))
        omegas.append(_central(lambda v: lnz(u, m[:k] + [v] + m[k + 1:]), m[k], rel_step))
    z = integrate(eq, x_end, tol).z_end
    return SensitivityBundle(z, tuple(lambdas), tuple(omegas), "finite-difference")


def sensitivities(eq: AbelEquation, x_end: float, tol: float = 1e-11, method: str = "auto") -> SensitivityBundle:
    """Logarithmic sensitivities of ``z(x_end)`` to the constant coefficients
    and the exponents.

    ``method="auto"`` uses the variational equations for n = 1 and central
    differences otherwise.
    """
    if not eq.is_constant_coefficient:
        raise InvalidEquation("sensitivities need constant coefficients")
    _check_tol(tol)
    if method == "auto":
        method = "variational" if eq.n == 1 else "finite-difference"
    if method == "variational":
        if eq.n != 1:
            raise InvalidEquation("variational sensitivities are derived for n = 1 only")
        try:
            return _variational(eq, x_end, tol)
        except (BlowUp, DomainExit) as exc:
            part = exc.partial
            exc.trajectory = Trajectory(tuple(part.xs), tuple(y[0] for y in part.ys), tol, exc.status)
            raise
    if method == "finite-difference":
        return finite_difference_sensitivities(eq, x_end, tol)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# Quadrature

MAX_DEPTH = 30


def quadrature(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10) -> float:
    """Adaptive Simpson estimate of the integral of ``f`` over ``[a, b]``.

    Raises :class:`MaxDepth` if some subinterval still fails the error
    test after 30 bisections.
    """
    if a == b:
        return 0.0
    if b < a:
        return -quadrature(f, b, a, tol)
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) * (fa + 4 * fm + fb) / 6
    return _simpson(f, a, b, fa, fm, fb, whole, tol, 0)


def _simpson(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) * (fa + 4 * flm + fm) / 6
    right = (b - m) * (fm + 4 * frm + fb) / 6
    delta = left + right - whole
    if abs(delta) <= 15 * tol:
        return left + right + delta / 15
    if depth + 1 >= MAX_DEPTH:
        raise MaxDepth(f"adaptive Simpson did not converge on [{a}, {b}] within {MAX_DEPTH} levels")
    return (_simpson(f, a, m, fa, flm, fm, left, tol / 2, depth + 1)
            + _simpson(f, m, b, fm, frm, fb, right, tol / 2, depth + 1))
