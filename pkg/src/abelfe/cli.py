"""Command-line front end.

Exit codes: 0 success, 1 a check failed, 2 usage or malformed input,
3 solver error (partial trajectory still written).
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from typing import Optional, Sequence

from . import __version__
from .closedform import BernoulliSpec, bernoulli_solution_at, separable_solution_at
from .equation import AbelEquation, equation_from_json, parse_number
from .errors import AbelError, MaxDepth, ParseError, SolverError, TransformError
from .functional import Kind, enumerate_monomials, monomials_to_csv, nonuniqueness_demo, oracle_constraint_value
from .solve import integrate
from .suites import (
    DEFAULT_TOLERANCES,
    NEGATIVE_CONTROL,
    DEMO_G1,
    DEMO_G2,
    DEMO_REPRESENTATIONS,
    DEMO_TARGET,
    SUITES,
    brute_force_monomials,
    header,
    run_suite,
    to_jsonl,
)
from .transform import AlphaTransform, apply_to_equation

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _err(msg: str) -> None:
    print(f"abelfe: {msg}", file=sys.stderr)


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _load_config(path: str) -> AbelEquation:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc.strerror or exc}") from None
    try:
        return equation_from_json(text)
    except ParseError as exc:
        raise UsageError(f"malformed config {path!r}: parse error {exc.diagnostic}") from None
    except (AbelError, ValueError, TypeError) as exc:
        raise UsageError(f"malformed config {path!r}: {exc}") from None


def _grid(x0: float, x_end: float, points: int) -> list[float]:
    return [x0 + (x_end - x0) * i / points for i in range(1, points + 1)]


def _values_csv(xs: Sequence[float], zs: Sequence[float]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "z"])
    for x, z in zip(xs, zs):
        w.writerow([f"{x:.17g}", f"{z:.17g}"])
    return buf.getvalue()


def _closed_form(eq: AbelEquation, xs: list[float], tol: float) -> list[float]:
    """Dispatch to the separable or Bernoulli closed form when the equation has that shape."""
    if eq.n != 1:
        raise UsageError("closed forms are available for n = 1 only")
    if eq.K == 1:
        t = eq.terms[0]
        return separable_solution_at(t.coeff, t.exponent, eq.z0, xs, tol, float(eq.x0))
    if eq.K == 2:
        a, b = eq.terms
        if b.exponent == 1 and a.exponent != 1:
            return bernoulli_solution_at(BernoulliSpec(a.coeff, b.coeff, a.exponent, eq.z0, eq.x0), xs, tol)
        if a.exponent == 1 and b.exponent != 1:
            return bernoulli_solution_at(BernoulliSpec(b.coeff, a.coeff, b.exponent, eq.z0, eq.x0), xs, tol)
    raise UsageError("no closed form: need one term, or two terms with exactly one exponent equal to 1")


def cmd_solve(args) -> int:
    eq = _load_config(args.config)
    if args.alpha is not None:
        try:
            eq = apply_to_equation(AlphaTransform(parse_number(args.alpha), eq.n), eq)
        except (TransformError, ValueError, ZeroDivisionError) as exc:
            raise UsageError(f"bad --alpha {args.alpha!r}: {exc}") from None
    x0 = float(eq.x0)
    if not args.x_end > x0:
        raise UsageError(f"--x-end {args.x_end} must exceed x0 = {x0}")
    if not 1e-12 <= args.tol <= 1e-3:
        raise UsageError(f"--tol {args.tol} outside [1e-12, 1e-3]")
    checkpoints = _grid(x0, args.x_end, args.points) if args.points else []
    try:
        if args.method == "closedform":
            xs = checkpoints or [args.x_end]
            _write(args.out, _values_csv([x0] + xs, [float(eq.z0)] + _closed_form(eq, xs, args.tol)))
        else:
            _write(args.out, integrate(eq, args.x_end, args.tol, checkpoints).to_csv())
    except SolverError as exc:
        if exc.trajectory is not None:
            _write(args.out, exc.trajectory.to_csv())
            where = f" to {args.out}" if args.out not in (None, "-") else ""
            _err(f"partial trajectory (status {exc.status}, last x = {exc.trajectory.x_end:.17g}) written{where}")
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_SOLVER
    return EXIT_OK


def _parse_tolerances(items: Sequence[str]) -> dict:
    out = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        if not sep or key not in DEFAULT_TOLERANCES:
            raise UsageError(f"bad --tolerance {item!r}; keys: {', '.join(sorted(DEFAULT_TOLERANCES))}")
        try:
            out[key] = float(val)
        except ValueError:
            raise UsageError(f"bad --tolerance value {val!r}") from None
    return out


def _enumeration_csv(kind: Kind, n: int, K: int, cap: int, value: Optional[int]) -> tuple[str, list, int]:
    if n < 1 or K < 1 or cap < 0:
        raise UsageError("need n >= 1, K >= 1 and cap >= 0")
    value = oracle_constraint_value(kind, n) if value is None else value
    rows = enumerate_monomials(kind, n, K, cap, value)
    return monomials_to_csv(rows, K), rows, value


def cmd_verify(args) -> int:
    if args.suite not in SUITES + ("all",):
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES + ('all',))}")
    if args.seed < 0 or args.count < 1:
        raise UsageError("--seed must be >= 0 and --count >= 1")
    tolerances = _parse_tolerances(args.tolerance)
    fixed = (args.n, args.K, args.cap)
    if args.suite == "enumerate" and all(v is not None for v in fixed):
        # a single (n, K, cap) cell: emit the exponent vectors, checked against brute force
        kind = Kind.of(args.kind)
        text, rows, value = _enumeration_csv(kind, args.n, args.K, args.cap, None)
        _write(args.out, text)
        return EXIT_OK if rows == brute_force_monomials(args.n, args.K, args.cap, value) else EXIT_FAIL
    extra = {"n": args.n, "K": args.K, "cap": args.cap} if args.suite in ("enumerate", "all") else {}
    records = run_suite(args.suite, args.seed, args.count, tolerances, **extra)
    _write(args.out, to_jsonl(records))
    failed = records[-1]["failed"]
    if failed:
        _err(f"{failed} of {records[-1]['checks']} checks failed")
        return EXIT_FAIL
    return EXIT_OK


def cmd_enumerate(args) -> int:
    text, _, _ = _enumeration_csv(Kind.of(args.kind), args.n, args.K, args.cap, args.value)
    _write(args.out, text)
    return EXIT_OK


def cmd_demo(args) -> int:
    reps = args.rep or list(DEMO_REPRESENTATIONS)
    if args.with_control:
        reps.append(NEGATIVE_CONTROL)
    if args.points < 2:
        raise UsageError("--points must be at least 2")
    lo, hi = args.lo, args.hi
    grid = [lo + (hi - lo) * i / (args.points - 1) for i in range(args.points)]
    try:
        results = nonuniqueness_demo(reps, args.g1, args.g2, args.target, grid, args.tol)
    except ParseError as exc:
        raise UsageError(f"parse error {exc.diagnostic}") from None
    records = [header("nonuniqueness", 0, len(reps), {"nonuniqueness": args.tol})]
    records += [{"index": i, **r.to_record()} for i, r in enumerate(results)]
    _write(args.out, to_jsonl(records))
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="abelfe", description="Solve and verify generalized Abel equations.")
    p.add_argument("--version", action="version", version=f"abelfe {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="integrate an equation from a JSON config and write a trajectory CSV")
    s.add_argument("--config", required=True)
    s.add_argument("--x-end", type=float, required=True)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--out", default=None, help="output CSV path (default stdout)")
    s.add_argument("--method", choices=("ode", "closedform"), default="ode")
    s.add_argument("--alpha", default=None, help='solve the alpha-transformed equation; "p/q" is exact')
    s.add_argument("--points", type=int, default=0, help="also sample at this many evenly spaced checkpoints")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="run a seeded verification suite and write a JSON-lines report")
    v.add_argument("--suite", required=True)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--count", type=int, default=20)
    v.add_argument("--out", default=None)
    v.add_argument("--tolerance", action="append", metavar="KEY=VALUE")
    v.add_argument("--n", type=int, default=None)
    v.add_argument("--K", type=int, default=None)
    v.add_argument("--cap", type=int, default=None)
    v.add_argument("--kind", default="lambda")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("enumerate", help="list monomial exponent vectors as CSV")
    e.add_argument("--kind", default="lambda")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--K", type=int, required=True)
    e.add_argument("--cap", type=int, required=True)
    e.add_argument("--value", type=int, default=None, help="constraint value (default: oracle-selected)")
    e.add_argument("--out", default=None)
    e.set_defaults(func=cmd_enumerate)

    d = sub.add_parser("demo-nonuniqueness", help="compare representations after substituting u_k -> g_k(x)")
    d.add_argument("--rep", action="append", help="representation in u1, u2 (repeatable)")
    d.add_argument("--with-control", action="store_true", help="append the -u1^3 negative control")
    d.add_argument("--g1", default=DEMO_G1)
    d.add_argument("--g2", default=DEMO_G2)
    d.add_argument("--target", default=DEMO_TARGET)
    d.add_argument("--lo", type=float, default=0.1)
    d.add_argument("--hi", type=float, default=2.0)
    d.add_argument("--points", type=int, default=50)
    d.add_argument("--tol", type=float, default=1e-10)
    d.add_argument("--out", default=None)
    d.set_defaults(func=cmd_demo)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        _err(str(exc))
        return EXIT_USAGE
    except MaxDepth as exc:
        _err(f"MaxDepth: {exc}")
        return EXIT_SOLVER
    except ValueError as exc:
        # Kind.of and other argument validation
        _err(str(exc))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
