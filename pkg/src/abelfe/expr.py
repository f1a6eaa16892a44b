"""Scalar expression trees: parsing, printing, evaluation, substitution and
symbolic differentiation.

Integer literals are exact (``fractions.Fraction``); decimal literals are
binary floats.  Arithmetic between exact values stays exact, so coefficient
factors like ``((n+alpha)/n)**n`` can be checked as rational identities.

Grammar::

    expr    := term (('+'|'-') term)*
    term    := unary (('*'|'/') unary)*
    unary   := '-' unary | power
    power   := primary ('^' unary)?
    primary := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'

``^`` is right-associative and binds tighter than unary minus, so ``-x^2``
is ``-(x^2)`` and ``2^3^2`` is ``2^9``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence, Union

from .errors import DomainError, ParseDiagnostic, ParseError

Number = Union[Fraction, float]

FUNCTIONS = ("exp", "ln", "sqrt", "sin", "cos")


class Expr:
    """Base node.  Concrete nodes are frozen dataclasses, so structural
    equality and hashing come for free."""

    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __pow__(self, other):
        return power(self, as_expr(other))

    def __neg__(self):
        return neg(self)

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class Num(Expr):
    value: Number


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    left: Expr
    right: Expr
    op = "?"


class Add(BinOp):
    op = "+"


class Sub(BinOp):
    op = "-"


class Mul(BinOp):
    op = "*"


class Div(BinOp):
    op = "/"


class Pow(BinOp):
    op = "^"


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr


ZERO = Num(Fraction(0))
ONE = Num(Fraction(1))

_BINOPS = {"+": Add, "-": Sub, "*": Mul, "/": Div, "^": Pow}


# ---------------------------------------------------------------------------
# Parsing

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z][A-Za-z0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "num" | "ident" | "op" | "end"
    text: str
    offset: int

    def describe(self) -> str:
        if self.kind == "end":
            return "end of input"
        return repr(self.text)


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(ParseDiagnostic(pos, "a number, identifier or operator", repr(text[pos])))
        kind = m.lastgroup
        tokens.append(_Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: frozenset[str] | None):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.variables = variables

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def fail(self, expected: str):
        raise ParseError(ParseDiagnostic(self.tok.offset, expected, self.tok.describe()))

    def accept(self, *ops: str) -> str | None:
        if self.tok.kind == "op" and self.tok.text in ops:
            self.pos += 1
            return self.tokens[self.pos - 1].text
        return None

    def expect(self, op: str):
        if self.accept(op) is None:
            self.fail(repr(op))

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            self.fail("an operator or end of input")
        return e

    def expr(self) -> Expr:
        left = self.term()
        while (op := self.accept("+", "-")) is not None:
            left = _BINOPS[op](left, self.term())
        return left

    def term(self) -> Expr:
        left = self.unary()
        while (op := self.accept("*", "/")) is not None:
            left = _BINOPS[op](left, self.unary())
        return left

    def unary(self) -> Expr:
        if self.accept("-") is not None:
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.accept("^") is not None:
            return Pow(base, self.unary())
        return base

    def primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.pos += 1
            return Num(_number_literal(tok.text))
        if tok.kind == "ident":
            self.pos += 1
            if self.accept("(") is not None:
                if tok.text not in FUNCTIONS:
                    raise ParseError(ParseDiagnostic(tok.offset, "one of " + ", ".join(FUNCTIONS), repr(tok.text)))
                arg = self.expr()
                self.expect(")")
                return Call(tok.text, arg)
            if self.variables is not None and tok.text not in self.variables:
                raise ParseError(
                    ParseDiagnostic(tok.offset, "a declared variable " + str(sorted(self.variables)), repr(tok.text))
                )
            return Var(tok.text)
        if self.accept("(") is not None:
            e = self.expr()
            self.expect(")")
            return e
        self.fail("a number, identifier or '('")


def _number_literal(text: str) -> Number:
    if re.fullmatch(r"\d+", text):
        return Fraction(int(text))
    return float(text)


def parse(text: str, variables: Iterable[str] | None = None) -> Expr:
    """Parse ``text`` into an expression tree.

    If ``variables`` is given, identifiers outside it are rejected.
    Raises :class:`ParseError` carrying a :class:`ParseDiagnostic`.
    """
    if not text or not text.strip():
        raise ParseError(ParseDiagnostic(0, "an expression", "end of input"))
    declared = frozenset(variables) if variables is not None else None
    return _Parser(text, declared).parse()


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, str):
        return parse(value)
    if isinstance(value, bool):
        raise TypeError("bool is not an expression")
    if isinstance(value, int):
        return Num(Fraction(value))
    if isinstance(value, (Fraction, float)):
        return Num(value)
    raise TypeError(f"cannot convert {type(value).__name__} to Expr")


# ---------------------------------------------------------------------------
# Printing

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}


def _prec(e: Expr) -> int:
    if isinstance(e, Num) and (e.value < 0 or (isinstance(e.value, Fraction) and e.value.denominator != 1)):
        return 5  # printed with its own parentheses
    return _PREC.get(type(e), 5)


def _num_text(v: Number) -> str:
    if isinstance(v, Fraction):
        if v.denominator == 1:
            s = str(v.numerator)
        else:
            s = f"{v.numerator}/{v.denominator}"
        return f"({s})" if v < 0 or v.denominator != 1 else s
    s = repr(float(v))
    return f"({s})" if v < 0 else s


def to_text(e: Expr) -> str:
    """Render ``e`` so that ``parse(to_text(e))`` rebuilds the same tree."""
    if isinstance(e, Num):
        return _num_text(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({to_text(e.arg)})"
    if isinstance(e, Neg):
        inner = to_text(e.arg)
        return "-" + (f"({inner})" if _prec(e.arg) < 3 else inner)
    if isinstance(e, Pow):
        base = to_text(e.left)
        if _prec(e.left) < 5:
            base = f"({base})"
        ex = to_text(e.right)
        if _prec(e.right) < 3:
            ex = f"({ex})"
        return f"{base}^{ex}"
    if isinstance(e, BinOp):
        p = _PREC[type(e)]
        left = to_text(e.left)
        if _prec(e.left) < p:
            left = f"({left})"
        right = to_text(e.right)
        if _prec(e.right) <= p:
            right = f"({right})"
        return f"{left}{e.op}{right}"
    raise TypeError(e)


# ---------------------------------------------------------------------------
# Structure

def free_vars(e: Expr) -> frozenset[str]:
    if isinstance(e, Var):
        return frozenset([e.name])
    if isinstance(e, Num):
        return frozenset()
    if isinstance(e, (Neg, Call)):
        return free_vars(e.arg)
    return free_vars(e.left) | free_vars(e.right)


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Num):
        return e
    if isinstance(e, Neg):
        return Neg(substitute(e.arg, mapping))
    if isinstance(e, Call):
        return Call(e.func, substitute(e.arg, mapping))
    return type(e)(substitute(e.left, mapping), substitute(e.right, mapping))


# ---------------------------------------------------------------------------
# Numeric evaluation

def _is_integral(v: Number) -> bool:
    if isinstance(v, Fraction):
        return v.denominator == 1
    return math.isfinite(v) and float(v).is_integer()


def real_pow(base: Number, exponent: Number) -> Number:
    """Real power; exact for rational base with integer exponent."""
    if _is_integral(exponent):
        k = int(exponent)
        if base == 0 and k < 0:
            raise DomainError("0 raised to a negative power")
        if isinstance(base, Fraction) and isinstance(exponent, Fraction):
            return base**k
        return float(base) ** k
    if base <= 0:
        raise DomainError(f"non-integer power {exponent} of non-positive base {base}")
    return float(base) ** float(exponent)


def _call(func: str, v: Number) -> float:
    if func == "exp":
        try:
            return math.exp(v)
        except OverflowError:
            raise DomainError(f"exp({float(v)}) overflows") from None
    if func == "ln":
        if v <= 0:
            raise DomainError(f"ln of non-positive value {v}")
        return math.log(v)
    if func == "sqrt":
        if v < 0:
            raise DomainError(f"sqrt of negative value {v}")
        return math.sqrt(v)
    if func == "sin":
        return math.sin(v)
    if func == "cos":
        return math.cos(v)
    raise ValueError(f"unknown function {func!r}")


def _numeric(v) -> Number:
    if isinstance(v, bool):
        raise TypeError("bool binding")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, (Fraction, float)):
        return v
    return float(v)


def _eval(e: Expr, env: Mapping[str, Number]) -> Number:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise KeyError(f"unbound variable {e.name!r}") from None
    if isinstance(e, Neg):
        return -_eval(e.arg, env)
    if isinstance(e, Call):
        return _call(e.func, _eval(e.arg, env))
    a = _eval(e.left, env)
    b = _eval(e.right, env)
    if isinstance(e, Add):
        return a + b
    if isinstance(e, Sub):
        return a - b
    if isinstance(e, Mul):
        return a * b
    if isinstance(e, Div):
        if b == 0:
            raise DomainError("division by zero")
        return a / b
    if isinstance(e, Pow):
        return real_pow(a, b)
    raise TypeError(e)


def evaluate(e: Expr | str, bindings: Mapping[str, object] | None = None, **kw):
    """Evaluate ``e`` under ``bindings``.

    Numeric bindings give a number (exact ``Fraction`` when everything is
    exact).  If any binding is an :class:`Expr` (or expression string), the
    bindings are substituted instead and an :class:`Expr` is returned.
    """
    e = as_expr(e)
    env = dict(bindings or {})
    env.update(kw)
    if any(isinstance(v, (Expr, str)) for v in env.values()):
        return substitute(e, {k: as_expr(v) for k, v in env.items()})
    return _eval(e, {k: _numeric(v) for k, v in env.items()})


def compile_expr(e: Expr | str, args: Sequence[str]) -> Callable[..., float]:
    """Compile ``e`` into a float-valued Python function of ``args``.

    Domain violations raise :class:`DomainError` just like :func:`evaluate`;
    intended for inner loops (ODE right-hand sides, quadrature).
    """
    e = as_expr(e)
    unknown = free_vars(e) - set(args)
    if unknown:
        raise KeyError(f"unbound variables {sorted(unknown)}")
    names = {a: f"_a{i}" for i, a in enumerate(args)}
    body = _pysrc(e, names)
    src = (
        f"def _f({', '.join(names[a] for a in args)}):\n"
        f"    try:\n"
        f"        return {body}\n"
        f"    except (ZeroDivisionError, ValueError, OverflowError) as exc:\n"
        f"        raise DomainError(str(exc)) from None\n"
    )
    ns = {"DomainError": DomainError, "_pow": _fpow, "_exp": math.exp, "_ln": math.log,
          "_sqrt": math.sqrt, "_sin": math.sin, "_cos": math.cos}
    exec(compile(src, "<abelfe-expr>", "exec"), ns)
    fn = ns["_f"]
    fn.__doc__ = to_text(e)
    return fn


def _fpow(base: float, exponent: float) -> float:
    if base > 0:
        return base**exponent
    return float(real_pow(base, exponent))


def _pysrc(e: Expr, names: Mapping[str, str]) -> str:
    if isinstance(e, Num):
        return f"({float(e.value)!r})"
    if isinstance(e, Var):
        return names[e.name]
    if isinstance(e, Neg):
        return f"(-{_pysrc(e.arg, names)})"
    if isinstance(e, Call):
        return f"_{e.func}({_pysrc(e.arg, names)})"
    a = _pysrc(e.left, names)
    b = _pysrc(e.right, names)
    if isinstance(e, Pow):
        if isinstance(e.right, Num) and _is_integral(e.right.value) and e.right.value >= 0:
            return f"({a}**{int(e.right.value)})"
        return f"_pow({a}, {b})"
    return f"({a} {e.op} {b})"


# ---------------------------------------------------------------------------
# Light-weight constructors used by differentiation and transforms.  They
# fold constants and drop neutral elements; nothing more.

def _num(e: Expr, v) -> bool:
    return isinstance(e, Num) and e.value == v


def add(a: Expr, b: Expr) -> Expr:
    if _num(a, 0):
        return b
    if _num(b, 0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    return Add(a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _num(b, 0):
        return a
    if _num(a, 0):
        return neg(b)
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    return Sub(a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if _num(a, 0) or _num(b, 0):
        return ZERO
    if _num(a, 1):
        return b
    if _num(b, 1):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    return Mul(a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _num(b, 1):
        return a
    if _num(a, 0) and not _num(b, 0):
        return ZERO
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0:
        return Num(a.value / b.value)
    return Div(a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def power(a: Expr, b: Expr) -> Expr:
    if _num(b, 0):
        return ONE
    if _num(b, 1):
        return a
    if (isinstance(a, Num) and isinstance(b, Num) and isinstance(a.value, Fraction)
            and isinstance(b.value, Fraction) and b.value.denominator == 1 and a.value != 0):
        return Num(a.value ** int(b.value))
    return Pow(a, b)


def call(func: str, a: Expr) -> Expr:
    return Call(func, a)


# ---------------------------------------------------------------------------
# Differentiation

def differentiate(e: Expr | str, var: str) -> Expr:
    """Exact symbolic derivative of ``e`` with respect to ``var``."""
    e = as_expr(e)
    if var not in free_vars(e):
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, Neg):
        return neg(differentiate(e.arg, var))
    if isinstance(e, Call):
        a = e.arg
        da = differentiate(a, var)
        if e.func == "exp":
            return mul(e, da)
        if e.func == "ln":
            return div(da, a)
        if e.func == "sqrt":
            return div(da, mul(Num(Fraction(2)), e))
        if e.func == "sin":
            return mul(call("cos", a), da)
        if e.func == "cos":
            return neg(mul(call("sin", a), da))
        raise ValueError(e.func)
    a, b = e.left, e.right
    da = differentiate(a, var)
    db = differentiate(b, var)
    if isinstance(e, Add):
        return add(da, db)
    if isinstance(e, Sub):
        return sub(da, db)
    if isinstance(e, Mul):
        return add(mul(da, b), mul(a, db))
    if isinstance(e, Div):
        return div(sub(mul(da, b), mul(a, db)), power(b, Num(Fraction(2))))
    if isinstance(e, Pow):
        if var not in free_vars(b):
            return mul(mul(b, power(a, sub(b, ONE))), da)
        if var not in free_vars(a):
            return mul(mul(e, call("ln", a)), db)
        return mul(e, add(mul(db, call("ln", a)), div(mul(b, da), a)))
    raise TypeError(e)
