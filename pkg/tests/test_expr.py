import math
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from abelfe.errors import DomainError, ParseError
from abelfe.expr import (
    Add,
    Call,
    Div,
    Mul,
    Neg,
    Num,
    Pow,
    Sub,
    Var,
    compile_expr,
    differentiate,
    evaluate,
    free_vars,
    parse,
    substitute,
    to_text,
)

X = Var("x")


def test_parse_structure():
    assert parse("u1 + 2*x^2") == Add(Var("u1"), Mul(Num(Fraction(2)), Pow(X, Num(Fraction(2)))))
    assert parse("1/(2+x)") == Div(Num(Fraction(1)), Add(Num(Fraction(2)), X))


def test_power_is_right_associative():
    assert evaluate("2^3^2") == 512
    assert evaluate("(2^3)^2") == 64


def test_unary_minus_binds_looser_than_power():
    assert parse("-x^2") == Neg(Pow(X, Num(Fraction(2))))
    assert evaluate("-x^2", x=3) == -9
    assert evaluate("2^-1") == Fraction(1, 2)


def test_number_literals():
    assert parse("3") == Num(Fraction(3))
    assert parse("2.5e-1") == Num(0.25)
    assert evaluate("1/3") == Fraction(1, 3)


@pytest.mark.parametrize("text, offset", [("", 0), ("1+", 2), ("(x", 2), ("x y", 2), ("foo(x)", 0), ("2**3", 2)])
def test_parse_errors_carry_offset(text, offset):
    with pytest.raises(ParseError) as info:
        parse(text, ["x", "y"])
    d = info.value.diagnostic
    assert d.offset == offset
    assert 0 <= d.offset <= len(text)
    assert "expected" in str(d)


def test_undeclared_variable_rejected():
    with pytest.raises(ParseError):
        parse("x + u1", ["x"])
    assert free_vars(parse("x + u1", ["x", "u1"])) == {"x", "u1"}


def test_evaluate_examples():
    assert evaluate("x^2", x=3) == 9
    assert evaluate("1/(2+x)", x=0) == Fraction(1, 2)
    assert evaluate("exp(0) + ln(1) + sqrt(4) + sin(0) + cos(0)") == pytest.approx(4.0)


def test_expression_binding_substitutes():
    e = evaluate("u1*u1", {"u1": parse("1/(2+x)")})
    assert free_vars(e) == {"x"}
    for x in (0.0, 0.5, 1.7):
        assert float(evaluate(e, x=x)) == pytest.approx((2 + x) ** -2, rel=1e-14)


@pytest.mark.parametrize("text, binding", [("ln(x)", -1), ("sqrt(x)", -4), ("1/x", 0), ("x^(-1)", 0), ("x^(1/2)", -1)])
def test_domain_errors(text, binding):
    with pytest.raises(DomainError):
        evaluate(text, x=binding)
    with pytest.raises(DomainError):
        compile_expr(text, ["x"])(float(binding))


def test_unbound_variable():
    with pytest.raises((KeyError, ValueError)):
        evaluate("x + y", x=1)


def test_derivative_examples():
    d = differentiate("1/(2+x)", "x")
    for x in (0.0, 0.3, 2.0):
        assert float(evaluate(d, x=x)) == pytest.approx(-((2 + x) ** -2), rel=1e-14)
    assert to_text(differentiate("x^2", "x")) == "2*x"
    assert float(evaluate(differentiate("exp(3*x)", "x"), x=0)) == 3


def test_derivative_of_other_variable_is_zero():
    assert evaluate(differentiate("u1^2 + sin(u2)", "x")) == 0


def test_compile_matches_evaluate():
    e = parse("u*exp(-x) + x^(3/2) - ln(1+x)/cos(x)", ["u", "x"])
    f = compile_expr(e, ["u", "x"])
    for u, x in [(1.0, 0.5), (-2.0, 1.3), (0.25, 2.0)]:
        assert f(u, x) == pytest.approx(float(evaluate(e, u=u, x=x)), rel=1e-14)


# random expression trees over x (and u where needed)

_leaf = st.one_of(
    st.integers(0, 9).map(lambda v: Num(Fraction(v))),
    st.sampled_from([0.5, 1.25, 2.75]).map(Num),
    st.just(X),
)


def _tree(children):
    return st.one_of(
        st.tuples(children, children).map(lambda p: Add(*p)),
        st.tuples(children, children).map(lambda p: Sub(*p)),
        st.tuples(children, children).map(lambda p: Mul(*p)),
        st.tuples(children, children).map(lambda p: Div(*p)),
        st.tuples(children, st.integers(0, 3)).map(lambda p: Pow(p[0], Num(Fraction(p[1])))),
        children.map(Neg),
        st.tuples(st.sampled_from(["exp", "ln", "sqrt", "sin", "cos"]), children).map(lambda p: Call(*p)),
    )


exprs = st.recursive(_leaf, _tree, max_leaves=8)


@settings(max_examples=200, deadline=None)
@given(exprs)
def test_print_parse_round_trip(e):
    text = to_text(e)
    assert parse(text) == parse(to_text(parse(text)))
    assert parse(text) == e


def _smooth(e, x):
    try:
        v = float(evaluate(e, x=x))
    except (DomainError, OverflowError, ZeroDivisionError):
        return None
    return v if math.isfinite(v) and abs(v) < 1e6 else None


@settings(max_examples=100, deadline=None)
@given(exprs, st.floats(0.1, 2.0))
def test_derivative_matches_finite_difference(e, x):
    h = 1e-5
    vals = [_smooth(e, x + k * h) for k in (-2, -1, 0, 1, 2)]
    assume(all(v is not None for v in vals))
    fd = (vals[0] - 8 * vals[1] + 8 * vals[3] - vals[4]) / (12 * h)
    # skip near-singular points where the difference quotient itself is unreliable
    fd2 = (vals[1] - 2 * vals[2] + vals[3]) / h**2
    assume(abs(fd2) < 1e4)
    try:
        d = float(evaluate(differentiate(e, "x"), x=x))
    except (DomainError, ZeroDivisionError):
        assume(False)
    assert abs(d - fd) / max(1.0, abs(vals[2])) <= 1e-6


@settings(max_examples=100, deadline=None)
@given(exprs, exprs, st.floats(0.1, 2.0))
def test_substitution_commutes_with_evaluation(f, g, x):
    e = substitute(f, {"x": Var("u")})  # f as a function of u
    gx = _smooth(g, x)
    assume(gx is not None)
    try:
        direct = float(evaluate(e, u=gx))
        composed = float(evaluate(substitute(e, {"u": g}), x=x))
    except (DomainError, OverflowError, ZeroDivisionError):
        assume(False)
    assume(math.isfinite(direct) and abs(direct) < 1e6)
    assert composed == pytest.approx(direct, rel=1e-12, abs=1e-12)
