from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from abelfe.equation import make_equation
from abelfe.errors import TransformError
from abelfe.expr import evaluate
from abelfe.transform import AlphaTransform, apply_to_equation, apply_to_parameters, compose, invert

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)
ns = st.integers(1, 4)


def test_parameter_map_example():
    u, m = apply_to_parameters(AlphaTransform(1, 1), [0.5], [3])
    assert u == [1.0] and m == [2]


def test_identity_and_fixed_point():
    t0 = AlphaTransform(0, 2)
    assert apply_to_parameters(t0, [0.3, 2], [5, -1]) == ([0.3, 2], [5, -1])
    for a in (Fraction(1, 3), Fraction(7), Fraction(-3, 2)):
        assert AlphaTransform(a, 2).map_exponent(2) == 2


def test_equation_example():
    eq = make_equation(1, [("1", 2)], 1)
    w = apply_to_equation(AlphaTransform(1, 1), eq)
    assert w.exponents == (Fraction(3, 2),)
    assert evaluate(w.terms[0].coeff) == 2
    assert w.z0 == 1
    assert apply_to_equation(AlphaTransform(0, 1), eq) == eq


def test_initial_value_map():
    eq = make_equation(2, [("x", 1)], 4)
    assert apply_to_equation(AlphaTransform(2, 2), eq).z0 == 16
    assert apply_to_equation(AlphaTransform(-1, 2), eq).z0 == 2


def test_excluded_alpha():
    with pytest.raises(TransformError):
        AlphaTransform(-1, 1)
    with pytest.raises(TransformError):
        AlphaTransform(-3, 3)
    with pytest.raises(TransformError):
        apply_to_equation(AlphaTransform(1, 2), make_equation(1, [("1", 2)], 1))


def test_compose_examples():
    assert compose(AlphaTransform(1), AlphaTransform(1)).alpha == 3
    assert compose(AlphaTransform(5), AlphaTransform(0)).alpha == 5
    assert compose(AlphaTransform(2, 2), AlphaTransform(2, 2)).alpha == 6
    assert invert(AlphaTransform(1)).alpha == Fraction(-1, 2)
    assert invert(AlphaTransform(0)).alpha == 0
    with pytest.raises(TransformError):
        compose(AlphaTransform(1, 1), AlphaTransform(1, 2))


@given(ns, rationals, rationals)
def test_composition_never_reaches_excluded_value(n, a, b):
    # n + gamma = (n + alpha)(n + beta)/n, which is nonzero for admissible factors
    assume(a != -n and b != -n)
    g = compose(AlphaTransform(a, n), AlphaTransform(b, n))
    assert n + g.alpha == (n + a) * (n + b) / n
    assert g.alpha != -n


@given(ns, rationals, rationals, rationals)
def test_compose_associative(n, a, b, c):
    assume(-n not in (a, b, c))
    ta, tb, tc = AlphaTransform(a, n), AlphaTransform(b, n), AlphaTransform(c, n)
    assert compose(compose(ta, tb), tc) == compose(ta, compose(tb, tc))


@given(ns, rationals, st.lists(rationals, min_size=1, max_size=4), st.lists(rationals, min_size=1, max_size=4))
def test_compose_matches_sequential_application(n, a, u, m):
    b = Fraction(1, 3)
    assume(a != -n)
    m = m[: len(u)]
    u = u[: len(m)]
    t1, t2 = AlphaTransform(a, n), AlphaTransform(b, n)
    u1, m1 = apply_to_parameters(t2, u, m)
    u2, m2 = apply_to_parameters(t1, u1, m1)
    assert apply_to_parameters(compose(t1, t2), u, m) == (u2, m2)


@given(ns, rationals)
def test_invert_two_sided(n, a):
    assume(a != -n)
    t = AlphaTransform(a, n)
    assert compose(t, invert(t)).alpha == 0
    assert compose(invert(t), t).alpha == 0
    assert invert(invert(t)) == t


@given(ns, rationals, rationals)
def test_shift_law(n, a, m):
    assume(a != -n)
    t = AlphaTransform(a, n)
    assert t.map_exponent(m) - n == Fraction(n) / (n + a) * (m - n)


@given(st.floats(-0.9, 2.0), st.lists(st.floats(0.1, 3), min_size=3, max_size=3),
       st.lists(st.floats(-1, 3), min_size=3, max_size=3))
def test_parameter_round_trip(a, u, m):
    t = AlphaTransform(a, 1)
    ub, mb = apply_to_parameters(t, u, m)
    ur, mr = apply_to_parameters(invert(t), ub, mb)
    assert ur == pytest.approx(u, rel=1e-12)
    assert mr == pytest.approx(m, rel=1e-12, abs=1e-12)


@given(ns, rationals, st.floats(0, 2))
def test_equation_and_parameter_levels_agree(n, a, x):
    assume(a != -n)
    eq = make_equation(n, [("1 + x^2", 2), ("exp(-x)", "1/2")], 1)
    t = AlphaTransform(a, n)
    w = apply_to_equation(t, eq)
    pointwise = [float(evaluate(term.coeff, x=x)) for term in eq.terms]
    ub, mb = apply_to_parameters(t, pointwise, eq.exponents)
    assert [float(evaluate(term.coeff, x=x)) for term in w.terms] == pytest.approx([float(v) for v in ub], rel=1e-12)
    assert list(w.exponents) == mb
