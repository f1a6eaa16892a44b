import itertools
import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abelfe.equation import (
    equation_from_json,
    equation_to_json,
    make_equation,
    merge_equal_exponent_terms,
    parse_number,
    rhs_eval,
    specialize_zero_term,
)
from abelfe.errors import DomainError, InvalidEquation, ParseError
from abelfe.expr import evaluate, parse, to_text


def test_make_equation_valid():
    eq = make_equation(1, [("1", 2), ("1", 1)], 1)
    assert eq.K == 2 and eq.exponents == (2, 1)
    assert eq.mergeable_pairs == []


@pytest.mark.parametrize("kwargs", [dict(n=0), dict(n=-1), dict(z0=0), dict(z0=-1), dict(terms=[])])
def test_make_equation_rejects(kwargs):
    args = dict(n=1, terms=[("1", 2)], z0=1)
    args.update(kwargs)
    with pytest.raises(InvalidEquation):
        make_equation(**args)


def test_mergeable_flag():
    eq = make_equation(1, [("x", 2), ("x^2", 2)], 1)
    assert eq.mergeable_pairs == [(1, 2)]


def test_coefficient_must_depend_on_x_only():
    with pytest.raises(ParseError):
        make_equation(1, [("u*x", 2)], 1)


def test_rhs_examples():
    assert rhs_eval(make_equation(1, [("1", 2), ("1", 1)], 1), 0, 2) == 6
    assert rhs_eval(make_equation(1, [("x^2", 3)], 1), 2, 1) == 4
    with pytest.raises(DomainError):
        rhs_eval(make_equation(1, [("1", -1)], 1), 0, 0)
    with pytest.raises(DomainError):
        rhs_eval(make_equation(1, [("1", "1/2")], 1), 0, -1)


def test_rhs_exact_and_fast_path_agree():
    eq = make_equation(2, [("1/3 + x", "3/2"), ("exp(-x)", -1)], 1)
    for x, z in [(0.1, 0.7), (1.0, 2.5)]:
        assert eq.rhs(x, z) == pytest.approx(float(rhs_eval(eq, x, z)), rel=1e-14)
    assert rhs_eval(make_equation(1, [("1/3", 2)], 1), 0, Fraction(3, 2)) == Fraction(3, 4)


def test_parse_number():
    assert parse_number("3/4") == Fraction(3, 4)
    assert parse_number(2) == Fraction(2)
    assert parse_number("2") == Fraction(2)
    assert parse_number(0.5) == 0.5
    for bad in ("x", "1/0", True, float("inf")):
        with pytest.raises(InvalidEquation):
            parse_number(bad)


def test_merge_examples():
    eq = make_equation(1, [("x", 2), ("x^2", 2)], 1)
    merged = merge_equal_exponent_terms(eq)
    assert merged.K == 1 and merged.terms[0].exponent == 2
    assert to_text(merged.terms[0].coeff) == "x+x^2"
    distinct = make_equation(1, [("x", 2), ("1", 1)], 1)
    assert merge_equal_exponent_terms(distinct) == distinct


def test_specialize_zero_term():
    eq = make_equation(1, [("1", 2), ("x", 3)], 1)
    rest = specialize_zero_term(eq, 1)
    assert rest.K == 1 and rest.terms[0].exponent == 3
    with pytest.raises(IndexError):
        specialize_zero_term(eq, 3)
    with pytest.raises(InvalidEquation):
        specialize_zero_term(rest, 1)


def test_json_round_trip():
    eq = make_equation(2, [("1/(2+x)", "3/2"), ("x^2", 0.25)], "1/2", 0.1)
    doc = equation_to_json(eq)
    assert doc["terms"][0]["m"] == "3/2"
    again = equation_from_json(json.dumps(doc))
    assert again == eq


@pytest.mark.parametrize("text", ["{", "[]", '{"n": 1}', '{"n": 1.5, "z0": 1, "terms": []}',
                                  '{"n": 1, "z0": 1, "terms": [{"coeff": "x"}]}'])
def test_json_malformed(text):
    with pytest.raises(InvalidEquation):
        equation_from_json(text)


# pointwise properties on random equations

COEFFS = ["1", "x", "x^2", "1/(2+x)", "exp(-x)", "3/4", "sin(x)+2"]
term_st = st.tuples(st.sampled_from(COEFFS), st.sampled_from([Fraction(-1), Fraction(1, 2), Fraction(1), Fraction(2), Fraction(3)]))


@settings(max_examples=60, deadline=None)
@given(st.lists(term_st, min_size=1, max_size=4), st.randoms(use_true_random=False))
def test_permutation_symmetry(terms, rnd):
    eq = make_equation(1, terms, 1)
    for perm in itertools.islice(itertools.permutations(terms), 6):
        other = make_equation(1, list(perm), 1)
        for _ in range(8):
            x, z = rnd.uniform(0, 2), rnd.uniform(0.1, 3)
            assert other.rhs(x, z) == pytest.approx(eq.rhs(x, z), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(term_st, min_size=1, max_size=5))
def test_merge_preserves_rhs_and_is_idempotent(terms):
    eq = make_equation(1, terms, 1)
    merged = merge_equal_exponent_terms(eq)
    assert merge_equal_exponent_terms(merged) == merged
    assert merged.K == len({m for _, m in terms})
    rnd = random.Random(0)
    for _ in range(20):
        x, z = rnd.uniform(0, 2), rnd.uniform(0.1, 3)
        assert merged.rhs(x, z) == pytest.approx(eq.rhs(x, z), rel=1e-12, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(term_st, min_size=2, max_size=5), st.data())
def test_specialize_equals_zero_coefficient(terms, data):
    eq = make_equation(1, terms, 1)
    k = data.draw(st.integers(1, eq.K))
    dropped = specialize_zero_term(eq, k)
    zeroed = make_equation(1, [("0", m) if i == k - 1 else (c, m) for i, (c, m) in enumerate(terms)], 1)
    rnd = random.Random(1)
    for _ in range(10):
        x, z = rnd.uniform(0, 2), rnd.uniform(0.1, 3)
        assert dropped.rhs(x, z) == pytest.approx(zeroed.rhs(x, z), rel=1e-12, abs=1e-12)
    # dropping and merging commute pointwise
    a = merge_equal_exponent_terms(dropped)
    merged = merge_equal_exponent_terms(zeroed)
    for _ in range(10):
        x, z = rnd.uniform(0, 2), rnd.uniform(0.1, 3)
        assert a.rhs(x, z) == pytest.approx(merged.rhs(x, z), rel=1e-12, abs=1e-12)


def test_coefficient_values():
    eq = make_equation(1, [("1/2", 2), ("3", 1)], 1)
    assert eq.coefficient_values() == (Fraction(1, 2), Fraction(3))
    with pytest.raises(InvalidEquation):
        make_equation(1, [("x", 2)], 1).coefficient_values()
    assert float(evaluate(parse("1/(2+x)"), x=0)) == 0.5
