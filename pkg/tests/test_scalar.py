from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from mpa_workbench.errors import NotAMonomial, ParseError, ZeroCoefficient, ZeroParameter
from mpa_workbench.scalar import LaurentScalar, parse_scalar, scalar_arith, scalar_eval, scalar_invert_monomial

q0 = LaurentScalar.q(0)
q1 = LaurentScalar.q(1)

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)
monomials = st.lists(st.tuples(st.integers(0, 2), st.integers(-3, 3)), max_size=3)


@st.composite
def scalars(draw):
    terms = {}
    for _ in range(draw(st.integers(0, 4))):
        mono = {}
        for var, exp in draw(monomials):
            mono[var] = mono.get(var, 0) + exp
        key = tuple(sorted((v, e) for v, e in mono.items() if e))
        terms[key] = terms.get(key, 0) + draw(rationals)
    return LaurentScalar(terms)


nonzero_values = st.fractions(min_value=-7, max_value=7, max_denominator=5).filter(lambda x: x != 0)
assignments = st.fixed_dictionaries({0: nonzero_values, 1: nonzero_values, 2: nonzero_values})


def test_cancellation_gives_zero():
    assert scalar_arith("add", q0, -q0) == 0
    assert scalar_arith("add", q0, -q0).is_zero()


def test_monomial_inverse_multiplies_to_one():
    assert scalar_arith("mul", q0, scalar_invert_monomial(q0)) == 1


def test_relation_pair_coefficients():
    combined = scalar_arith("add", scalar_arith("mul", -q0, 1), scalar_arith("mul", -(q0 ** -1), 1))
    assert str(combined) == "-q0 - q0^-1"


def test_invert_monomial_examples():
    assert scalar_invert_monomial(q0 ** 2) == q0 ** -2
    assert scalar_invert_monomial(LaurentScalar({((1, 1),): Fraction(3, 2)})) == LaurentScalar({((1, -1),): Fraction(2, 3)})
    with pytest.raises(NotAMonomial):
        scalar_invert_monomial(1 + q0)


def test_invert_zero_is_rejected():
    with pytest.raises((NotAMonomial, ZeroCoefficient)):
        scalar_invert_monomial(LaurentScalar.const(0))


def test_evaluation_examples():
    assert scalar_eval(q0 + q0 ** -1, {0: 2}) == Fraction(5, 2)
    assert scalar_eval(LaurentScalar.const(1), {0: 3}) == 1
    assert scalar_eval(-q0 - q0 ** -1, {0: 1}) == -2


def test_zero_parameter_is_rejected():
    with pytest.raises(ZeroParameter):
        scalar_eval(q0, {0: 0})


def test_parse_and_print_round_trip():
    for text in ["-q0 - q0^-1", "3/2*q1^2 + 1", "q0*q1^-1 - 2", "0"]:
        value = parse_scalar(text)
        assert parse_scalar(str(value)) == value
    assert parse_scalar("(q0 + 1)*(q0 - 1)") == q0 * q0 - 1


def test_parse_error_reports_position():
    with pytest.raises(ParseError) as info:
        parse_scalar("q0 + $")
    assert info.value.position == 5


@settings(max_examples=300, deadline=None)
@given(scalars(), scalars())
def test_add_then_subtract_is_identity(a, b):
    assert a + b - b == a


@settings(max_examples=300, deadline=None)
@given(scalars(), scalars(), assignments)
def test_evaluation_is_a_ring_homomorphism(a, b, values):
    assert (a + b).evaluate(values) == a.evaluate(values) + b.evaluate(values)
    assert (a * b).evaluate(values) == a.evaluate(values) * b.evaluate(values)


@settings(max_examples=200, deadline=None)
@given(monomials, nonzero_values)
def test_monomials_invert(exponents, coeff):
    mono = {}
    for var, exp in exponents:
        mono[var] = mono.get(var, 0) + exp
    m = LaurentScalar({tuple(sorted((v, e) for v, e in mono.items() if e)): coeff})
    assert m * m.invert_monomial() == 1


@settings(max_examples=200, deadline=None)
@given(scalars(), scalars(), scalars())
def test_multiplication_distributes(a, b, c):
    assert a * (b + c) == a * b + a * c


@settings(max_examples=200, deadline=None)
@given(scalars())
def test_printing_round_trips(a):
    assert parse_scalar(str(a)) == a
