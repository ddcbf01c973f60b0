from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from errors import IrrationalPoleError, SeriesDomainError, TruncationExhaustedError
from exact_algebra import (
    INFINITY,
    LaurentExpansion,
    RationalFunction,
    SeriesUH,
    bernoulli,
    expand_at,
    format_point,
    parse_point,
    partial_fractions,
    residue_at,
    s_function_series,
    to_fraction,
)
from spectral_curve import total_residue

small_fractions = st.fractions(min_value=-4, max_value=4, max_denominator=4)


def test_to_fraction_accepts_exact_values_only():
    assert to_fraction("3/4") == Fraction(3, 4)
    assert to_fraction(5) == Fraction(5)
    with pytest.raises(TypeError):
        to_fraction(0.5)
    with pytest.raises(TypeError):
        to_fraction(True)


def test_points_at_infinity_round_trip_through_text():
    assert parse_point("oo") is INFINITY
    assert format_point(INFINITY) == "oo"
    assert parse_point("-1/2") == Fraction(-1, 2)


def test_rational_functions_are_normalized():
    f = RationalFunction.from_coefficients([-1, 0, 1], [-1, 1])
    assert f == RationalFunction.from_coefficients([1, 1])
    assert RationalFunction.from_coefficients([2, 2], [2]) == RationalFunction.from_coefficients([1, 1])
    assert f.is_polynomial()


def test_arithmetic_and_derivative():
    z = RationalFunction.identity()
    f = z + 1 / z
    assert f.derivative() == 1 - z ** -2
    assert (f * z - 1) == z ** 2
    assert f.evaluate(2) == Fraction(5, 2)
    with pytest.raises(ZeroDivisionError):
        f.evaluate(0)


def test_poles_and_orders():
    f = RationalFunction.from_coefficients([1], [-1, 0, 1])
    assert f.poles() == [(Fraction(-1), 1), (Fraction(1), 1)]
    assert f.order_at(Fraction(1)) == -1
    assert f.order_at(INFINITY) == 2
    with pytest.raises(IrrationalPoleError):
        RationalFunction.from_coefficients([1], [-2, 0, 1]).poles()


def test_partial_fractions_of_simple_poles():
    f = RationalFunction.from_coefficients([1], [-1, 0, 1])
    decomposition = partial_fractions(f)
    assert decomposition.terms == ((Fraction(-1), 1, Fraction(-1, 2)), (Fraction(1), 1, Fraction(1, 2)))
    assert decomposition.to_function() == f


def test_residues_at_zero_and_infinity():
    f = RationalFunction.pole(0)
    assert residue_at(f, Fraction(0)) == 1
    assert residue_at(f, INFINITY) == -1
    assert residue_at(RationalFunction.identity(), Fraction(3)) == 0


@settings(max_examples=100, deadline=None)
@given(
    poles=st.lists(small_fractions, min_size=1, max_size=3, unique=True),
    orders=st.lists(st.integers(min_value=1, max_value=3), min_size=3, max_size=3),
    numerator=st.lists(small_fractions, min_size=1, max_size=6),
)
def test_residues_of_a_rational_differential_sum_to_zero(poles, orders, numerator):
    f = RationalFunction.from_coefficients(numerator)
    for b, m in zip(poles, orders):
        f = f * RationalFunction.pole(b, m)
    assert total_residue(f) == 0


@settings(max_examples=50, deadline=None)
@given(
    poles=st.lists(small_fractions, min_size=1, max_size=3, unique=True),
    numerator=st.lists(small_fractions, min_size=1, max_size=5),
)
def test_partial_fractions_reassemble(poles, numerator):
    f = RationalFunction.from_coefficients(numerator)
    for b in poles:
        f = f * RationalFunction.pole(b, 2)
    assert partial_fractions(f).to_function() == f


def test_expansion_knows_its_precision():
    geometric = expand_at(RationalFunction.from_coefficients([1], [1, -1]), Fraction(0), 5)
    assert [geometric.coefficient(k) for k in range(6)] == [1] * 6
    with pytest.raises(TruncationExhaustedError):
        geometric.coefficient(6)


def test_expansion_at_infinity():
    f = RationalFunction.identity() + RationalFunction.pole(0)
    local = expand_at(f, INFINITY, 3)
    assert local.valuation == -1
    assert local.coefficient(-1) == 1
    assert local.coefficient(1) == 1


def test_series_inverse_and_pair_residue():
    one_minus_t = LaurentExpansion.build(Fraction(0), 0, [Fraction(1), Fraction(-1)], 10 ** 18)
    inverse = one_minus_t.inverse(4)
    assert [inverse.coefficient(k) for k in range(5)] == [1] * 5
    with pytest.raises(SeriesDomainError):
        one_minus_t.inverse()

    pole = LaurentExpansion.monomial(1, -2)
    linear = LaurentExpansion.build(Fraction(0), 0, [Fraction(1), Fraction(2)], 10 ** 18)
    assert pole.pair_residue(linear) == 2
    assert (pole * linear).residue() == 2


def test_pair_residue_refuses_short_series():
    pole = LaurentExpansion.monomial(1, -3)
    short = LaurentExpansion.build(Fraction(0), 0, [Fraction(1)], 1)
    with pytest.raises(TruncationExhaustedError):
        pole.pair_residue(short)


def test_integral_and_compose():
    s = LaurentExpansion.build(Fraction(0), 0, [Fraction(1), Fraction(1)], 10 ** 18)
    primitive = s.integral()
    assert primitive.coefficient(1) == 1
    assert primitive.coefficient(2) == Fraction(1, 2)
    doubled = LaurentExpansion.monomial(2, 1)
    composed = s.compose(doubled)
    assert composed.coefficient(1) == 2
    with pytest.raises(SeriesDomainError):
        LaurentExpansion.monomial(1, -1).integral()


def test_bernoulli_numbers():
    assert bernoulli(2) == Fraction(1, 6)
    assert bernoulli(4) == Fraction(-1, 30)
    assert bernoulli(6) == Fraction(1, 42)
    assert bernoulli(8) == Fraction(-1, 30)
    with pytest.raises(ValueError):
        bernoulli(3)


def test_s_function_series():
    s = s_function_series("S", 4)
    assert [s.coefficient(k) for k in range(5)] == [1, 0, Fraction(1, 24), 0, Fraction(1, 1920)]
    inverse = s_function_series("inverseS", 4)
    assert inverse.coefficient(2) == Fraction(-1, 24)
    assert inverse.coefficient(4) == Fraction(7, 5760)


@pytest.mark.parametrize("g", [1, 2, 3, 4])
def test_inverse_square_of_s_is_a_bernoulli_number(g):
    coefficient = s_function_series("power", 2 * g, exponent=-2).coefficient(2 * g)
    assert coefficient == -bernoulli(2 * g) / (2 * g * _factorial(2 * g - 2))


def _factorial(n: int) -> int:
    out = 1
    for k in range(2, n + 1):
        out *= k
    return out


def test_bivariate_exp_and_reciprocal():
    u = SeriesUH.from_terms(4, 2, {(1, 0): RationalFunction.constant(1)})
    e = u.exp()
    assert e.extract(3, 0) == RationalFunction.constant(Fraction(1, 6))
    assert e.extract(4, 0) == RationalFunction.constant(Fraction(1, 24))

    one_plus_u = SeriesUH.one(4, 2) + u
    r = one_plus_u.reciprocal()
    assert r.extract(3, 0) == RationalFunction.constant(-1)
    assert (r * one_plus_u).coeff == SeriesUH.one(4, 2).coeff
    with pytest.raises(SeriesDomainError):
        one_plus_u.exp()
    with pytest.raises(SeriesDomainError):
        e.extract(5, 0)
