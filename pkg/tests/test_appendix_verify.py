from fractions import Fraction
from math import factorial

import pytest

from appendix_verify import (
    BOTH,
    MINUS,
    STATED,
    coth_series,
    compute_ang,
    degree_shift_check,
    lemmaA1_check,
    operator_product_check,
    reconstruction_identity_check,
    residue_lemma_oracle,
)
from errors import SeriesDomainError
from exact_algebra import EXACT_ORDER, LaurentExpansion, RationalFunction

Y = RationalFunction.identity()
G = RationalFunction.pole(Fraction(5)) + 1


def test_coth_series():
    series = coth_series(6)
    assert [series.coefficient(k) for k in range(7)] == [
        1, 0, Fraction(1, 12), 0, Fraction(-1, 720), 0, Fraction(1, 30240)]


def test_a_coefficients():
    assert compute_ang(1).values == {0: Fraction(1, 12)}
    assert compute_ang(2).values == {0: Fraction(1, 80), 1: Fraction(1, 288)}


def test_a_series_domain():
    odd = LaurentExpansion.build(Fraction(0), 0, [Fraction(1), Fraction(1)], EXACT_ORDER)
    with pytest.raises(SeriesDomainError):
        compute_ang(2, odd)
    shifted = LaurentExpansion.build(Fraction(0), 0, [Fraction(2)], EXACT_ORDER)
    with pytest.raises(SeriesDomainError):
        compute_ang(1, shifted)
    with pytest.raises(SeriesDomainError):
        compute_ang(2, coth_series(2))


def test_lemma_a1_takes_the_minus_sign():
    reports = lemmaA1_check(5)
    assert [r.verdict for r in reports] == [MINUS] * 5
    assert reports[0].lhs == Fraction(-1, 12)
    assert reports[1].lhs == Fraction(1, 120)


def test_lemma_a1_with_a_trivial_series():
    one = LaurentExpansion.build(Fraction(0), 0, [Fraction(1)], EXACT_ORDER)
    reports = lemmaA1_check(3, one)
    assert all(r.verdict == BOTH and r.lhs == 0 for r in reports)


@pytest.mark.parametrize("g", [1, 2, 3, 4])
def test_reconstruction_identity(g):
    assert reconstruction_identity_check(g)


def test_degree_shift():
    result = degree_shift_check([Fraction(0), Fraction(1)], 0, 3, RationalFunction.constant(1))
    assert (result.pole_order_before, result.pole_order_after) == (2, 1)
    assert result.holds


@pytest.mark.parametrize("n_a", [2, 3, 4, 5])
@pytest.mark.parametrize("f", [RationalFunction.constant(1), Y + 2, Y])
def test_degree_shift_lowers_the_pole(n_a, f):
    assert degree_shift_check([Fraction(0), Fraction(1), Fraction(3)], 1, n_a, f).holds


def test_log_setup_is_validated():
    with pytest.raises(ValueError):
        degree_shift_check([Fraction(0), Fraction(0)], 0, 2, Y)
    with pytest.raises(ValueError):
        degree_shift_check([Fraction(0)], 1, 2, Y)
    with pytest.raises(ValueError):
        degree_shift_check([Fraction(0)], 0, 1, Y)
    with pytest.raises(ValueError):
        degree_shift_check([Fraction(0)], 0, 2, RationalFunction.pole(Fraction(0)))


@pytest.mark.parametrize("n_a, verdict", [(1, BOTH), (2, BOTH), (3, STATED), (4, STATED), (5, STATED)])
def test_residue_lemma(n_a, verdict):
    f = (Y + 1) ** n_a
    result = residue_lemma_oracle([Fraction(0), Fraction(2)], 0, n_a, f, G)
    assert result.verdict == verdict
    assert result.brute_force == result.stated_form


@pytest.mark.parametrize("n_a", [1, 2, 3, 4])
def test_operator_product_constant(n_a):
    result = operator_product_check([Fraction(0), Fraction(2)], 0, n_a, G)
    assert result.holds
    assert result.constant_ratio == factorial(n_a - 1)
    assert result.stated_constant_holds == (n_a <= 2)
