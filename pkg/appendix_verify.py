"""
Brute-force checks of the series and residue identities behind the closed forms.

Each check evaluates both sides exactly and reports what it found instead of
trusting a normalization: the a_{n,g} coefficients and their alternating sum, the
pole-order shift of d/dx - (n-1), the residue against (d_x + n-1)...(d_x + 1) g,
and the expansion of that operator product.

Here x(y) = const - sum_b log(Q_b - y), so dx/dy = sum_b 1/(Q_b - y). Functions of y
are RationalFunctions in the library's variable.

Requires:
    pip install sympy
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Dict, List, Optional

from sympy import Poly, QQ, Rational, Symbol

from errors import SeriesDomainError
from exact_algebra import LaurentExpansion, RationalFunction, bernoulli, expand_at, residue_at

logger = logging.getLogger(__name__)

W = Symbol("w")

MINUS = "minus"
PLUS = "plus"
BOTH = "both"
NEITHER = "neither"
STATED = "stated"
FACTORIAL = "factorial"


@dataclass(frozen=True)
class ANGTable:
    g: int
    values: Dict[int, Fraction]


@dataclass(frozen=True)
class LemmaA1Report:
    g: int
    lhs: Fraction
    minus_candidate: Fraction
    plus_candidate: Fraction
    verdict: str


@dataclass(frozen=True)
class DegreeShiftResult:
    n_a: int
    pole_order_before: int
    pole_order_after: int

    @property
    def holds(self) -> bool:
        return self.pole_order_after <= self.n_a - 2


@dataclass(frozen=True)
class ResidueOracleResult:
    n_a: int
    stated_form: Fraction
    factorial_form: Fraction
    brute_force: Fraction

    @property
    def verdict(self) -> str:
        stated = self.stated_form == self.brute_force
        fact = self.factorial_form == self.brute_force
        if stated and fact:
            return BOTH
        if fact:
            return FACTORIAL
        if stated:
            return STATED
        return NEITHER


@dataclass(frozen=True)
class OperatorProductResult:
    """The product is constant + O((y-Q_a)^valuation); constant_ratio = constant / g(Q_a)."""
    n_a: int
    valuation: int
    constant_ratio: Fraction

    @property
    def holds(self) -> bool:
        return self.valuation >= self.n_a

    @property
    def stated_constant_holds(self) -> bool:
        """Whether the constant term is g(Q_a) itself."""
        return self.constant_ratio == 1


# ---------------------------------------------------------------------------
# a_{n,g}
# ---------------------------------------------------------------------------

def coth_series(order: int) -> LaurentExpansion:
    """(t/2)/tanh(t/2) = sum_k B_{2k} t^{2k} / (2k)! up to t^order."""
    coeffs = [Fraction(0)] * (order + 1)
    coeffs[0] = Fraction(1)
    for k in range(1, order // 2 + 1):
        coeffs[2 * k] = bernoulli(2 * k) / factorial(2 * k)
    return LaurentExpansion.build(Fraction(0), 0, coeffs, order)


def _check_a_series(a_series: LaurentExpansion, g: int) -> None:
    if a_series.truncation_order < 2 * g:
        raise SeriesDomainError(f"A is known to t^{a_series.truncation_order}, a_(n,{g}) needs t^{2 * g}")
    if a_series.coefficient(0) != 1 or a_series.valuation < 0:
        raise SeriesDomainError("A must be a power series with constant term 1")
    if any(degree % 2 for degree, c in a_series.items() if c != 0):
        raise SeriesDomainError("A must be even")


def compute_ang(g: int, a_series: Optional[LaurentExpansion] = None) -> ANGTable:
    """
    a_{n,g} = sum_{i<=n} [t^{2g}] A^{2g+i+1} / ((2g+i+1) i!) * (-1)^{n-i} / (n-i)!
    for n = 0..g-1.

    Args:
        g (int): Genus, >= 1.
        a_series (LaurentExpansion, optional): Even series A with A(0) = 1, known to t^{2g}.
            Defaults to (t/2)/tanh(t/2).

    Raises:
        SeriesDomainError: A is not even, does not start with 1, or is truncated below t^{2g}.
    """
    if g < 1:
        raise ValueError("a_(n,g) is defined for g >= 1")
    a_series = a_series if a_series is not None else coth_series(2 * g)
    _check_a_series(a_series, g)
    powers = {k: a_series.power(k, 2 * g).coefficient(2 * g) for k in range(2 * g + 1, 3 * g + 1)}
    values = {}
    for n in range(g):
        values[n] = sum(
            (powers[2 * g + i + 1] / ((2 * g + i + 1) * factorial(i)) * Fraction((-1) ** (n - i), factorial(n - i))
             for i in range(n + 1)),
            Fraction(0),
        )
    return ANGTable(g, values)


def lemmaA1_check(g_max: int, a_series: Optional[LaurentExpansion] = None) -> List[LemmaA1Report]:
    """
    sum_n (-1)^{2g+n-1} (2g+n-1)! a_{n,g} against -b_g (2g-1)! and +b_g (2g-1)!,
    b_g = [t^{2g}] A, for g = 1..g_max.
    """
    if g_max < 1:
        raise ValueError("g_max must be >= 1")
    reports = []
    for g in range(1, g_max + 1):
        series = a_series if a_series is not None else coth_series(2 * g)
        table = compute_ang(g, series)
        lhs = sum(((-1) ** (2 * g + n - 1) * factorial(2 * g + n - 1) * a for n, a in table.values.items()), Fraction(0))
        b_g = series.coefficient(2 * g)
        minus, plus = -b_g * factorial(2 * g - 1), b_g * factorial(2 * g - 1)
        if lhs == minus and lhs == plus:
            verdict = BOTH
        elif lhs == minus:
            verdict = MINUS
        elif lhs == plus:
            verdict = PLUS
        else:
            verdict = NEITHER
        logger.debug("lemma A.1 g=%d: lhs=%s verdict=%s", g, lhs, verdict)
        reports.append(LemmaA1Report(g, lhs, minus, plus, verdict))
    return reports


def reconstruction_identity_check(g: int) -> bool:
    """
    [hbar^{2g}] ((1 + w hbar/2)/(1 - w hbar/2))^{1/hbar} e^{-w} equals
    sum_{n<g} a_{n,g} w^{2g+1+n}, for g >= 1.
    """
    if g < 1:
        raise ValueError("the identity is checked for g >= 1")
    # log of the left side is sum_{k>=1} hbar^{2k} w^{2k+1} / (4^k (2k+1))
    log_terms = {k: Poly(Rational(1, 4 ** k * (2 * k + 1)) * W ** (2 * k + 1), W, domain=QQ) for k in range(1, g + 1)}
    exp_terms = [Poly(1, W, domain=QQ)]
    for m in range(1, g + 1):
        acc = Poly(0, W, domain=QQ)
        for k in range(1, m + 1):
            acc += log_terms[k] * exp_terms[m - k] * k
        exp_terms.append(acc.quo_ground(m))
    expected = Poly(0, W, domain=QQ)
    for n, a in compute_ang(g).values.items():
        expected += Poly(Rational(a.numerator, a.denominator) * W ** (2 * g + 1 + n), W, domain=QQ)
    return exp_terms[g] == expected


# ---------------------------------------------------------------------------
# Log-curve lemmas
# ---------------------------------------------------------------------------

def _x_prime(q_list: List[Fraction]) -> RationalFunction:
    total = RationalFunction.constant(0)
    for q in q_list:
        total = total + RationalFunction.pole(q, 1, -1)
    return total


def _check_log_setup(q_list: List[Fraction], a_index: int, n_a: int, minimum: int) -> Fraction:
    if len(set(q_list)) != len(q_list):
        raise ValueError("Q values must be distinct")
    if not 0 <= a_index < len(q_list):
        raise ValueError(f"a_index {a_index} out of range for {len(q_list)} Q values")
    if n_a < minimum:
        raise ValueError(f"n_a must be >= {minimum}")
    return q_list[a_index]


def _pole_order(f: RationalFunction, point: Fraction) -> int:
    return max(0, -f.order_at(point))


def _d_x(f: RationalFunction, x_prime: RationalFunction) -> RationalFunction:
    return f.derivative() / x_prime


def degree_shift_check(q_list: List[Fraction], a_index: int, n_a: int, f: RationalFunction) -> DegreeShiftResult:
    """
    Pole order at Q_a of h = f/(Q_a - y)^{n_a-1} before and after applying d/dx - (n_a-1).

    Raises:
        ValueError: Coinciding Q values, n_a < 2, or f singular at Q_a.
    """
    q_a = _check_log_setup(q_list, a_index, n_a, 2)
    if f.order_at(q_a) < 0:
        raise ValueError("f must be regular at Q_a")
    h = f / (RationalFunction.constant(q_a) - RationalFunction.identity()) ** (n_a - 1)
    shifted = _d_x(h, _x_prime(q_list)) - h * (n_a - 1)
    return DegreeShiftResult(n_a, _pole_order(h, q_a), _pole_order(shifted, q_a))


def _operator_product(q_list: List[Fraction], n_a: int, g: RationalFunction) -> RationalFunction:
    """(d_x + n_a - 1) ... (d_x + 1) g."""
    x_prime = _x_prime(q_list)
    h = g
    for k in range(1, n_a):
        h = _d_x(h, x_prime) + h * k
    return h


def operator_product_check(q_list: List[Fraction], a_index: int, n_a: int, g: RationalFunction) -> OperatorProductResult:
    """
    Expand (d_x + n_a - 1) ... (d_x + 1) g at Q_a as constant + O((y-Q_a)^v).

    Each factor d_x + k multiplies constants by k, so the constant is (n_a-1)! g(Q_a).
    """
    q_a = _check_log_setup(q_list, a_index, n_a, 1)
    if g.order_at(q_a) < 0:
        raise ValueError("g must be regular at Q_a")
    product = _operator_product(q_list, n_a, g)
    constant = product.evaluate(q_a)
    base = g.evaluate(q_a)
    ratio = constant / base if base else Fraction(int(constant == 0))
    return OperatorProductResult(n_a, (product - constant).order_at(q_a), ratio)


def residue_lemma_oracle(q_list: List[Fraction], a_index: int, n_a: int,
                         f: RationalFunction, g: RationalFunction) -> ResidueOracleResult:
    """
    Res_{y=Q_a} f/(y-Q_a)^{n_a} (d_x + n_a - 1) ... (d_x + 1) g, evaluated by Laurent
    expansion, beside g(Q_a) f^{(n_a-1)}(Q_a) and the same divided by (n_a-1)!.

    Raises:
        ValueError: Coinciding Q values, n_a < 1, or f, g singular at Q_a.
    """
    q_a = _check_log_setup(q_list, a_index, n_a, 1)
    if f.order_at(q_a) < 0 or g.order_at(q_a) < 0:
        raise ValueError("f and g must be regular at Q_a")
    integrand = f * RationalFunction.pole(q_a, n_a)
    brute = residue_at(integrand * _operator_product(q_list, n_a, g), q_a)
    f_derivative = expand_at(f, q_a, n_a - 1).coefficient(n_a - 1) * factorial(n_a - 1)
    stated = g.evaluate(q_a) * f_derivative
    return ResidueOracleResult(n_a, stated, stated / factorial(n_a - 1), brute)
