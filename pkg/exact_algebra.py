"""
Exact algebra kernel for specrec.

Rationals are fractions.Fraction throughout. Univariate polynomials over QQ are
sympy Poly objects in the symbol z, and a RationalFunction is a normalized pair
of them (coprime, monic denominator). On top of that sit truncated Laurent
expansions at a rational point or at infinity, bivariate (u, hbar) series with
rational-function coefficients, Bernoulli numbers and the S-function

    S(t) = (e^{t/2} - e^{-t/2}) / t.

No floating point is used anywhere.

Requires:
    pip install sympy
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from sympy import QQ, Poly, Rational, Symbol

from errors import IrrationalPoleError, SeriesDomainError, TruncationExhaustedError

logger = logging.getLogger(__name__)

Z = Symbol("z")

# Truncation order used for series that are known exactly (polynomials, monomials).
EXACT_ORDER = 10**18


class _Infinity:
    """The point at infinity of P^1; local coordinate t = 1/z."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITY"

    def __str__(self) -> str:
        return "oo"

    def __reduce__(self):
        return (_Infinity, ())


INFINITY = _Infinity()
Point = Union[Fraction, _Infinity]
Scalar = Union[int, Fraction, str]


# ---------------------------------------------------------------------------
# Rationals
# ---------------------------------------------------------------------------

def to_fraction(value) -> Fraction:
    """
    Convert an int, Fraction, "p/q" string or sympy Rational to a Fraction.

    Raises:
        TypeError: For floats and other inexact inputs.
        ValueError: For malformed strings.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f"inexact value {value!r} is not accepted")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if hasattr(value, "p") and hasattr(value, "q"):
        return Fraction(int(value.p), int(value.q))
    raise TypeError(f"cannot interpret {value!r} as a rational number")


def format_rational(value: Fraction) -> str:
    return str(to_fraction(value))


def parse_point(value) -> Point:
    if isinstance(value, _Infinity):
        return value
    if isinstance(value, str) and value.strip().lower() in {"oo", "inf", "infinity"}:
        return INFINITY
    return to_fraction(value)


def format_point(point: Point) -> str:
    return "oo" if point is INFINITY else str(point)


def point_sort_key(point: Point) -> Tuple[int, Fraction]:
    """Finite points in increasing order, infinity last."""
    if point is INFINITY:
        return (1, Fraction(0))
    return (0, point)


def _qq(value: Fraction) -> Rational:
    return Rational(value.numerator, value.denominator)


def _frac(value) -> Fraction:
    return Fraction(int(value.p), int(value.q))


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------

def make_polynomial(coefficients: Sequence[Scalar]) -> Poly:
    """Polynomial in z from ascending coefficients; trailing zeros are dropped."""
    coeffs = [to_fraction(c) for c in coefficients]
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    if not coeffs:
        return Poly(0, Z, domain=QQ)
    return Poly.from_list([_qq(c) for c in reversed(coeffs)], Z, domain=QQ)


def polynomial_coefficients(poly: Poly) -> List[Fraction]:
    """Ascending coefficients in canonical form (empty list for zero)."""
    if poly.is_zero:
        return []
    return [_frac(c) for c in reversed(poly.all_coeffs())]


def rational_roots(poly: Poly, context: str = "") -> List[Tuple[Fraction, int]]:
    """
    Roots of a polynomial with multiplicities, sorted.

    Raises:
        IrrationalPoleError: If an irreducible factor of degree > 1 occurs.
    """
    if poly.is_zero or poly.degree() <= 0:
        return []
    roots: List[Tuple[Fraction, int]] = []
    _, factors = poly.factor_list()
    for factor, multiplicity in factors:
        if factor.degree() == 1:
            c1, c0 = (_frac(c) for c in factor.all_coeffs())
            roots.append((-c0 / c1, multiplicity))
        elif factor.degree() > 1:
            raise IrrationalPoleError(str(factor.as_expr()), context)
    return sorted(roots)


# ---------------------------------------------------------------------------
# Rational functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RationalFunction:
    """
    Exact rational function of z over QQ.

    Always built through from_polys(), which cancels common factors and makes the
    denominator monic, so == is equality of functions.
    """
    numerator: Poly
    denominator: Poly

    @classmethod
    def from_polys(cls, numerator: Poly, denominator: Poly) -> "RationalFunction":
        if denominator.is_zero:
            raise ZeroDivisionError("rational function with zero denominator")
        if numerator.is_zero:
            return cls(Poly(0, Z, domain=QQ), Poly(1, Z, domain=QQ))
        common = numerator.gcd(denominator)
        if common.degree() > 0:
            numerator = numerator.exquo(common)
            denominator = denominator.exquo(common)
        lead = denominator.LC()
        return cls(numerator.quo_ground(lead), denominator.monic())

    @classmethod
    def from_coefficients(cls, numerator: Sequence[Scalar], denominator: Sequence[Scalar] = (1,)) -> "RationalFunction":
        return cls.from_polys(make_polynomial(numerator), make_polynomial(denominator))

    @classmethod
    def constant(cls, value: Scalar) -> "RationalFunction":
        return cls.from_coefficients([value])

    @classmethod
    def identity(cls) -> "RationalFunction":
        return cls.from_coefficients([0, 1])

    @classmethod
    def pole(cls, point: Scalar, order: int = 1, coefficient: Scalar = 1) -> "RationalFunction":
        """coefficient / (z - point)^order."""
        base = make_polynomial([-to_fraction(point), 1])
        return cls.from_polys(make_polynomial([coefficient]), base ** order)

    @classmethod
    def coerce(cls, value) -> "RationalFunction":
        if isinstance(value, RationalFunction):
            return value
        return cls.constant(value)

    # arithmetic ---------------------------------------------------------

    def __add__(self, other) -> "RationalFunction":
        other = RationalFunction.coerce(other)
        if self.denominator == other.denominator:
            return RationalFunction.from_polys(self.numerator + other.numerator, self.denominator)
        return RationalFunction.from_polys(
            self.numerator * other.denominator + other.numerator * self.denominator,
            self.denominator * other.denominator,
        )

    __radd__ = __add__

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.numerator, self.denominator)

    def __sub__(self, other) -> "RationalFunction":
        return self + (-RationalFunction.coerce(other))

    def __rsub__(self, other) -> "RationalFunction":
        return RationalFunction.coerce(other) - self

    def __mul__(self, other) -> "RationalFunction":
        if not isinstance(other, RationalFunction):
            scalar = to_fraction(other)
            if scalar == 0:
                return RationalFunction.constant(0)
            return RationalFunction(self.numerator.mul_ground(_qq(scalar)), self.denominator)
        if self.is_zero() or other.is_zero():
            return RationalFunction.constant(0)
        return RationalFunction.from_polys(self.numerator * other.numerator, self.denominator * other.denominator)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RationalFunction":
        other = RationalFunction.coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction.from_polys(self.numerator * other.denominator, self.denominator * other.numerator)

    def __rtruediv__(self, other) -> "RationalFunction":
        return RationalFunction.coerce(other) / self

    def __pow__(self, exponent: int) -> "RationalFunction":
        if exponent < 0:
            return RationalFunction.constant(1) / (self ** (-exponent))
        return RationalFunction.from_polys(self.numerator ** exponent, self.denominator ** exponent)

    def derivative(self) -> "RationalFunction":
        num, den = self.numerator, self.denominator
        return RationalFunction.from_polys(num.diff(Z) * den - num * den.diff(Z), den * den)

    def translate(self, shift: Scalar) -> "RationalFunction":
        """The function z -> f(z + shift)."""
        shift = _qq(to_fraction(shift))
        return RationalFunction.from_polys(self.numerator.shift(shift), self.denominator.shift(shift))

    # queries ------------------------------------------------------------

    def is_zero(self) -> bool:
        return self.numerator.is_zero

    def is_polynomial(self) -> bool:
        return self.denominator.degree() == 0

    def is_constant(self) -> bool:
        return self.is_polynomial() and (self.numerator.is_zero or self.numerator.degree() == 0)

    def evaluate(self, point: Scalar) -> Fraction:
        point = to_fraction(point)
        den = _frac(self.denominator.eval(_qq(point)))
        if den == 0:
            raise ZeroDivisionError(f"rational function has a pole at z={point}")
        return _frac(self.numerator.eval(_qq(point))) / den

    def degree_at_infinity(self) -> int:
        """deg(numerator) - deg(denominator); positive means a pole at infinity."""
        if self.is_zero():
            return -EXACT_ORDER
        return self.numerator.degree() - self.denominator.degree()

    def poles(self) -> List[Tuple[Fraction, int]]:
        """Finite poles with orders."""
        return rational_roots(self.denominator, "locating poles")

    def zeros(self) -> List[Tuple[Fraction, int]]:
        """Finite zeros with multiplicities."""
        return rational_roots(self.numerator, "locating zeros")

    def order_at(self, point: Point) -> int:
        """Valuation in the local coordinate (negative for a pole)."""
        if self.is_zero():
            return EXACT_ORDER
        if point is INFINITY:
            return -self.degree_at_infinity()
        return _multiplicity(self.numerator, point) - _multiplicity(self.denominator, point)

    def to_json(self) -> Dict[str, List[str]]:
        return {
            "num": [format_rational(c) for c in polynomial_coefficients(self.numerator)],
            "den": [format_rational(c) for c in polynomial_coefficients(self.denominator)],
        }

    def __str__(self) -> str:
        return f"({self.numerator.as_expr()})/({self.denominator.as_expr()})"


def _multiplicity(poly: Poly, point: Fraction) -> int:
    coeffs = polynomial_coefficients(poly.shift(_qq(point)))
    for index, c in enumerate(coeffs):
        if c != 0:
            return index
    return 0


def ratfunc_arith(a: RationalFunction, b: Optional[RationalFunction], op: str) -> RationalFunction:
    """
    Apply one of add, sub, mul, div or derivative (which ignores b).

    Raises:
        ZeroDivisionError: For division by the zero function.
        ValueError: For an unknown op.
    """
    if op == "derivative":
        return a.derivative()
    if b is None:
        raise ValueError(f"operation {op} needs a second operand")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown rational-function operation {op!r}")


@dataclass(frozen=True)
class PartialFractions:
    polynomial_part: Poly
    terms: Tuple[Tuple[Fraction, int, Fraction], ...]

    def to_function(self) -> RationalFunction:
        total = RationalFunction.from_polys(self.polynomial_part, make_polynomial([1]))
        for pole, order, coefficient in self.terms:
            total = total + RationalFunction.pole(pole, order, coefficient)
        return total


def partial_fractions(f: RationalFunction) -> PartialFractions:
    """
    f = polynomial_part + sum coefficient / (z - pole)^order.

    Raises:
        IrrationalPoleError: If the denominator has an irrational root.
    """
    terms: List[Tuple[Fraction, int, Fraction]] = []
    for pole, multiplicity in f.poles():
        local = expand_at(f, pole, -1)
        for order in range(1, multiplicity + 1):
            c = local.coefficient(-order)
            if c != 0:
                terms.append((pole, order, c))
    quotient, _ = f.numerator.div(f.denominator)
    return PartialFractions(quotient, tuple(sorted(terms)))


# ---------------------------------------------------------------------------
# Laurent expansions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LaurentExpansion:
    """
    Truncated Laurent series sum_k c_k t^k in a local coordinate at `point`.

    coefficients[0] belongs to t^min_degree; coefficients are known exactly up to
    and including t^truncation_order, and stored entries stop at the last nonzero
    one. Exact series (polynomials in t) use EXACT_ORDER as truncation order.
    """
    point: Point
    min_degree: int
    coefficients: Tuple[Fraction, ...]
    truncation_order: int

    @classmethod
    def build(cls, point: Point, min_degree: int, coefficients: Iterable[Fraction], truncation_order: int) -> "LaurentExpansion":
        coeffs = list(coefficients)
        keep = truncation_order - min_degree + 1
        if keep < len(coeffs):
            coeffs = coeffs[:max(keep, 0)]
        start = 0
        while start < len(coeffs) and coeffs[start] == 0:
            start += 1
        end = len(coeffs)
        while end > start and coeffs[end - 1] == 0:
            end -= 1
        if start == end:
            return cls(point, truncation_order, (), truncation_order)
        return cls(point, min_degree + start, tuple(coeffs[start:end]), truncation_order)

    @classmethod
    def constant(cls, value: Scalar, point: Point = Fraction(0)) -> "LaurentExpansion":
        return cls.build(point, 0, [to_fraction(value)], EXACT_ORDER)

    @classmethod
    def monomial(cls, value: Scalar, degree: int, point: Point = Fraction(0)) -> "LaurentExpansion":
        return cls.build(point, degree, [to_fraction(value)], EXACT_ORDER)

    @classmethod
    def zero(cls, truncation_order: int = EXACT_ORDER, point: Point = Fraction(0)) -> "LaurentExpansion":
        return cls(point, truncation_order, (), truncation_order)

    @property
    def valuation(self) -> int:
        """Lowest degree with a nonzero coefficient, or truncation_order + 1 if none is known."""
        if not self.coefficients:
            return self.truncation_order + 1
        return self.min_degree

    @property
    def is_exact(self) -> bool:
        return self.truncation_order >= EXACT_ORDER // 2

    def is_zero(self) -> bool:
        return not self.coefficients

    def coefficient(self, degree: int) -> Fraction:
        """
        Raises:
            TruncationExhaustedError: If degree lies beyond the known precision.
        """
        if degree > self.truncation_order:
            raise TruncationExhaustedError(degree, self.truncation_order)
        index = degree - self.min_degree
        if not self.coefficients or index < 0 or index >= len(self.coefficients):
            return Fraction(0)
        return self.coefficients[index]

    def residue(self) -> Fraction:
        return self.coefficient(-1)

    def items(self) -> List[Tuple[int, Fraction]]:
        return [(self.min_degree + i, c) for i, c in enumerate(self.coefficients) if c != 0]

    def pair_residue(self, other: "LaurentExpansion") -> Fraction:
        """
        Coefficient of t^-1 in self * other without forming the product.

        Raises:
            TruncationExhaustedError: If either factor is not known far enough.
        """
        if not self.coefficients or not other.coefficients:
            if self.truncation_order < -1 - other.valuation or other.truncation_order < -1 - self.valuation:
                raise TruncationExhaustedError(-1, min(self.valuation + other.truncation_order,
                                                       other.valuation + self.truncation_order))
            return Fraction(0)
        va, vb = self.min_degree, other.min_degree
        if self.truncation_order < -1 - vb:
            raise TruncationExhaustedError(-1 - vb, self.truncation_order)
        if other.truncation_order < -1 - va:
            raise TruncationExhaustedError(-1 - va, other.truncation_order)
        total = Fraction(0)
        b = other.coefficients
        for i, ai in enumerate(self.coefficients):
            j = -1 - (va + i) - vb
            if j < 0:
                break
            if ai and j < len(b) and b[j]:
                total += ai * b[j]
        return total

    def truncate(self, order: int) -> "LaurentExpansion":
        return LaurentExpansion.build(self.point, self.min_degree, self.coefficients, min(order, self.truncation_order))

    # arithmetic ---------------------------------------------------------

    def __add__(self, other) -> "LaurentExpansion":
        if not isinstance(other, LaurentExpansion):
            other = LaurentExpansion.constant(other, self.point)
        trunc = min(self.truncation_order, other.truncation_order)
        if not other.coefficients:
            return self.truncate(trunc)
        if not self.coefficients:
            return other.truncate(trunc)
        low = min(self.min_degree, other.min_degree)
        high = min(trunc, max(self.min_degree + len(self.coefficients), other.min_degree + len(other.coefficients)) - 1)
        out = [Fraction(0)] * max(high - low + 1, 0)
        for series in (self, other):
            for i, c in enumerate(series.coefficients):
                k = series.min_degree + i - low
                if k < len(out):
                    out[k] += c
        return LaurentExpansion.build(self.point, low, out, trunc)

    __radd__ = __add__

    def __neg__(self) -> "LaurentExpansion":
        return LaurentExpansion(self.point, self.min_degree, tuple(-c for c in self.coefficients), self.truncation_order)

    def __sub__(self, other) -> "LaurentExpansion":
        if not isinstance(other, LaurentExpansion):
            other = LaurentExpansion.constant(other, self.point)
        return self + (-other)

    def scale(self, value: Scalar) -> "LaurentExpansion":
        value = to_fraction(value)
        if value == 0:
            return LaurentExpansion.zero(self.truncation_order, self.point)
        return LaurentExpansion(self.point, self.min_degree, tuple(c * value for c in self.coefficients), self.truncation_order)

    def shift(self, degree: int) -> "LaurentExpansion":
        """Exact multiplication by t^degree."""
        trunc = self.truncation_order if self.is_exact else self.truncation_order + degree
        if not self.coefficients:
            return LaurentExpansion.zero(trunc, self.point)
        return LaurentExpansion(self.point, self.min_degree + degree, self.coefficients, trunc)

    def __mul__(self, other) -> "LaurentExpansion":
        if not isinstance(other, LaurentExpansion):
            return self.scale(other)
        low = self.valuation + other.valuation
        trunc = min(self.valuation + other.truncation_order, other.valuation + self.truncation_order)
        if not self.coefficients or not other.coefficients:
            return LaurentExpansion.zero(trunc, self.point)
        a, b = self.coefficients, other.coefficients
        size = min(len(a) + len(b) - 1, trunc - low + 1)
        if size <= 0:
            return LaurentExpansion.zero(trunc, self.point)
        out = [Fraction(0)] * size
        for i, ai in enumerate(a):
            if i >= size:
                break
            if not ai:
                continue
            for j in range(min(len(b), size - i)):
                bj = b[j]
                if bj:
                    out[i + j] += ai * bj
        return LaurentExpansion.build(self.point, low, out, trunc)

    __rmul__ = __mul__

    def inverse(self, order: Optional[int] = None) -> "LaurentExpansion":
        """
        Reciprocal series.

        Raises:
            SeriesDomainError: If the series is zero to known precision, or exact
                without an explicit order.
        """
        if not self.coefficients:
            raise SeriesDomainError("cannot invert a series that vanishes to known precision")
        v = self.valuation
        trunc = self.truncation_order - 2 * v if not self.is_exact else EXACT_ORDER
        if order is not None:
            trunc = min(trunc, order)
        if trunc >= EXACT_ORDER // 2:
            raise SeriesDomainError("inverse of an exact series needs an explicit truncation order")
        count = trunc + v + 1
        a = self.coefficients
        lead = a[0]
        out: List[Fraction] = []
        for k in range(max(count, 0)):
            acc = Fraction(1) if k == 0 else Fraction(0)
            for i in range(1, min(k, len(a) - 1) + 1):
                if a[i]:
                    acc -= a[i] * out[k - i]
            out.append(acc / lead)
        return LaurentExpansion.build(self.point, -v, out, trunc)

    def power(self, exponent: int, order: Optional[int] = None) -> "LaurentExpansion":
        if exponent < 0:
            return self.inverse(order).power(-exponent, order)
        result = LaurentExpansion.constant(1, self.point)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
                if order is not None:
                    result = result.truncate(order)
            exponent >>= 1
            if exponent:
                base = base * base
                if order is not None:
                    base = base.truncate(order)
        return result

    def derivative(self) -> "LaurentExpansion":
        trunc = self.truncation_order if self.is_exact else self.truncation_order - 1
        out = [(self.min_degree + i) * c for i, c in enumerate(self.coefficients)]
        return LaurentExpansion.build(self.point, self.min_degree - 1, out, trunc)

    def integral(self) -> "LaurentExpansion":
        """
        Primitive with zero constant term.

        Raises:
            SeriesDomainError: If a t^{-1} term is present (the primitive is a log).
        """
        if self.coefficient(-1) != 0:
            raise SeriesDomainError("series with a simple pole has a logarithmic primitive")
        out = []
        for i, c in enumerate(self.coefficients):
            k = self.min_degree + i
            out.append(c / (k + 1) if k != -1 else Fraction(0))
        trunc = self.truncation_order if self.is_exact else self.truncation_order + 1
        return LaurentExpansion.build(self.point, self.min_degree + 1, out, trunc)

    def compose(self, inner: "LaurentExpansion") -> "LaurentExpansion":
        """
        The series t -> self(inner(t)) for a power series self and inner = O(t).

        Raises:
            SeriesDomainError: If self has a pole or inner has no positive valuation.
        """
        if not self.coefficients:
            v = max(inner.valuation, 1)
            return LaurentExpansion.zero((self.truncation_order + 1) * v - 1, inner.point)
        if self.min_degree < 0:
            raise SeriesDomainError("compose() expects a power series as outer function")
        if inner.valuation < 1:
            raise SeriesDomainError("compose() expects an inner series vanishing at t=0")
        result = LaurentExpansion.constant(self.coefficients[-1], inner.point)
        for c in reversed(self.coefficients[:-1]):
            result = result * inner + c
        if self.min_degree:
            result = result * inner.power(self.min_degree)
        if not self.is_exact:
            cap = (self.truncation_order + 1) * inner.valuation - 1
            result = result.truncate(cap)
        return result


def _series_quotient(numerator: List[Fraction], denominator: List[Fraction], count: int) -> List[Fraction]:
    """First `count` coefficients of numerator/denominator as power series (denominator[0] != 0)."""
    lead = denominator[0]
    out: List[Fraction] = []
    for k in range(count):
        acc = numerator[k] if k < len(numerator) else Fraction(0)
        for i in range(1, min(k, len(denominator) - 1) + 1):
            if denominator[i]:
                acc -= denominator[i] * out[k - i]
        out.append(acc / lead)
    return out


def expand_at(f: RationalFunction, point: Point, order: int) -> LaurentExpansion:
    """
    Laurent expansion of f at a rational point (t = z - point) or at INFINITY (t = 1/z),
    known up to and including t^order.
    """
    if f.is_zero():
        return LaurentExpansion.zero(order, point)
    if point is INFINITY:
        num = list(reversed(polynomial_coefficients(f.numerator)))
        den = list(reversed(polynomial_coefficients(f.denominator)))
        valuation = f.denominator.degree() - f.numerator.degree()
    else:
        shift = _qq(to_fraction(point))
        num = polynomial_coefficients(f.numerator.shift(shift))
        den = polynomial_coefficients(f.denominator.shift(shift))
        n0 = next(i for i, c in enumerate(num) if c != 0)
        d0 = next(i for i, c in enumerate(den) if c != 0)
        num, den = num[n0:], den[d0:]
        valuation = n0 - d0
    count = order - valuation + 1
    if count <= 0:
        return LaurentExpansion.zero(order, point)
    return LaurentExpansion.build(point, valuation, _series_quotient(num, den, count), order)


def residue_at(f: RationalFunction, point: Point) -> Fraction:
    """
    Residue of the 1-form f(z) dz.

    At INFINITY the orientation makes the sum of all residues (finite poles and
    infinity) vanish: Res_oo f dz = -[1/z]f.
    """
    if point is INFINITY:
        return -expand_at(f, INFINITY, 1).coefficient(1)
    if f.order_at(point) >= 0:
        return Fraction(0)
    return expand_at(f, point, -1).coefficient(-1)


# ---------------------------------------------------------------------------
# Bivariate (u, hbar) series
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SeriesUH:
    """
    Truncated series sum c_{i,j}(z) u^i hbar^j with RationalFunction coefficients.

    Absent entries are zero; every stored degree respects (max_u, max_hbar).
    """
    max_u: int
    max_hbar: int
    coeff: Dict[Tuple[int, int], RationalFunction] = field(default_factory=dict)

    @classmethod
    def from_terms(cls, max_u: int, max_hbar: int, terms: Dict[Tuple[int, int], RationalFunction]) -> "SeriesUH":
        kept: Dict[Tuple[int, int], RationalFunction] = {}
        for (u, h), value in terms.items():
            value = RationalFunction.coerce(value)
            if u <= max_u and h <= max_hbar and not value.is_zero():
                kept[(u, h)] = value
        return cls(max_u, max_hbar, kept)

    @classmethod
    def one(cls, max_u: int, max_hbar: int) -> "SeriesUH":
        return cls.from_terms(max_u, max_hbar, {(0, 0): RationalFunction.constant(1)})

    def is_zero(self) -> bool:
        return not self.coeff

    def __add__(self, other: "SeriesUH") -> "SeriesUH":
        terms = dict(self.coeff)
        for key, value in other.coeff.items():
            terms[key] = terms[key] + value if key in terms else value
        return SeriesUH.from_terms(min(self.max_u, other.max_u), min(self.max_hbar, other.max_hbar), terms)

    def scale(self, value) -> "SeriesUH":
        return SeriesUH.from_terms(self.max_u, self.max_hbar, {k: v * value for k, v in self.coeff.items()})

    def __mul__(self, other: "SeriesUH") -> "SeriesUH":
        max_u, max_hbar = min(self.max_u, other.max_u), min(self.max_hbar, other.max_hbar)
        terms: Dict[Tuple[int, int], RationalFunction] = {}
        for (u1, h1), c1 in self.coeff.items():
            for (u2, h2), c2 in other.coeff.items():
                key = (u1 + u2, h1 + h2)
                if key[0] > max_u or key[1] > max_hbar:
                    continue
                product = c1 * c2
                terms[key] = terms[key] + product if key in terms else product
        return SeriesUH.from_terms(max_u, max_hbar, terms)

    def exp(self) -> "SeriesUH":
        """
        Raises:
            SeriesDomainError: If the series has a constant term.
        """
        if (0, 0) in self.coeff:
            raise SeriesDomainError("exp() needs a series without (0,0) term")
        result = SeriesUH.one(self.max_u, self.max_hbar)
        term = result
        k = 0
        while True:
            k += 1
            term = (term * self).scale(Fraction(1, k))
            if term.is_zero():
                return result
            result = result + term

    def reciprocal(self) -> "SeriesUH":
        """
        Raises:
            SeriesDomainError: If the constant term is not 1.
        """
        constant = self.coeff.get((0, 0))
        if constant is None or constant != RationalFunction.constant(1):
            raise SeriesDomainError("reciprocal() needs constant term exactly 1")
        rest = SeriesUH.from_terms(self.max_u, self.max_hbar, {k: -v for k, v in self.coeff.items() if k != (0, 0)})
        result = SeriesUH.one(self.max_u, self.max_hbar)
        term = result
        while True:
            term = term * rest
            if term.is_zero():
                return result
            result = result + term

    def extract(self, u_degree: int, hbar_degree: int) -> RationalFunction:
        """
        Raises:
            SeriesDomainError: If the degrees exceed the stored bounds.
        """
        if not (0 <= u_degree <= self.max_u and 0 <= hbar_degree <= self.max_hbar):
            raise SeriesDomainError(
                f"coefficient (u^{u_degree}, hbar^{hbar_degree}) outside bounds ({self.max_u}, {self.max_hbar})")
        return self.coeff.get((u_degree, hbar_degree), RationalFunction.constant(0))


def series_mul_exp(s: SeriesUH, mode: str, other: Optional[SeriesUH] = None) -> SeriesUH:
    if mode == "mul":
        if other is None:
            raise SeriesDomainError("mul needs a second series")
        return s * other
    if mode == "exp":
        return s.exp()
    if mode == "reciprocal":
        return s.reciprocal()
    raise SeriesDomainError(f"unknown series mode {mode!r}")


def coefficient_extract(s: SeriesUH, u_degree: int, hbar_degree: int) -> RationalFunction:
    return s.extract(u_degree, hbar_degree)


# ---------------------------------------------------------------------------
# Bernoulli numbers and the S-function
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _bernoulli_table(n: int) -> Tuple[Fraction, ...]:
    # sum_{k=0}^{m} C(m+1, k) B_k = 0, B_1 = -1/2
    table = [Fraction(1)]
    for m in range(1, n + 1):
        acc = sum((comb(m + 1, k) * table[k] for k in range(m)), Fraction(0))
        table.append(-acc / (m + 1))
    return tuple(table)


def bernoulli(n: int) -> Fraction:
    """
    Bernoulli number B_n for even n >= 2.

    Raises:
        ValueError: For odd or nonpositive n.
    """
    if n < 2 or n % 2:
        raise ValueError(f"bernoulli() expects an even n >= 2, got {n}")
    return _bernoulli_table(n)[n]


def s_function_series(kind: str, max_degree: int, exponent: int = 1) -> LaurentExpansion:
    """
    Coefficients of S(t), 1/S(t) or S(t)^exponent up to t^max_degree.

    kind is one of "S", "inverseS", "power".
    """
    coeffs = [Fraction(0)] * (max_degree + 1)
    for k in range(0, max_degree // 2 + 1):
        coeffs[2 * k] = Fraction(1, 4 ** k * factorial(2 * k + 1))
    s = LaurentExpansion.build(Fraction(0), 0, coeffs, max_degree)
    if kind == "S":
        return s
    if kind == "inverseS":
        return s.inverse(max_degree)
    if kind == "power":
        return s.power(exponent, max_degree)
    raise ValueError(f"unknown S-series kind {kind!r}")
