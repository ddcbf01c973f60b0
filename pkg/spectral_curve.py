"""
Genus-zero spectral curves (P^1, x, y, B).

x and y are CurveFunctions: an exact rational function plus logarithmic atoms
c*log(z - a), or exactly log z. Their differentials are always rational, so all
local data (ramification points, deck involutions, primitives, residue point
classification) stays in QQ.

Requires:
    pip install sympy pydantic
"""
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple, Union

from config import CurveConfig, FunctionConfig
from errors import (
    CurveValidationError,
    IrrationalPoleError,
    NonSimpleRamificationError,
    PathUnavailableError,
    SeriesDomainError,
)
from exact_algebra import (
    EXACT_ORDER,
    INFINITY,
    LaurentExpansion,
    Point,
    RationalFunction,
    expand_at,
    format_point,
    partial_fractions,
    point_sort_key,
    polynomial_coefficients,
    rational_roots,
    residue_at,
    to_fraction,
)

logger = logging.getLogger(__name__)

PLAIN = "plain"
LOG_OF_Z = "log_z"


@dataclass(frozen=True, order=True)
class LogAtom:
    """coefficient * log(z - branch_point); dy has residue coefficient = 1/alpha there."""
    branch_point: Fraction
    coefficient: Fraction

    @property
    def alpha(self) -> Fraction:
        return 1 / self.coefficient


@dataclass(frozen=True)
class LogLinear:
    """rational + sum coeff*log(arg): the constant value of a CurveFunction at a point."""
    rational: Fraction = Fraction(0)
    logs: Tuple[Tuple[Fraction, Fraction], ...] = ()

    @classmethod
    def build(cls, rational: Fraction, logs: Dict[Fraction, Fraction]) -> "LogLinear":
        kept = tuple(sorted((arg, c) for arg, c in logs.items() if c != 0 and arg != 1))
        return cls(Fraction(rational), kept)

    def __add__(self, other: "LogLinear") -> "LogLinear":
        logs = dict(self.logs)
        for arg, c in other.logs:
            logs[arg] = logs.get(arg, Fraction(0)) + c
        return LogLinear.build(self.rational + other.rational, logs)

    def scale(self, value: Fraction) -> "LogLinear":
        return LogLinear.build(self.rational * value, {arg: c * value for arg, c in self.logs})

    def is_zero(self) -> bool:
        return self.rational == 0 and not self.logs

    def __str__(self) -> str:
        parts = [str(self.rational)] + [f"{c}*log({arg})" for arg, c in self.logs]
        return " + ".join(parts)


def log_series_at(branch_point: Fraction, point: Point, order: int) -> LaurentExpansion:
    """
    Local series of log(z - branch_point) with its constant removed.

    At a finite point p != branch_point this is log(1 + t/(p - a)); at INFINITY it is
    log(1 - a*t), the -log(t) part being left to the caller.
    """
    if point is INFINITY:
        coeffs = [Fraction(0)] + [-(branch_point ** k) / k for k in range(1, order + 1)]
        return LaurentExpansion.build(INFINITY, 0, coeffs, order)
    delta = point - branch_point
    if delta == 0:
        raise SeriesDomainError(f"log(z - {branch_point}) has no series at its own branch point")
    coeffs = [Fraction(0)] + [Fraction((-1) ** (k + 1), k) / delta ** k for k in range(1, order + 1)]
    return LaurentExpansion.build(point, 0, coeffs, order)


@dataclass(frozen=True)
class CurveFunction:
    rational_part: RationalFunction
    log_atoms: Tuple[LogAtom, ...] = ()
    kind: str = PLAIN
    constant_logs: Tuple[Tuple[Fraction, Fraction], ...] = ()

    @classmethod
    def rational(cls, f: RationalFunction) -> "CurveFunction":
        return cls(f)

    @classmethod
    def log_z(cls) -> "CurveFunction":
        return cls(RationalFunction.constant(0), (), LOG_OF_Z)

    @classmethod
    def from_parts(cls, rational_part: RationalFunction, atoms: Iterable[Tuple[Fraction, Fraction]] = (),
                   constant_logs: Iterable[Tuple[Fraction, Fraction]] = ()) -> "CurveFunction":
        merged: Dict[Fraction, Fraction] = {}
        for a, c in atoms:
            a, c = to_fraction(a), to_fraction(c)
            merged[a] = merged.get(a, Fraction(0)) + c
        consts: Dict[Fraction, Fraction] = {}
        for arg, c in constant_logs:
            arg, c = to_fraction(arg), to_fraction(c)
            consts[arg] = consts.get(arg, Fraction(0)) + c
        return cls(
            rational_part,
            tuple(sorted(LogAtom(a, c) for a, c in merged.items() if c != 0)),
            PLAIN,
            tuple(sorted((arg, c) for arg, c in consts.items() if c != 0 and arg != 1)),
        )

    def is_log_z(self) -> bool:
        return self.kind == LOG_OF_Z

    def atoms(self) -> Tuple[LogAtom, ...]:
        """Log atoms with log z spelled out as the atom (0, 1)."""
        if self.is_log_z():
            return (LogAtom(Fraction(0), Fraction(1)),)
        return self.log_atoms

    def is_rational(self) -> bool:
        return not self.atoms()

    def log_points(self) -> List[Fraction]:
        return [atom.branch_point for atom in self.atoms()]

    def log_coefficient_at_infinity(self) -> Fraction:
        """Coefficient of log(t), t = 1/z, at infinity."""
        return -sum((atom.coefficient for atom in self.atoms()), Fraction(0))

    def derivative(self) -> RationalFunction:
        total = self.rational_part.derivative()
        for atom in self.atoms():
            total = total + RationalFunction.pole(atom.branch_point, 1, atom.coefficient)
        return total

    def __add__(self, other: "CurveFunction") -> "CurveFunction":
        return CurveFunction.from_parts(
            self.rational_part + other.rational_part,
            [(a.branch_point, a.coefficient) for a in self.atoms() + other.atoms()],
            self.constant_logs + other.constant_logs,
        )

    def scale(self, value) -> "CurveFunction":
        value = to_fraction(value)
        return CurveFunction.from_parts(
            self.rational_part * value,
            [(a.branch_point, a.coefficient * value) for a in self.atoms()],
            [(arg, c * value) for arg, c in self.constant_logs],
        )

    def translate(self, shift) -> "CurveFunction":
        """The function z -> f(z + shift)."""
        shift = to_fraction(shift)
        if self.is_log_z():
            return CurveFunction.from_parts(RationalFunction.constant(0), [(-shift, 1)])
        return CurveFunction.from_parts(
            self.rational_part.translate(shift),
            [(a.branch_point - shift, a.coefficient) for a in self.log_atoms],
            self.constant_logs,
        )

    def singular_at(self, point: Point) -> bool:
        """True at poles of the rational part and at log points (infinity included)."""
        if point is INFINITY:
            return self.rational_part.degree_at_infinity() > 0 or self.log_coefficient_at_infinity() != 0
        return self.rational_part.order_at(point) < 0 or point in self.log_points()

    def local_expansion(self, point: Point, order: int) -> LaurentExpansion:
        """
        Laurent series of f(point + t) (or f(1/t)) with log constants removed.

        Raises:
            SeriesDomainError: At a log point of f.
        """
        series = expand_at(self.rational_part, point, order)
        if point is INFINITY and self.log_coefficient_at_infinity() != 0:
            raise SeriesDomainError("function has a logarithmic singularity at infinity")
        for atom in self.atoms():
            series = series + log_series_at(atom.branch_point, point, order).scale(atom.coefficient)
        return series

    def log_constant_at(self, point: Point) -> LogLinear:
        """The transcendental constant dropped by local_expansion()."""
        logs: Dict[Fraction, Fraction] = dict(self.constant_logs)
        if point is not INFINITY:
            for atom in self.atoms():
                arg = point - atom.branch_point
                logs[arg] = logs.get(arg, Fraction(0)) + atom.coefficient
        return LogLinear.build(Fraction(0), logs)

    def value_at(self, point: Fraction) -> LogLinear:
        """Exact value at a regular finite point."""
        rational = self.rational_part.evaluate(point)
        return LogLinear(rational) + self.log_constant_at(point)

    def to_document(self) -> dict:
        if self.is_log_z():
            return {"kind": LOG_OF_Z}
        doc: dict = {"rational": self.rational_part.to_json()}
        if self.log_atoms:
            doc["logs"] = [{"a": str(a.branch_point), "coeff": str(a.coefficient)} for a in self.log_atoms]
        if self.constant_logs:
            doc["log_constants"] = [{"arg": str(arg), "coeff": str(c)} for arg, c in self.constant_logs]
        return doc

    def __str__(self) -> str:
        if self.is_log_z():
            return "log(z)"
        parts = [str(self.rational_part)] + [f"{a.coefficient}*log(z - {a.branch_point})" for a in self.log_atoms]
        parts += [f"{c}*log({arg})" for arg, c in self.constant_logs]
        return " + ".join(parts)


@dataclass(frozen=True)
class SpectralCurve:
    """(P^1, x, y, B) with B = dz1 dz2 / (z1 - z2)^2."""
    x: CurveFunction
    y: CurveFunction
    label: str = "curve"

    def dx(self) -> RationalFunction:
        return self.x.derivative()

    def dy(self) -> RationalFunction:
        return self.y.derivative()

    def to_document(self) -> dict:
        return {"label": self.label, "x": self.x.to_document(), "y": self.y.to_document()}

    @property
    def fingerprint(self) -> str:
        """Hash of the canonical document, label excluded."""
        doc = {"x": self.x.to_document(), "y": self.y.to_document()}
        return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class DeckSeries:
    """Local involution sigma(t) = -t + O(t^2) around center, with x(center + sigma(t)) = x(center + t)."""
    center: Fraction
    series: LaurentExpansion

    @property
    def order(self) -> int:
        return self.series.truncation_order

    def apply(self, local: LaurentExpansion) -> LaurentExpansion:
        """f(center + sigma(t)) for a power series f(center + t)."""
        return local.compose(self.series)

    def involution_residual(self) -> LaurentExpansion:
        return self.series.compose(self.series) - LaurentExpansion.monomial(1, 1, self.center)


@dataclass(frozen=True)
class RamificationPoint:
    location: Fraction
    deck: Optional[DeckSeries] = None


@dataclass(frozen=True)
class ResiduePointSet:
    ram_x: Optional[List[Fraction]]
    ram_y: Optional[List[Fraction]]
    log_y: List[LogAtom]
    log_x: List[LogAtom]
    poles_primal: List[Point]
    poles_dual: List[Point]
    primal_residues: Dict[str, LogLinear] = field(default_factory=dict)
    dual_residues: Dict[str, LogLinear] = field(default_factory=dict)

    def ambiguous(self) -> List[Point]:
        """Points classified both as primal and as dual poles."""
        return [b for b in self.poles_primal if b in self.poles_dual]


# ---------------------------------------------------------------------------
# Construction and validation
# ---------------------------------------------------------------------------

def _function_from_config(cfg: FunctionConfig) -> CurveFunction:
    if cfg.kind == LOG_OF_Z:
        return CurveFunction.log_z()
    rational = RationalFunction.constant(0)
    if cfg.rational is not None:
        rational = RationalFunction.from_coefficients(cfg.rational.num, cfg.rational.den)
    return CurveFunction.from_parts(
        rational,
        [(atom.a, atom.coeff) for atom in cfg.logs],
        [(c.arg, c.coeff) for c in cfg.log_constants],
    )


def parse_curve(config: Union[CurveConfig, dict]) -> SpectralCurve:
    """
    Build a validated curve from a curve document.

    Args:
        config (CurveConfig | dict): Document following the curve schema.

    Returns:
        SpectralCurve: Validated curve, framing applied.

    Raises:
        pydantic.ValidationError: Schema violation.
        CurveValidationError: y with general log atoms, constant x or y.
        IrrationalPoleError: A pole or log point is irrational.
        NonSimpleRamificationError: dx vanishes to order >= 2.
    """
    if not isinstance(config, CurveConfig):
        config = CurveConfig.model_validate(config)
    x = _function_from_config(config.x)
    y = _function_from_config(config.y)
    if y.log_atoms:
        raise CurveValidationError("y may be rational or exactly log z; general log atoms in y are not supported")
    curve = make_curve(x, y, config.label)
    if config.framing:
        curve = frame_curve(curve, config.framing)
    return curve


def make_curve(x: CurveFunction, y: CurveFunction, label: str = "curve") -> SpectralCurve:
    """Construct and validate a curve from its two functions."""
    curve = SpectralCurve(x, y, label)
    validate_curve(curve)
    return curve


def validate_curve(curve: SpectralCurve) -> None:
    """
    Raises:
        CurveValidationError: Constant x or y, or a log point of y at which dx is regular at infinity.
        IrrationalPoleError: Irrational pole of x or y.
        NonSimpleRamificationError: Higher-order zero of dx.
    """
    for name, f in (("x", curve.x), ("y", curve.y)):
        if f.derivative().is_zero():
            raise CurveValidationError(f"{name} is constant")
        f.rational_part.poles()
    dx = curve.dx()
    if not dx.numerator.is_zero and dx.numerator.degree() > 0:
        _, factors = dx.numerator.sqf_list()
        for factor, multiplicity in factors:
            if multiplicity >= 2:
                point = _describe_factor(factor)
                raise NonSimpleRamificationError(point, multiplicity)
    order_inf = dx.order_at(INFINITY) - 2
    if order_inf >= 2:
        raise NonSimpleRamificationError("oo", order_inf)


def _describe_factor(factor) -> str:
    if factor.degree() == 1:
        c1, c0 = polynomial_coefficients(factor)[1], polynomial_coefficients(factor)[0]
        return str(-c0 / c1)
    return str(factor.as_expr())


def frame_curve(curve: SpectralCurve, framing: int) -> SpectralCurve:
    """x -> x + framing * y, y unchanged."""
    if framing == 0:
        return curve
    x = curve.x + curve.y.scale(framing)
    framed = SpectralCurve(x, curve.y, f"{curve.label}[f={framing}]")
    validate_curve(framed)
    return framed


def swap_curve(curve: SpectralCurve) -> SpectralCurve:
    """The x-y dual curve, (x, y) -> (y, x)."""
    label = curve.label[:-4] if curve.label.endswith("^vee") else f"{curve.label}^vee"
    return SpectralCurve(curve.y, curve.x, label)


# ---------------------------------------------------------------------------
# Local data
# ---------------------------------------------------------------------------

def differential(f: CurveFunction) -> RationalFunction:
    """df/dz as an exact rational function."""
    return f.derivative()


def ramification_points(curve: SpectralCurve, of: str = "x") -> List[RamificationPoint]:
    """
    Simple zeros of dx (or dy) at which the other function is regular.

    Raises:
        IrrationalPoleError: A zero of the differential is irrational.
        NonSimpleRamificationError: A zero has order >= 2.
        PathUnavailableError: The differential vanishes at infinity.
    """
    if of not in ("x", "y"):
        raise ValueError(f"ramification_points(of=...) expects 'x' or 'y', got {of!r}")
    f, other = (curve.x, curve.y) if of == "x" else (curve.y, curve.x)
    df = f.derivative()
    if df.order_at(INFINITY) - 2 >= 1 and not other.singular_at(INFINITY):
        raise PathUnavailableError(f"d{of} vanishes at infinity; move the point to a finite location")
    points: List[RamificationPoint] = []
    for root, multiplicity in rational_roots(df.numerator, f"finding zeros of d{of}"):
        if multiplicity >= 2:
            raise NonSimpleRamificationError(root, multiplicity)
        if other.singular_at(root):
            logger.debug("zero of d%s at %s skipped: %s is singular there", of, root, "y" if of == "x" else "x")
            continue
        points.append(RamificationPoint(root))
    return points


def _binomial_half_series(order: int) -> LaurentExpansion:
    coeffs = [Fraction(1)]
    for k in range(1, order + 1):
        coeffs.append(coeffs[-1] * (Fraction(1, 2) - (k - 1)) / k)
    return LaurentExpansion.build(Fraction(0), 0, coeffs, order)


def deck_transformation(curve: SpectralCurve, p: Fraction, order: int) -> DeckSeries:
    """
    Deck involution at a simple ramification point, known up to t^order.

    Writes x(p+t) - x(p) = c2 * w(t)^2 with w = t*sqrt(1 + ...) rational, then
    solves w(sigma) = -w(t) by Newton iteration starting from sigma = -t.

    Raises:
        NonSimpleRamificationError: dx does not vanish to order exactly one.
        SeriesDomainError: Newton iteration did not reach the requested order.
    """
    p = to_fraction(p)
    if order < 2:
        raise ValueError("deck transformation needs order >= 2")
    X = expand_at(curve.dx(), p, order).integral()
    if X.valuation != 2:
        raise NonSimpleRamificationError(p, X.valuation - 1)
    c2 = X.coefficient(2)
    u = X.scale(1 / c2).shift(-2) - 1
    w = _binomial_half_series(order).compose(u).shift(1).truncate(order)
    w_prime = w.derivative()

    sigma = LaurentExpansion.build(p, 1, [Fraction(-1)], order)
    target = -w
    for step in range(int(math.log2(order)) + 4):
        defect = (w.compose(sigma) - target).truncate(order)
        if defect.is_zero():
            break
        correction = defect * w_prime.compose(sigma).inverse(order)
        sigma = (sigma - correction).truncate(order)
        logger.debug("deck at %s: Newton step %d", p, step)
    residual = (X.compose(sigma) - X).truncate(order + 1)
    if not residual.is_zero():
        raise SeriesDomainError(f"deck transformation at {p} did not converge to order {order}")
    return DeckSeries(p, sigma)


def primitive_phi(curve: SpectralCurve, side: str = "primal") -> CurveFunction:
    """
    Primitive of y dx (primal) or x dy (dual) with zero constant term.

    Raises:
        CurveValidationError: The integrand is not rational (y, resp. x, carries logs).
        IrrationalPoleError: The integrand has an irrational pole.
    """
    if side == "primal":
        if not curve.y.is_rational():
            raise CurveValidationError("primal primitive needs a rational y")
        integrand = curve.y.rational_part * curve.dx()
    elif side == "dual":
        if not curve.x.is_rational():
            raise CurveValidationError("dual primitive needs a rational x")
        integrand = curve.x.rational_part * curve.dy()
    else:
        raise ValueError(f"unknown side {side!r}")
    return integrate_rational(integrand)


def integrate_rational(f: RationalFunction) -> CurveFunction:
    """Term-by-term primitive: polynomial part, poles of order >= 2, and log atoms."""
    decomposition = partial_fractions(f)
    poly = polynomial_coefficients(decomposition.polynomial_part)
    rational = RationalFunction.from_coefficients([0] + [c / (k + 1) for k, c in enumerate(poly)])
    atoms = []
    for pole, order, coefficient in decomposition.terms:
        if order == 1:
            atoms.append((pole, coefficient))
        else:
            rational = rational + RationalFunction.pole(pole, order - 1, -coefficient / (order - 1))
    return CurveFunction.from_parts(rational, atoms)


def _residue_of_product(f: CurveFunction, dg: RationalFunction, point: Point) -> LogLinear:
    """Res_point f * dg dz for f regular-log at point (no log singularity there)."""
    if point is INFINITY:
        f_order = min(-f.rational_part.degree_at_infinity(), 0)
        local_f = f.local_expansion(INFINITY, max(2 - dg.order_at(INFINITY), 0))
        local_g = expand_at(dg, INFINITY, max(2 - f_order, dg.order_at(INFINITY)))
        # dz = -dt / t^2
        rational = -(local_f * local_g).coefficient(1)
        return LogLinear(rational) + f.log_constant_at(INFINITY).scale(residue_at(dg, INFINITY))
    g_order = dg.order_at(point)
    f_order = min(f.rational_part.order_at(point), 0)
    local_f = f.local_expansion(point, max(-1 - g_order, 0))
    local_g = expand_at(dg, point, max(-1 - f_order, g_order))
    rational = (local_f * local_g).coefficient(-1)
    return LogLinear(rational) + f.log_constant_at(point).scale(residue_at(dg, point))


def classify_residue_points(curve: SpectralCurve) -> ResiduePointSet:
    """
    Sort the distinguished points of a curve into the classes used by the free-energy formulas.

    ramification points of x and y (None when irrational or at infinity), log-vital
    points of y and of x, and the non-log singular points of y (resp. x) where
    y dx (resp. x dy) has a nonzero residue.

    Raises:
        CurveValidationError: A log-vital point sits at infinity.
    """
    ram: Dict[str, Optional[List[Fraction]]] = {}
    for of in ("x", "y"):
        try:
            ram[of] = [r.location for r in ramification_points(curve, of)]
        except (IrrationalPoleError, PathUnavailableError) as e:
            logger.info("ramification points of %s not rational: %s", of, e)
            ram[of] = None

    dx, dy = curve.dx(), curve.dy()
    log_y = [a for a in curve.y.atoms() if dx.order_at(a.branch_point) >= 0]
    log_x = [a for a in curve.x.atoms() if dy.order_at(a.branch_point) >= 0]
    if curve.y.log_coefficient_at_infinity() != 0 and dx.order_at(INFINITY) - 2 >= 0:
        raise CurveValidationError("log-vital point of y at infinity is not supported")
    if curve.x.log_coefficient_at_infinity() != 0 and dy.order_at(INFINITY) - 2 >= 0:
        raise CurveValidationError("log-vital point of x at infinity is not supported")

    primal, primal_res = _non_log_poles(curve.y, dx)
    dual, dual_res = _non_log_poles(curve.x, dy)
    return ResiduePointSet(
        ram_x=ram["x"],
        ram_y=ram["y"],
        log_y=log_y,
        log_x=log_x,
        poles_primal=primal,
        poles_dual=dual,
        primal_residues=primal_res,
        dual_residues=dual_res,
    )


def _non_log_poles(f: CurveFunction, dg: RationalFunction) -> Tuple[List[Point], Dict[str, LogLinear]]:
    candidates: List[Point] = [pole for pole, _ in f.rational_part.poles() if pole not in f.log_points()]
    if f.rational_part.degree_at_infinity() > 0 and f.log_coefficient_at_infinity() == 0:
        candidates.append(INFINITY)
    found: List[Point] = []
    residues: Dict[str, LogLinear] = {}
    for b in sorted(candidates, key=point_sort_key):
        value = _residue_of_product(f, dg, b)
        residues[format_point(b)] = value
        if not value.is_zero():
            found.append(b)
    return found, residues


def total_residue(f: RationalFunction) -> Fraction:
    """Sum of residues of f dz over all finite poles and infinity."""
    total = residue_at(f, INFINITY)
    for pole, _ in f.poles():
        total += residue_at(f, pole)
    return total
