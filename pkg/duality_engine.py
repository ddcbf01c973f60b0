"""
Free energies and omega_{g,1} from the x-y duality formulas.

Only curves whose y is unramified are handled: y = a*z + c or y = log z. Then
the dual side is trivial and

    (2-2g) F_g = sum_{points} Res dy sum_{m>=2} (d/dx)^{m-1} y * c_{g,m}(z),

with c_{g,m} = [hbar^{2g} u^{m+1}] exp(E) (divided by S(u hbar) when y = log z),

    E = (S(u hbar D) - 1) x u + u S(u hbar D) sum_i (1/S(alpha_i hbar D) - 1) log(z - a_i) / alpha_i,

D = d/dy, and the a_i the log-vital points of x.

Requires:
    pip install sympy
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional

from errors import UnsupportedDualError
from exact_algebra import (
    INFINITY,
    Point,
    RationalFunction,
    SeriesUH,
    format_point,
    point_sort_key,
    residue_at,
    s_function_series,
)
from spectral_curve import LogAtom, SpectralCurve, classify_residue_points
from tr_engine import FreeEnergyValue, MultiDifferential

logger = logging.getLogger(__name__)

UHBAR = "uHbar"
UHBAR_S = "uHbarS"


@dataclass(frozen=True)
class DualExponent:
    series: SeriesUH
    regime: str
    denominator_kind: str
    g_max: int


@dataclass(frozen=True)
class DualityCoefficients:
    g: int
    per_m: Dict[int, RationalFunction]


@dataclass(frozen=True)
class InvariantizedFreeEnergy:
    value: Fraction
    alternative: Optional[Fraction]
    classification_note: str
    contributions: Dict[str, Fraction] = field(default_factory=dict)


def _y_scale(curve: SpectralCurve) -> Optional[Fraction]:
    """a for y = a*z + c, None for y = log z.

    Raises:
        UnsupportedDualError: For any other y.
    """
    y = curve.y
    if y.is_log_z():
        return None
    f = y.rational_part
    if y.log_atoms or not f.is_polynomial() or f.numerator.degree() != 1:
        raise UnsupportedDualError("duality path needs y = a*z + c or y = log z")
    return f.derivative().evaluate(0)


def _d_dy(curve: SpectralCurve):
    """The derivation d/dy acting on rational functions of z."""
    scale = _y_scale(curve)
    z = RationalFunction.identity()
    if scale is None:
        return lambda f: z * f.derivative()
    return lambda f: f.derivative() / scale


def log_vital_points_of_x(curve: SpectralCurve) -> List[LogAtom]:
    dy = curve.dy()
    return [a for a in curve.x.atoms() if dy.order_at(a.branch_point) >= 0]


def build_exponent(curve: SpectralCurve, g_max: int) -> DualExponent:
    """
    Exponent E of the duality formula as a (u, hbar) series, exponentiated.

    Raises:
        UnsupportedDualError: y is not of the form a*z + c or log z.
    """
    d = _d_dy(curve)
    max_u, max_hbar = 3 * g_max + 1, 2 * g_max
    s = s_function_series("S", max_hbar)
    r = s_function_series("inverseS", max_hbar)

    terms: Dict[tuple, RationalFunction] = {}

    def add(key, value: RationalFunction) -> None:
        if key[0] > max_u or key[1] > max_hbar or value.is_zero():
            return
        terms[key] = terms[key] + value if key in terms else value

    # derivatives D^k x, all rational for k >= 1
    derivatives_x = {1: _first_derivative(curve, curve.dx())}
    for k in range(2, max_hbar + 1):
        derivatives_x[k] = d(derivatives_x[k - 1])
    for k in range(1, g_max + 1):
        add((2 * k + 1, 2 * k), derivatives_x[2 * k] * s.coefficient(2 * k))

    for atom in log_vital_points_of_x(curve):
        alpha = atom.alpha
        log_derivs = {1: _first_derivative(curve, RationalFunction.pole(atom.branch_point, 1))}
        for k in range(2, max_hbar + 1):
            log_derivs[k] = d(log_derivs[k - 1])
        for j in range(0, g_max + 1):
            for l in range(1, g_max + 1 - j):
                weight = s.coefficient(2 * j) * r.coefficient(2 * l) * alpha ** (2 * l - 1)
                add((1 + 2 * j, 2 * j + 2 * l), log_derivs[2 * j + 2 * l] * weight)

    regime = ("y_log" if curve.y.is_log_z() else "y_plain") + ("_x_log" if curve.x.atoms() else "_x_plain")
    exponent = SeriesUH.from_terms(max_u, max_hbar, terms)
    logger.debug("exponent for %s: %d monomials (%s)", curve.label, len(exponent.coeff), regime)
    return DualExponent(
        series=exponent.exp(),
        regime=regime,
        denominator_kind=UHBAR_S if curve.y.is_log_z() else UHBAR,
        g_max=g_max,
    )


def _first_derivative(curve: SpectralCurve, dz_derivative: RationalFunction) -> RationalFunction:
    """D f from df/dz: multiply by dz/dy."""
    scale = _y_scale(curve)
    if scale is None:
        return RationalFunction.identity() * dz_derivative
    return dz_derivative / scale


def _s_reciprocal_uh(max_u: int, max_hbar: int) -> SeriesUH:
    r = s_function_series("inverseS", max_hbar)
    terms = {(k, k): RationalFunction.constant(r.coefficient(k)) for k in range(0, min(max_u, max_hbar) + 1)}
    return SeriesUH.from_terms(max_u, max_hbar, terms)


def duality_coefficients(exponent: DualExponent, g: int) -> DualityCoefficients:
    """
    c_{g,m} = [hbar^{2g} u^{m+1}] exp(E) / S(u hbar)^[y = log z] for 0 <= m <= 3g.

    The free-energy sum reads only m >= 2. The entries m = 0 and m = 1 are kept
    for omega_g1_duality, whose sum starts at m = 0.

    Raises:
        SeriesDomainError: g exceeds the bound used to build the exponent.
        ArithmeticError: A coefficient beyond m = 3g is nonzero.
    """
    series = exponent.series
    if exponent.denominator_kind == UHBAR_S:
        series = series * _s_reciprocal_uh(series.max_u, series.max_hbar)
    per_m = {m: series.extract(m + 1, 2 * g) for m in range(0, 3 * g + 1)}
    for m in range(3 * g + 1, series.max_u):
        if not series.extract(m + 1, 2 * g).is_zero():
            raise ArithmeticError(f"coefficient c_({g},{m}) beyond 3g is nonzero")
    return DualityCoefficients(g, per_m)


def dy_dx_iterate(curve: SpectralCurve, m: int) -> RationalFunction:
    """((1/x') d/dz)^(m-1) y as a rational function, m >= 2."""
    if m < 2:
        raise ValueError("dy_dx_iterate needs m >= 2")
    x_prime = curve.dx()
    result = curve.dy() / x_prime
    for _ in range(m - 2):
        result = result.derivative() / x_prime
    return result


def residue_points(curve: SpectralCurve) -> List[Point]:
    """Log-vital points of x, primal and dual non-log poles, 0 for y = log z, and infinity."""
    classes = classify_residue_points(curve)
    points = set(a.branch_point for a in classes.log_x)
    points.update(classes.poles_primal)
    points.update(classes.poles_dual)
    if curve.y.is_log_z():
        points.add(Fraction(0))
    points.add(INFINITY)
    return sorted(points, key=point_sort_key)


def _integrand(curve: SpectralCurve, g: int, exponent: Optional[DualExponent] = None) -> RationalFunction:
    _y_scale(curve)
    exponent = exponent or build_exponent(curve, g)
    coefficients = duality_coefficients(exponent, g)
    total = RationalFunction.constant(0)
    for m in range(2, 3 * g + 1):
        c = coefficients.per_m[m]
        if not c.is_zero():
            total = total + dy_dx_iterate(curve, m) * c
    return curve.dy() * total


def duality_residues(curve: SpectralCurve, g: int, extra_points: Optional[List[Point]] = None) -> Dict[str, Fraction]:
    """Per-point residues of the duality integrand, before the 1/(2-2g) prefactor."""
    integrand = _integrand(curve, g)
    points = residue_points(curve)
    for p in extra_points or []:
        if p not in points:
            points.append(p)
    return {format_point(p): residue_at(integrand, p) for p in points}


def free_energy_duality(curve: SpectralCurve, g: int, extra_points: Optional[List[Point]] = None) -> FreeEnergyValue:
    """
    F_g from the duality residue formula.

    Args:
        curve (SpectralCurve): Curve with unramified y (a*z + c or log z).
        g (int): Genus, >= 2.
        extra_points (list, optional): Additional points to include in the residue sum.

    Raises:
        ValueError: For g < 2.
        UnsupportedDualError: y is ramified or of an unsupported kind.
    """
    if g < 2:
        raise ValueError("free energies are defined here for g >= 2")
    residues = duality_residues(curve, g, extra_points)
    value = sum(residues.values(), Fraction(0)) / (2 - 2 * g)
    logger.info("F_%d via duality on %s: %s", g, curve.label, value)
    return FreeEnergyValue(g, value, "duality")


def omega_g1_duality(curve: SpectralCurve, g: int) -> MultiDifferential:
    """
    omega_{g,1} = sum_{m>=0} (-d 1/dx)^m (-y' c_{g,m}) dz for unramified y.

    Raises:
        UnsupportedDualError: y is ramified or of an unsupported kind.
    """
    if g < 1:
        raise ValueError("omega_g1_duality needs g >= 1")
    coefficients = duality_coefficients(build_exponent(curve, g), g)
    x_prime, y_prime = curve.dx(), curve.dy()
    total = RationalFunction.constant(0)
    for m in range(0, 3 * g + 1):
        f = -y_prime * coefficients.per_m[m]
        if f.is_zero():
            continue
        for _ in range(m):
            f = -(f / x_prime).derivative()
        total = total + f
    return MultiDifferential.from_rational_function(g, total)


def dual_omega_log(curve: SpectralCurve, g: int) -> MultiDifferential:
    """
    omega^vee_{g,1} of the swapped curve when y = z:
    [hbar^{2g}] dz sum_i 1/(alpha_i S(alpha_i hbar d/dz)) log(z - a_i) over log-vital points of x.
    """
    if _y_scale(curve) != 1:
        raise UnsupportedDualError("closed dual omega needs y = z + c")
    c = s_function_series("inverseS", 2 * g).coefficient(2 * g)
    total = RationalFunction.constant(0)
    for atom in log_vital_points_of_x(curve):
        f = RationalFunction.pole(atom.branch_point, 1)
        for _ in range(2 * g - 1):
            f = f.derivative()
        total = total + f * (c * atom.alpha ** (2 * g - 1))
    return MultiDifferential.from_rational_function(g, total)


def invariantized_free_energy(curve: SpectralCurve, g: int) -> InvariantizedFreeEnergy:
    """
    F_g minus the residue contributions at primal points (log-vital points of y and
    poles of y with Res y dx != 0). A point that is primal and dual at once is
    counted as primal for `value` and as dual for `alternative`.
    """
    residues = duality_residues(curve, g)
    classes = classify_residue_points(curve)
    primal = {format_point(a.branch_point) for a in classes.log_y}
    primal.update(format_point(b) for b in classes.poles_primal)
    ambiguous = {format_point(b) for b in classes.ambiguous()}
    factor = Fraction(1, 2 - 2 * g)
    total = sum(residues.values(), Fraction(0))
    as_primal = total - sum((residues.get(p, Fraction(0)) for p in primal), Fraction(0))
    as_dual = total - sum((residues.get(p, Fraction(0)) for p in primal - ambiguous), Fraction(0))
    if ambiguous:
        note = f"points {sorted(ambiguous)} carry primal and dual residues; value counts them as primal"
        alternative = as_dual * factor
    else:
        note = "no ambiguous points"
        alternative = None
    return InvariantizedFreeEnergy(as_primal * factor, alternative, note,
                                   {p: r * factor for p, r in residues.items()})
