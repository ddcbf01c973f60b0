"""
Named spectral curves with their closed-form free energies.

Every family builds a validated SpectralCurve from a small parameter map. Families
with a known closed form also evaluate F_g exactly, so each free-energy path can be
checked against it. Parameters come in as Fractions, ints, "p/q" strings or
comma-separated lists ("-1,1"), which is what the CLI's --param flags produce.

Requires:
    pip install sympy pydantic
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from errors import CurveValidationError, IrrationalPoleError, PathUnavailableError, UnknownCurveError
from exact_algebra import RationalFunction, bernoulli, polynomial_coefficients, to_fraction
from spectral_curve import CurveFunction, SpectralCurve, make_curve

logger = logging.getLogger(__name__)

PREFACTOR_POLE = "B_{2g}/(2g(2g-2))"
PREFACTOR_LOG = "B_{2g}/(2g(2-2g))"


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: str  # "rational", "int" or "list"
    default: object = None
    aliases: Tuple[str, ...] = ()
    description: str = ""

    def describe(self) -> str:
        text = self.kind if self.default is None else f"{self.kind} (default {_format_default(self.default)})"
        return f"{text}: {self.description}" if self.description else text


@dataclass(frozen=True)
class _Family:
    name: str
    description: str
    params: Tuple[ParamSpec, ...]
    build: Callable[[dict], SpectralCurve]
    closed_form: Optional[Callable[[dict, int], Fraction]] = None
    printed_prefactor: Optional[str] = None
    computed_prefactor: Optional[str] = None


@dataclass(frozen=True)
class CatalogEntry:
    """A built catalog curve together with its resolved parameters."""
    name: str
    parameters: Dict[str, object]
    curve: SpectralCurve
    closed_form_fn: Optional[Callable[[dict, int], Fraction]] = None
    metadata: Dict[str, str] = field(default_factory=dict)

    @property
    def has_closed_form(self) -> bool:
        return self.closed_form_fn is not None

    def closed_form(self, g: int) -> Optional[Fraction]:
        if self.closed_form_fn is None:
            return None
        if g < 2:
            raise ValueError("closed forms are given for g >= 2")
        return self.closed_form_fn(self.parameters, g)


# ---------------------------------------------------------------------------
# Parameter handling
# ---------------------------------------------------------------------------

def _format_default(value) -> str:
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    return str(value)


def _as_list(name: str, value) -> List[Fraction]:
    if isinstance(value, str):
        items = [item for item in value.replace(";", ",").split(",") if item.strip()]
    elif isinstance(value, (list, tuple)):
        items = list(value)
    else:
        items = [value]
    try:
        return [to_fraction(item) for item in items]
    except (TypeError, ValueError) as e:
        raise CurveValidationError(f"parameter {name}: {e}") from e


def _as_rational(name: str, value) -> Fraction:
    values = _as_list(name, value)
    if len(values) != 1:
        raise CurveValidationError(f"parameter {name} expects a single rational, got {len(values)} values")
    return values[0]


def _as_int(name: str, value) -> int:
    number = _as_rational(name, value)
    if number.denominator != 1:
        raise CurveValidationError(f"parameter {name} expects an integer, got {number}")
    return int(number)


_COERCE = {"list": _as_list, "rational": _as_rational, "int": _as_int}


def _resolve_params(family: _Family, params: Optional[dict]) -> Dict[str, object]:
    params = dict(params or {})
    lookup = {}
    for spec in family.params:
        lookup[spec.name] = spec
        for alias in spec.aliases:
            lookup[alias] = spec
    resolved: Dict[str, object] = {}
    for key, value in params.items():
        spec = lookup.get(key)
        if spec is None:
            known = ", ".join(s.name for s in family.params) or "none"
            raise UnknownCurveError(f"family {family.name!r} has no parameter {key!r} (known: {known})")
        if spec.name in resolved:
            raise CurveValidationError(f"parameter {spec.name} given twice")
        resolved[spec.name] = _COERCE[spec.kind](key, value)
    for spec in family.params:
        if spec.name not in resolved and spec.default is not None:
            resolved[spec.name] = _COERCE[spec.kind](spec.name, spec.default)
    return resolved


def _require_distinct(name: str, points: List[Fraction]) -> None:
    if len(set(points)) != len(points):
        raise CurveValidationError(f"parameter {name} has coinciding points: {[str(p) for p in points]}")


def _require_nonzero(name: str, values: List[Fraction]) -> None:
    if any(v == 0 for v in values):
        raise CurveValidationError(f"parameter {name} must be nonzero")


def _prefactor_log(g: int) -> Fraction:
    # log-type families: F_2 = +1/240 per pair at unit distance
    return bernoulli(2 * g) / (2 * g * (2 - 2 * g))


def _prefactor_pole(g: int) -> Fraction:
    # pole-type families, opposite sign: Harer-Zagier F_2 = -1/240
    return bernoulli(2 * g) / (2 * g * (2 * g - 2))


def _z() -> RationalFunction:
    return RationalFunction.identity()


# ---------------------------------------------------------------------------
# (x~, y~) -> (x, y)
# ---------------------------------------------------------------------------

def tilde_transform(x_tilde: RationalFunction, y_tilde: RationalFunction, label: str = "tilde") -> SpectralCurve:
    """
    Rewrite a curve given as (x~, y~) with x~ = e^x, y~ = y/e^x.

    x = log x~ is split into log atoms at the zeros and poles of x~ plus the log of its
    leading coefficient, and y = x~ y~ must be rational. ydx = y~dx~ and the ramification
    points of x and x~ coincide.

    Args:
        x_tilde (RationalFunction): Nonconstant x~ with rational zeros and poles.
        y_tilde (RationalFunction): y~.
        label (str): Label of the resulting curve.

    Returns:
        SpectralCurve: Validated curve in (x, y) form.

    Raises:
        IrrationalPoleError: x~ has an irrational zero or pole.
        CurveValidationError: x~ is constant.
    """
    if x_tilde.is_constant():
        raise CurveValidationError("x~ must be nonconstant")
    try:
        zeros = x_tilde.zeros()
        poles = x_tilde.poles()
    except IrrationalPoleError as e:
        raise IrrationalPoleError(e.factor, "factoring x~ into log atoms") from e
    atoms = [(a, m) for a, m in zeros] + [(b, -m) for b, m in poles]
    lead = polynomial_coefficients(x_tilde.numerator)[-1] / polynomial_coefficients(x_tilde.denominator)[-1]
    x = CurveFunction.from_parts(RationalFunction.constant(0), atoms, [(lead, 1)])
    y = CurveFunction.rational(x_tilde * y_tilde)
    logger.debug("tilde transform %s: %d atoms, leading coefficient %s", label, len(atoms), lead)
    return make_curve(x, y, label)


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def _build_trivial(p: dict) -> SpectralCurve:
    return make_curve(CurveFunction.rational(_z()), CurveFunction.rational(_z()), "trivial")


def _build_airy(p: dict) -> SpectralCurve:
    x = RationalFunction.from_coefficients([0, 0, Fraction(1, 2)])
    return make_curve(CurveFunction.rational(x), CurveFunction.rational(_z()), "airy")


def _build_harer_zagier(p: dict) -> SpectralCurve:
    x = _z() + RationalFunction.pole(0)
    return make_curve(CurveFunction.rational(x), CurveFunction.rational(_z()), "harer-zagier")


def _pole_locations(p: dict) -> List[Fraction]:
    c = p["c"]
    b = p.get("b") or [Fraction(3 * i) for i in range(len(c))]
    if len(b) != len(c):
        raise CurveValidationError(f"rational-poles needs as many locations b ({len(b)}) as residues c ({len(c)})")
    return b


def _build_rational_poles(p: dict) -> SpectralCurve:
    c = p["c"]
    _require_nonzero("c", c)
    b = _pole_locations(p)
    _require_distinct("b", b)
    x = _z()
    for residue, location in zip(c, b):
        x = x + RationalFunction.pole(location, 1, residue)
    return make_curve(CurveFunction.rational(x), CurveFunction.rational(_z()), "rational-poles")


def _build_r_spin(p: dict) -> SpectralCurve:
    r, eps = p["r"], p["eps"]
    if r < 2:
        raise CurveValidationError("r-spin needs r >= 2")
    coeffs = [Fraction(0)] * (r + 1)
    coeffs[r] = Fraction(1, r)
    coeffs[1] -= eps
    x = RationalFunction.from_coefficients(coeffs)
    return make_curve(CurveFunction.rational(x), CurveFunction.rational(_z()), f"r-spin[r={r}]")


def _build_neg_r_spin(p: dict) -> SpectralCurve:
    r, eps = p["r"], p["eps"]
    if r < 1:
        raise CurveValidationError("negative r-spin needs r >= 1")
    if eps == 0:
        raise CurveValidationError("negative r-spin needs eps != 0")
    x = RationalFunction.pole(0, r, Fraction(1, r)) - RationalFunction.pole(0, 1, eps)
    return make_curve(CurveFunction.rational(x), CurveFunction.rational(_z()), f"neg-r-spin[r={r}]")


def _log_signs(p: dict) -> List[Fraction]:
    a = p["a"]
    eps = p.get("eps") or [Fraction(1)] * len(a)
    if len(eps) != len(a):
        raise CurveValidationError(f"log-points needs one sign per point ({len(eps)} signs, {len(a)} points)")
    if any(e not in (1, -1) for e in eps):
        raise CurveValidationError("log-points signs must be +1 or -1")
    return eps


def _build_log_points(p: dict) -> SpectralCurve:
    a = p["a"]
    _require_distinct("a", a)
    eps = _log_signs(p)
    if sum(eps) == 0:
        raise CurveValidationError("log-points needs sum of signs != 0")
    x = CurveFunction.from_parts(RationalFunction.constant(0), list(zip(a, eps)))
    return make_curve(x, CurveFunction.rational(_z()), "log-points")


def _gaiotto_tilde(p: dict) -> Tuple[RationalFunction, RationalFunction]:
    """x~ = -L^r / prod(Q_a - z), y~ = -z prod(Q_a - z) / L^r."""
    q, lam = p["Q"], p["L"]
    r = len(q)
    product = RationalFunction.constant(1)
    for qa in q:
        product = product * (RationalFunction.constant(qa) - _z())
    x_tilde = RationalFunction.constant(-(lam ** r)) / product
    y_tilde = -_z() * product / lam ** r
    return x_tilde, y_tilde


def _build_gaiotto(p: dict) -> SpectralCurve:
    q, lam = p["Q"], p["L"]
    if not q:
        raise CurveValidationError("gaiotto needs at least one Q")
    _require_distinct("Q", q)
    _require_nonzero("L", [lam])
    if p.get("r") is not None and p["r"] != len(q):
        raise CurveValidationError(f"gaiotto r={p['r']} does not match {len(q)} values of Q")
    return tilde_transform(*_gaiotto_tilde(p), label="gaiotto")


def _build_cdo(p: dict) -> SpectralCurve:
    P, q, lam = p["P"], p["Q"], p["L"]
    if len(P) != len(q) + 1:
        raise CurveValidationError(f"cdo needs r values of P and r-1 of Q, got {len(P)} and {len(q)}")
    _require_distinct("P and -Q", [-v for v in P] + q)
    _require_nonzero("L", [lam])
    r = len(P)
    numerator = RationalFunction.constant(-(lam ** r))
    for pa in P:
        numerator = numerator * (_z() + pa)
    denominator = RationalFunction.constant(1)
    for qa in q:
        denominator = denominator * (RationalFunction.constant(qa) - _z())
    x_tilde = numerator / denominator
    return tilde_transform(x_tilde, _z() / x_tilde, label="cdo")


def _build_log_tr_demo(p: dict) -> SpectralCurve:
    x = RationalFunction.from_coefficients([0, -1, Fraction(1, 2)])
    return make_curve(CurveFunction.rational(x), CurveFunction.log_z(), "log-tr-demo")


def _build_tilde(p: dict) -> SpectralCurve:
    x_tilde = RationalFunction.from_coefficients(p["xt_num"], p["xt_den"])
    y_tilde = RationalFunction.from_coefficients(p["yt_num"], p["yt_den"])
    return tilde_transform(x_tilde, y_tilde, label="tilde")


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def _zero(p: dict, g: int) -> Fraction:
    return Fraction(0)


def _closed_harer_zagier(p: dict, g: int) -> Fraction:
    return _prefactor_pole(g)


def _closed_rational_poles(p: dict, g: int) -> Fraction:
    return _prefactor_pole(g) * sum((c ** (2 - 2 * g) for c in p["c"]), Fraction(0))


def _closed_neg_r_spin(p: dict, g: int) -> Fraction:
    return _prefactor_log(g) * p["eps"] ** (2 - 2 * g)


def log_family_free_energy(atoms: List[Tuple[Fraction, Fraction]], g: int) -> Fraction:
    """B_{2g}/(2g(2-2g)) * sum over unordered pairs i<j of e_i e_j (a_i - a_j)^(2-2g)."""
    total = Fraction(0)
    for i, (a_i, e_i) in enumerate(atoms):
        for a_j, e_j in atoms[i + 1:]:
            total += e_i * e_j * (a_i - a_j) ** (2 - 2 * g)
    return _prefactor_log(g) * total


def _closed_log_points(p: dict, g: int) -> Fraction:
    return log_family_free_energy(list(zip(p["a"], _log_signs(p))), g)


def _closed_gaiotto(p: dict, g: int) -> Fraction:
    q = p["Q"]
    total = Fraction(0)
    for i in range(len(q)):
        for j in range(i + 1, len(q)):
            total += (q[i] - q[j]) ** (2 - 2 * g)
    return _prefactor_log(g) * total


def _closed_cdo(p: dict, g: int) -> Fraction:
    P, q = p["P"], p["Q"]
    e = 2 - 2 * g
    same = sum(((P[i] - P[j]) ** e for i in range(len(P)) for j in range(i + 1, len(P))), Fraction(0))
    same += sum(((q[i] - q[j]) ** e for i in range(len(q)) for j in range(i + 1, len(q))), Fraction(0))
    cross = sum(((qa + pb) ** e for qa in q for pb in P), Fraction(0))
    return _prefactor_log(g) * (same - cross)


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

_FAMILIES: Dict[str, _Family] = {
    f.name: f for f in (
        _Family("trivial", "x = z, y = z", (), _build_trivial, _zero),
        _Family("airy", "x = z^2/2, y = z", (), _build_airy, _zero),
        _Family("harer-zagier", "x = z + 1/z, y = z", (), _build_harer_zagier, _closed_harer_zagier,
                PREFACTOR_LOG, PREFACTOR_POLE),
        _Family(
            "rational-poles", "x = z + sum_i c_i/(z - b_i), y = z",
            (ParamSpec("c", "list", [1, 4], description="pole residues"),
             ParamSpec("b", "list", description="pole locations, default 0, 3, 6, ...")),
            _build_rational_poles, _closed_rational_poles, PREFACTOR_LOG, PREFACTOR_POLE,
        ),
        _Family(
            "r-spin", "x = z^r/r - eps*z, y = z",
            (ParamSpec("r", "int", 3), ParamSpec("eps", "rational", 1, ("ε", "epsilon"))),
            _build_r_spin, _zero,
        ),
        _Family(
            "neg-r-spin", "x = z^-r/r - eps/z, y = z",
            (ParamSpec("r", "int", 2), ParamSpec("eps", "rational", 1, ("ε", "epsilon"))),
            _build_neg_r_spin, _closed_neg_r_spin, PREFACTOR_LOG, PREFACTOR_LOG,
        ),
        _Family(
            "log-points", "x = sum_i eps_i log(z - a_i), y = z",
            (ParamSpec("a", "list", [0, 1], description="distinct log points"),
             ParamSpec("eps", "list", aliases=("ε",), description="signs +-1, default all +1")),
            _build_log_points, _closed_log_points, PREFACTOR_LOG, PREFACTOR_LOG,
        ),
        _Family(
            "gaiotto", "x~ = -L^r/prod(Q_a - z), y~ = -z prod(Q_a - z)/L^r",
            (ParamSpec("Q", "list", [-1, 1]), ParamSpec("L", "rational", 1, ("Λ", "Lambda")),
             ParamSpec("r", "int", description="must equal the number of Q values")),
            _build_gaiotto, _closed_gaiotto, "-B_{2g}/(2g(2g-2))", PREFACTOR_LOG,
        ),
        _Family(
            "cdo", "x~ = -L^r prod(P_a + z)/prod(Q_a - z), y~ = z/x~",
            (ParamSpec("P", "list", [1, 2]), ParamSpec("Q", "list", [5]),
             ParamSpec("L", "rational", 1, ("Λ", "Lambda"))),
            _build_cdo, _closed_cdo, PREFACTOR_LOG, PREFACTOR_LOG,
        ),
        _Family("log-tr-demo", "x = z^2/2 - z, y = log z", (), _build_log_tr_demo),
        _Family(
            "tilde", "arbitrary (x~, y~), ascending coefficient lists",
            (ParamSpec("xt_num", "list", [0, 1]), ParamSpec("xt_den", "list", [1]),
             ParamSpec("yt_num", "list", [1]), ParamSpec("yt_den", "list", [1])),
            _build_tilde,
        ),
    )
}


def catalog_names() -> List[str]:
    return sorted(_FAMILIES)


def catalog_get(name: str, params: Optional[dict] = None) -> CatalogEntry:
    """
    Build a named catalog curve.

    Args:
        name (str): Family name, see catalog_names().
        params (dict, optional): Parameter overrides; list values may be comma-separated strings.

    Returns:
        CatalogEntry: The built curve with resolved parameters and closed-form metadata.

    Raises:
        UnknownCurveError: Unknown family or parameter name.
        CurveValidationError: Invalid parameter values, e.g. coinciding points.
    """
    family = _FAMILIES.get(name)
    if family is None:
        raise UnknownCurveError(f"unknown curve {name!r}; known: {', '.join(catalog_names())}")
    resolved = _resolve_params(family, params)
    curve = family.build(resolved)
    metadata = {"description": family.description}
    if family.printed_prefactor:
        metadata["printed_prefactor"] = family.printed_prefactor
        metadata["computed_prefactor"] = family.computed_prefactor
    logger.debug("built catalog curve %s with %s", name, resolved)
    return CatalogEntry(name, resolved, curve, family.closed_form, metadata)


def closed_form_eval(name: str, params: Optional[dict], g: int) -> Fraction:
    """
    Exact closed-form F_g of a catalog family.

    Raises:
        UnknownCurveError: Unknown family.
        PathUnavailableError: The family has no closed form.
        ValueError: g < 2.
    """
    entry = catalog_get(name, params)
    if not entry.has_closed_form:
        raise PathUnavailableError(f"no closed form for {name!r}")
    return entry.closed_form(g)


def catalog_list() -> List[dict]:
    """Name, parameter schema and closed-form availability of each family."""
    return [
        {
            "name": family.name,
            "description": family.description,
            "parameters": {spec.name: spec.describe() for spec in family.params},
            "closed_form": family.closed_form is not None,
        }
        for family in (_FAMILIES[n] for n in catalog_names())
    ]
