"""
Topological recursion with logarithmic corrections on genus-zero curves.

Multidifferentials are stored in the pole basis: a term
((b1, k1), ..., (bn, kn)) -> c stands for c * prod_j dz_j / (z_j - b_j)^k_j.
Each recursion step expands the kernel and the bracket in t = q - p around
every ramification point p, using the deck involution as a truncated series,
and reads the result off as residue pairings. When a truncation turns out to
be too short the step is retried with a doubled order; results are exact and
therefore memoized per curve.

Requires:
    pip install sympy
"""
import itertools
import logging
import threading
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from config import EngineSettings, load_settings
from errors import (
    IrrationalPoleError,
    PathUnavailableError,
    ResidueFreenessError,
    TruncationExhaustedError,
)
from exact_algebra import (
    LaurentExpansion,
    RationalFunction,
    expand_at,
    partial_fractions,
    residue_at,
    s_function_series,
    to_fraction,
)
from spectral_curve import (
    DeckSeries,
    LogAtom,
    LogLinear,
    SpectralCurve,
    deck_transformation,
    ramification_points,
)

logger = logging.getLogger(__name__)

BasisKey = Tuple[Fraction, int]
TermKey = Tuple[BasisKey, ...]

# Doublings of the truncation order tried before giving up.
MAX_ESCALATIONS = 4


@dataclass(frozen=True)
class MultiDifferential:
    genus: int
    n_vars: int
    terms: Dict[TermKey, Fraction] = field(default_factory=dict)
    bergman: bool = False

    @classmethod
    def from_terms(cls, genus: int, n_vars: int, terms: Dict[TermKey, Fraction]) -> "MultiDifferential":
        kept = {key: Fraction(c) for key, c in terms.items() if c != 0}
        return cls(genus, n_vars, dict(sorted(kept.items())))

    @classmethod
    def bergman_kernel(cls) -> "MultiDifferential":
        return cls(0, 2, {}, bergman=True)

    @classmethod
    def from_rational_function(cls, genus: int, f: RationalFunction) -> "MultiDifferential":
        """
        One-variable differential f(z) dz in the pole basis.

        Raises:
            ValueError: If f has a polynomial part (a pole at infinity).
        """
        decomposition = partial_fractions(f)
        if not decomposition.polynomial_part.is_zero:
            raise ValueError("differential has a pole at infinity and no pole-basis form")
        return cls.from_terms(genus, 1, {((pole, order),): c for pole, order, c in decomposition.terms})

    def is_zero(self) -> bool:
        return not self.bergman and not self.terms

    def __add__(self, other: "MultiDifferential") -> "MultiDifferential":
        terms = dict(self.terms)
        for key, c in other.terms.items():
            terms[key] = terms.get(key, Fraction(0)) + c
        return MultiDifferential.from_terms(self.genus, self.n_vars, terms)

    def __sub__(self, other: "MultiDifferential") -> "MultiDifferential":
        return self + other.scale(-1)

    def scale(self, value) -> "MultiDifferential":
        value = to_fraction(value)
        return MultiDifferential.from_terms(self.genus, self.n_vars, {k: c * value for k, c in self.terms.items()})

    def points(self) -> List[Fraction]:
        return sorted({b for key in self.terms for b, _ in key})

    def max_order(self, point: Fraction) -> int:
        orders = [k for key in self.terms for b, k in key if b == point]
        return max(orders, default=0)

    def residues(self, variable: int = 0) -> Dict[Tuple[Fraction, TermKey], Fraction]:
        """Nonzero residues in one variable, keyed by (pole, remaining basis key)."""
        sums: Dict[Tuple[Fraction, TermKey], Fraction] = defaultdict(Fraction)
        for key, c in self.terms.items():
            b, k = key[variable]
            if k == 1:
                sums[(b, key[:variable] + key[variable + 1:])] += c
        return {k: v for k, v in sums.items() if v != 0}

    def is_symmetric(self) -> bool:
        for key, c in self.terms.items():
            for perm in itertools.permutations(range(self.n_vars)):
                if self.terms.get(tuple(key[i] for i in perm), Fraction(0)) != c:
                    return False
        return True

    def evaluate(self, *zs) -> Fraction:
        """Density at a point of (P^1)^n away from the poles."""
        zs = [to_fraction(z) for z in zs]
        if self.bergman:
            return 1 / (zs[0] - zs[1]) ** 2
        total = Fraction(0)
        for key, c in self.terms.items():
            term = c
            for z, (b, k) in zip(zs, key):
                term /= (z - b) ** k
            total += term
        return total

    def as_rational_function(self) -> RationalFunction:
        if self.n_vars != 1:
            raise ValueError("only one-variable differentials convert to a rational function")
        total = RationalFunction.constant(0)
        for ((b, k),), c in self.terms.items():
            total = total + RationalFunction.pole(b, k, c)
        return total

    def to_records(self) -> List[dict]:
        return [
            {"points": [str(b) for b, _ in key], "orders": [k for _, k in key], "coeff": str(c)}
            for key, c in self.terms.items()
        ]


@dataclass(frozen=True)
class FreeEnergyValue:
    genus: int
    value: Fraction
    path: str


@dataclass(frozen=True)
class Lemma31Result:
    genus: int
    lhs: LogLinear
    rhs: LogLinear

    @property
    def holds(self) -> bool:
        return self.lhs == self.rhs


class _LocalFrame:
    """Series data at one ramification point for one truncation order."""

    def __init__(self, curve: SpectralCurve, p: Fraction, order: int):
        self.p = p
        self.order = order
        self.deck: DeckSeries = deck_transformation(curve, p, order)
        self.sigma = self.deck.series
        self.sigma_prime = self.sigma.derivative()
        self.x_prime = expand_at(curve.dx(), p, order)
        self.y_local = curve.y.local_expansion(p, order)
        jump = self.y_local - self.deck.apply(self.y_local)
        self.kernel_factor = (jump * self.x_prime).scale(2).inverse(order)
        self._sigma_over_t_inv = self.sigma.shift(-1).inverse(order)
        self._t_minus_sigma_sq_inv: Optional[LaurentExpansion] = None
        self._phi: Dict[BasisKey, LaurentExpansion] = {}
        self._psi: Dict[BasisKey, LaurentExpansion] = {}
        self._kappa: Dict[int, LaurentExpansion] = {}
        self._sigma_pow: Dict[int, LaurentExpansion] = {0: LaurentExpansion.constant(1, p)}

    def t(self, k: int) -> LaurentExpansion:
        return LaurentExpansion.monomial(1, k, self.p)

    def sigma_power(self, k: int) -> LaurentExpansion:
        if k not in self._sigma_pow:
            self._sigma_pow[k] = self.sigma_power(k - 1) * self.sigma
        return self._sigma_pow[k]

    def phi(self, b: Fraction, k: int) -> LaurentExpansion:
        """dq/(q - b)^k at q = p + t."""
        key = (b, k)
        if key not in self._phi:
            if b == self.p:
                self._phi[key] = self.t(-k)
            else:
                self._phi[key] = expand_at(RationalFunction.pole(b, k), self.p, self.order)
        return self._phi[key]

    def psi(self, b: Fraction, k: int) -> LaurentExpansion:
        """dq/(q - b)^k at q = p + sigma(t), as a multiple of dt."""
        key = (b, k)
        if key not in self._psi:
            if b == self.p:
                self._psi[key] = self._sigma_over_t_inv.power(k).shift(-k) * self.sigma_prime
            else:
                self._psi[key] = self.deck.apply(self.phi(b, k)) * self.sigma_prime
        return self._psi[key]

    def kappa(self, k: int) -> LaurentExpansion:
        """Kernel coefficient of dz/(z - p)^(k+1), divided by dt."""
        if k not in self._kappa:
            self._kappa[k] = (self.t(k) - self.sigma_power(k)) * self.kernel_factor
        return self._kappa[k]

    def bergman_diagonal(self) -> LaurentExpansion:
        """B(q, sigma(q)) / dt^2."""
        if self._t_minus_sigma_sq_inv is None:
            self._t_minus_sigma_sq_inv = (self.t(1) - self.sigma).power(-2, self.order)
        return self._t_minus_sigma_sq_inv * self.sigma_prime

    def bergman_form(self, side: str, k_max: int) -> Dict[TermKey, LaurentExpansion]:
        """B(q, z) or B(sigma(q), z) expanded in t, keyed by the basis element in z."""
        form: Dict[TermKey, LaurentExpansion] = {}
        for k in range(0, max(k_max, 0) + 1):
            if side == "q":
                series = self.t(k).scale(k + 1)
            else:
                series = (self.sigma_power(k) * self.sigma_prime).scale(k + 1)
            form[((self.p, k + 2),)] = series
        return form


class TopologicalRecursion:
    """
    Memoized recursion for one curve.

    Use tr_omega() / get_engine() rather than constructing this directly so that
    engines are shared per curve fingerprint.
    """

    def __init__(self, curve: SpectralCurve, settings: Optional[EngineSettings] = None, order: Optional[int] = None):
        self.curve = curve
        self.settings = settings or load_settings()
        self.order = order or self.settings.truncation_for(1)
        self._lock = threading.Lock()
        self._omegas: Dict[Tuple[int, int], MultiDifferential] = {}
        self._frames: Dict[Tuple[Fraction, int], _LocalFrame] = {}
        self._forms: Dict[Tuple[int, int, Fraction, int, str], Dict[TermKey, LaurentExpansion]] = {}
        self._ram: Optional[List[Fraction]] = None

    @property
    def ramification(self) -> List[Fraction]:
        """
        Raises:
            PathUnavailableError: Ramification points are irrational or at infinity.
        """
        if self._ram is None:
            try:
                self._ram = [r.location for r in ramification_points(self.curve, "x")]
            except IrrationalPoleError as e:
                raise PathUnavailableError(f"TR path needs rational ramification points: {e}") from e
        return self._ram

    @property
    def log_vital_points(self) -> List[LogAtom]:
        dx = self.curve.dx()
        return [a for a in self.curve.y.atoms() if dx.order_at(a.branch_point) >= 0]

    def frame(self, p: Fraction) -> _LocalFrame:
        key = (p, self.order)
        if key not in self._frames:
            logger.debug("building local frame at %s to order %d", p, self.order)
            self._frames[key] = _LocalFrame(self.curve, p, self.order)
        return self._frames[key]

    def ensure_order(self, order: int) -> None:
        with self._lock:
            self.order = max(self.order, order)

    def omega(self, g: int, n: int) -> MultiDifferential:
        """
        omega_{g,n} of Log-TR.

        Raises:
            ValueError: For (g, n) outside 2g+n-2 > 0 (except the Bergman kernel) or
                beyond the configured complexity guard.
            PathUnavailableError: Irrational ramification.
            TruncationExhaustedError: Even the escalated truncation order was too short.
        """
        if (g, n) == (0, 2):
            return MultiDifferential.bergman_kernel()
        if g < 0 or n < 1 or 2 * g + n - 2 <= 0:
            raise ValueError(f"omega_({g},{n}) is not produced by the recursion")
        if n > self.settings.max_n or 2 * g + n - 2 > self.settings.max_weight:
            raise ValueError(
                f"omega_({g},{n}) exceeds the complexity guard (n <= {self.settings.max_n}, "
                f"2g+n-2 <= {self.settings.max_weight})")
        cached = self._omegas.get((g, n))
        if cached is not None:
            return cached

        start = self.order
        for attempt in range(MAX_ESCALATIONS + 1):
            try:
                result = self._recurse(g, n)
                break
            except TruncationExhaustedError as e:
                if attempt == MAX_ESCALATIONS:
                    raise TruncationExhaustedError(e.requested, e.known, f"order {start} doubled {attempt} times") from e
                logger.info("omega_(%d,%d): truncation %d too short, retrying with %d", g, n, self.order, 2 * self.order)
                self.ensure_order(2 * self.order)

        with self._lock:
            self._omegas.setdefault((g, n), result)
        logger.debug("omega_(%d,%d): %d terms", g, n, len(result.terms))
        return self._omegas[(g, n)]

    # local forms ---------------------------------------------------------

    def _form(self, g: int, n: int, frame: _LocalFrame, side: str) -> Dict[TermKey, LaurentExpansion]:
        """omega_{g,n} with its first slot at q (side 'q') or sigma(q) (side 'sigma')."""
        key = (g, n, frame.p, frame.order, side)
        if key in self._forms:
            return self._forms[key]
        basis = frame.phi if side == "q" else frame.psi
        grouped: Dict[TermKey, Dict[BasisKey, Fraction]] = defaultdict(lambda: defaultdict(Fraction))
        for term, c in self.omega(g, n).terms.items():
            grouped[term[1:]][term[0]] += c
        form: Dict[TermKey, LaurentExpansion] = {}
        for rest, parts in grouped.items():
            series = LaurentExpansion.zero(frame.order, frame.p)
            for (b, k), c in parts.items():
                if c:
                    series = series + basis(b, k).scale(c)
            if not series.is_zero():
                form[rest] = series
        self._forms[key] = form
        return form

    def _factor(self, g: int, n: int, frame: _LocalFrame, side: str, partner_valuation: int) -> Dict[TermKey, LaurentExpansion]:
        if (g, n) == (0, 2):
            return frame.bergman_form(side, -partner_valuation)
        return self._form(g, n, frame, side)

    # recursion -----------------------------------------------------------

    def _bracket(self, frame: _LocalFrame, g: int, n: int) -> Dict[TermKey, LaurentExpansion]:
        """The quadratic bracket of the recursion for omega_{g,n+1}, as dt^2 densities keyed by z_1..z_n."""
        bracket: Dict[TermKey, LaurentExpansion] = {}

        def add(rest: TermKey, series: LaurentExpansion) -> None:
            bracket[rest] = bracket[rest] + series if rest in bracket else series

        if g >= 1:
            if (g - 1, n + 2) == (0, 2):
                add((), frame.bergman_diagonal())
            else:
                pairs: Dict[TermKey, Dict[Tuple[BasisKey, BasisKey], Fraction]] = defaultdict(lambda: defaultdict(Fraction))
                for term, c in self.omega(g - 1, n + 2).terms.items():
                    pairs[term[2:]][(term[0], term[1])] += c
                products: Dict[Tuple[BasisKey, BasisKey], LaurentExpansion] = {}
                for rest, parts in pairs.items():
                    series = LaurentExpansion.zero(frame.order, frame.p)
                    for pair, c in parts.items():
                        if pair not in products:
                            products[pair] = frame.phi(*pair[0]) * frame.psi(*pair[1])
                        series = series + products[pair].scale(c)
                    add(rest, series)

        positions = tuple(range(n))
        for h in range(0, g + 1):
            for size in range(0, n + 1):
                # omega_{0,1} never enters the bracket
                if (h, size) in ((0, 0), (g, n)):
                    continue
                for subset in itertools.combinations(positions, size):
                    complement = tuple(i for i in positions if i not in subset)
                    self._add_split(frame, (h, subset), (g - h, complement), n, add)
        return bracket

    def _add_split(self, frame: _LocalFrame, first: Tuple[int, tuple], second: Tuple[int, tuple], n: int, add) -> None:
        (g1, subset), (g2, complement) = first, second
        n1, n2 = len(subset) + 1, len(complement) + 1
        if (g1, n1) == (0, 2) and (g2, n2) == (0, 2):
            left = frame.bergman_form("q", 0)
            right = frame.bergman_form("sigma", 0)
        elif (g1, n1) == (0, 2):
            right = self._form(g2, n2, frame, "sigma")
            low = min((s.valuation for s in right.values()), default=0)
            left = frame.bergman_form("q", -low)
        elif (g2, n2) == (0, 2):
            left = self._form(g1, n1, frame, "q")
            low = min((s.valuation for s in left.values()), default=0)
            right = frame.bergman_form("sigma", -low)
        else:
            left = self._form(g1, n1, frame, "q")
            right = self._form(g2, n2, frame, "sigma")
        for rest1, s1 in left.items():
            for rest2, s2 in right.items():
                merged: List[BasisKey] = [None] * n  # type: ignore[list-item]
                for pos, basis in zip(subset, rest1):
                    merged[pos] = basis
                for pos, basis in zip(complement, rest2):
                    merged[pos] = basis
                add(tuple(merged), s1 * s2)

    def _recurse(self, g: int, n_vars: int) -> MultiDifferential:
        n = n_vars - 1
        terms: Dict[TermKey, Fraction] = defaultdict(Fraction)
        for p in self.ramification:
            frame = self.frame(p)
            for rest, series in self._bracket(frame, g, n).items():
                if series.is_zero():
                    continue
                pole = -series.valuation
                for k in range(1, pole + 2):
                    c = frame.kappa(k).pair_residue(series)
                    if c:
                        terms[((p, k + 1),) + rest] += c
            logger.debug("omega_(%d,%d): residue at %s done", g, n_vars, p)
        if n == 0 and g >= 1:
            for key, c in logtr_correction(self.curve, g, self.log_vital_points).terms.items():
                terms[key] += c
        return MultiDifferential.from_terms(g, n_vars, terms)

    def local_omega(self, g: int, p: Fraction, side: str = "q") -> LaurentExpansion:
        """omega_{g,1} at q = p + t (or sigma(q)) as a dt density."""
        frame = self.frame(p)
        form = self._form(g, 1, frame, side)
        return form.get((), LaurentExpansion.zero(frame.order, p))


_ENGINES: Dict[str, TopologicalRecursion] = {}
_ENGINES_LOCK = threading.Lock()


def get_engine(curve: SpectralCurve, settings: Optional[EngineSettings] = None, g_max: Optional[int] = None) -> TopologicalRecursion:
    """Shared engine for a curve; ω_{g,n} are memoized per curve fingerprint."""
    settings = settings or load_settings()
    with _ENGINES_LOCK:
        engine = _ENGINES.get(curve.fingerprint)
        if engine is None:
            engine = TopologicalRecursion(curve, settings, settings.truncation_for(g_max or 1))
            _ENGINES[curve.fingerprint] = engine
        else:
            engine.settings = settings
    if g_max is not None:
        engine.ensure_order(settings.truncation_for(g_max))
    return engine


def clear_cache() -> None:
    with _ENGINES_LOCK:
        _ENGINES.clear()


def tr_omega(curve: SpectralCurve, g: int, n: int, g_max: Optional[int] = None,
             settings: Optional[EngineSettings] = None) -> MultiDifferential:
    """
    omega_{g,n} of (Log-)TR for a genus-zero curve.

    Args:
        curve (SpectralCurve): Curve with rational simple ramification points of x.
        g (int): Genus.
        n (int): Number of variables.
        g_max (int, optional): Largest genus of the surrounding computation; sets the
            initial truncation order.
        settings (EngineSettings, optional): Engine settings, read from the environment if omitted.

    Returns:
        MultiDifferential: Pole-basis tensor (the Bergman marker for (0, 2)).
    """
    return get_engine(curve, settings, g_max or g).omega(g, n)


def inverse_s_coefficient(g: int) -> Fraction:
    """[t^{2g}] 1/S(t)."""
    return s_function_series("inverseS", 2 * g).coefficient(2 * g)


def logtr_correction(curve: SpectralCurve, g: int, atoms: Optional[List[LogAtom]] = None) -> MultiDifferential:
    """
    Contribution of the log-vital points of y to omega_{g,1}.

    For each atom (1/alpha) log(q - a) this is
    Res_{q->a} (1/(z-q) - 1/(z-a)) dz * c * alpha^(2g-1) * (d/dx)^(2g) log(q - a) dx(q)
    with c = [t^{2g}] 1/S(t).
    """
    if g < 1:
        raise ValueError("log-TR correction is defined for g >= 1")
    if atoms is None:
        dx = curve.dx()
        atoms = [a for a in curve.y.atoms() if dx.order_at(a.branch_point) >= 0]
    terms: Dict[TermKey, Fraction] = defaultdict(Fraction)
    x_prime = curve.dx()
    c = inverse_s_coefficient(g)
    for atom in atoms:
        a, alpha = atom.branch_point, atom.alpha
        derivative = RationalFunction.pole(a, 1) / x_prime
        for _ in range(2 * g - 1):
            derivative = derivative.derivative() / x_prime
        density = derivative * x_prime * (c * alpha ** (2 * g - 1))
        local = expand_at(density, a, -2)
        for degree, coefficient in local.items():
            if degree <= -2:
                terms[((a, -degree),)] += coefficient
    return MultiDifferential.from_terms(g, 1, terms)


def _check_residue_free(omega: MultiDifferential) -> None:
    residues = omega.residues(0)
    if residues:
        raise ResidueFreenessError(f"omega_({omega.genus},{omega.n_vars}) has residues {residues}")


def dilaton_free_energy(curve: SpectralCurve, g: int, settings: Optional[EngineSettings] = None) -> FreeEnergyValue:
    """
    F_g = 1/(2-2g) sum_p Res_p Phi omega_{g,1}, summed over the ramification points of x.

    Raises:
        ValueError: For g < 2.
        PathUnavailableError: Irrational ramification points.
        ResidueFreenessError: omega_{g,1} carries a residue.
    """
    if g < 2:
        raise ValueError("free energies are defined here for g >= 2")
    engine = get_engine(curve, settings, g)
    omega = engine.omega(g, 1)
    _check_residue_free(omega)
    total = Fraction(0)
    for p in engine.ramification:
        top = omega.max_order(p)
        if top == 0:
            continue
        y_local = curve.y.local_expansion(p, top)
        phi = (y_local * expand_at(curve.dx(), p, top)).integral()
        for ((b, k),), c in omega.terms.items():
            if b == p:
                total += c * phi.coefficient(k - 1)
    value = total / (2 - 2 * g)
    logger.info("F_%d via TR on %s: %s", g, curve.label, value)
    return FreeEnergyValue(g, value, "TR")


def lemma31_check(curve: SpectralCurve, g: int, settings: Optional[EngineSettings] = None) -> Lemma31Result:
    """
    Compare sum_p Res_p x y omega_{g,1} with
    1/2 sum_a Res_a (x/dx) sum_{g1+g2=g, gi>0} omega_{g1,1} omega_{g2,1}.

    Transcendental constants x(p), y(p), x(a) are carried as formal log combinations.
    """
    engine = get_engine(curve, settings, g)
    omega = engine.omega(g, 1)
    lhs = LogLinear()
    for p in engine.ramification:
        top = omega.max_order(p)
        if top == 0:
            continue
        x_local = curve.x.local_expansion(p, top)
        y_local = curve.y.local_expansion(p, top)
        x_const = curve.x.log_constant_at(p)
        y_const = curve.y.log_constant_at(p)
        density = LaurentExpansion.zero(top, p)
        for ((b, k),), c in omega.terms.items():
            if b == p:
                density = density + LaurentExpansion.monomial(c, -k, p)
        res_x = density.pair_residue(x_local)
        res_y = density.pair_residue(y_local)
        res_xy = density.pair_residue(x_local * y_local)
        lhs = lhs + y_const.scale(res_x) + x_const.scale(res_y) + LogLinear(res_xy)

    rhs = LogLinear()
    quadratic = RationalFunction.constant(0)
    for g1 in range(1, g):
        f1 = engine.omega(g1, 1).as_rational_function()
        f2 = engine.omega(g - g1, 1).as_rational_function()
        quadratic = quadratic + f1 * f2
    quadratic = quadratic / curve.dx()
    for atom in engine.log_vital_points:
        a = atom.branch_point
        order = quadratic.order_at(a)
        if order >= 0:
            continue
        x_local = curve.x.local_expansion(a, -order)
        q_local = expand_at(quadratic, a, -1 - min(x_local.valuation, 0))
        rational = q_local.pair_residue(x_local)
        rhs = rhs + LogLinear(rational).scale(Fraction(1, 2)) \
            + curve.x.log_constant_at(a).scale(residue_at(quadratic, a) / 2)
    return Lemma31Result(g, lhs, rhs)


def linear_loop_check(curve: SpectralCurve, g: int, settings: Optional[EngineSettings] = None) -> Dict[Fraction, bool]:
    """Per ramification point: omega_{g,1}(z) + omega_{g,1}(sigma(z)) is O(t) dz."""
    engine = get_engine(curve, settings, g)
    engine.omega(g, 1)
    verdicts: Dict[Fraction, bool] = {}
    for p in engine.ramification:
        total = engine.local_omega(g, p, "q") + engine.local_omega(g, p, "sigma")
        if total.truncation_order < 0:
            raise TruncationExhaustedError(0, total.truncation_order)
        verdicts[p] = total.valuation >= 1
    return verdicts
