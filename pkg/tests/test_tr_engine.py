from fractions import Fraction

import pytest

from config import EngineSettings
from curve_catalog import catalog_get
from errors import PathUnavailableError
from exact_algebra import RationalFunction
from spectral_curve import CurveFunction, frame_curve, make_curve
from tr_engine import (
    MultiDifferential,
    dilaton_free_energy,
    get_engine,
    lemma31_check,
    linear_loop_check,
    logtr_correction,
    tr_omega,
)


def test_bergman_kernel_is_special_cased(hz):
    omega = tr_omega(hz, 0, 2)
    assert omega.bergman
    assert omega.evaluate(Fraction(1, 3), Fraction(2)) == 1 / (Fraction(1, 3) - 2) ** 2


def test_airy_omega_11(airy):
    omega = tr_omega(airy, 1, 1)
    assert omega.terms == {((Fraction(0), 4),): Fraction(-1, 8)}


def test_harer_zagier_omega_03_is_symmetric_with_double_poles(hz):
    omega = tr_omega(hz, 0, 3)
    assert omega.is_symmetric()
    assert omega.points() == [Fraction(-1), Fraction(1)]
    assert all(k == 2 for key in omega.terms for _, k in key)


@pytest.mark.parametrize("g, n", [(0, 4), (1, 2)])
def test_harer_zagier_symmetry(hz, g, n):
    assert tr_omega(hz, g, n).is_symmetric()


@pytest.mark.parametrize("g", [1, 2])
def test_omega_g1_is_residue_free(hz, g):
    assert tr_omega(hz, g, 1).residues(0) == {}


def test_complexity_guard(hz):
    settings = EngineSettings(max_n=3)
    with pytest.raises(ValueError):
        get_engine(hz, settings).omega(0, 4)
    with pytest.raises(ValueError):
        tr_omega(hz, 0, 1)


def test_harer_zagier_free_energy_g2(hz):
    assert dilaton_free_energy(hz, 2).value == Fraction(-1, 240)


@pytest.mark.slow
def test_harer_zagier_free_energy_g3(hz):
    assert dilaton_free_energy(hz, 3).value == Fraction(1, 1008)


@pytest.mark.parametrize("name, params, expected", [
    ("harer-zagier", None, Fraction(-1, 240)),
    ("log-points", {"a": "0,1"}, Fraction(1, 240)),
])
@pytest.mark.parametrize("x_shift, y_shift", [(3, 0), (0, -2), (Fraction(1, 2), 5)])
def test_free_energy_ignores_constants_in_x_and_y(name, params, expected, x_shift, y_shift):
    # Phi moves by y_shift * (x - x(p)), and Res_p (x - x(p)) omega_{g,1} = 0
    curve = catalog_get(name, params).curve
    x = curve.x + CurveFunction.rational(RationalFunction.constant(x_shift))
    y = curve.y + CurveFunction.rational(RationalFunction.constant(y_shift))
    assert dilaton_free_energy(make_curve(x, y, "shifted"), 2).value == expected


def test_airy_free_energy_vanishes(airy):
    assert dilaton_free_energy(airy, 2).value == 0


def test_log_pair_free_energy_on_the_tr_path(log_pair):
    assert dilaton_free_energy(log_pair, 2).value == Fraction(1, 240)


def test_free_energy_needs_g_at_least_two(hz):
    with pytest.raises(ValueError):
        dilaton_free_energy(hz, 1)


def test_irrational_ramification_is_reported_as_unavailable():
    curve = catalog_get("neg-r-spin", {"r": 3, "eps": 2}).curve
    with pytest.raises(PathUnavailableError):
        tr_omega(curve, 0, 3)


def test_logtr_correction_at_log_z(log_tr_demo):
    correction = logtr_correction(log_tr_demo, 1)
    # [t^2] 1/S(t) = -1/24 times the double pole of d/dz (1/(z(z-1))) at 0
    assert correction.terms == {((Fraction(0), 2),): Fraction(-1, 24)}


def test_log_tr_omega_11_carries_the_correction(log_tr_demo):
    omega = tr_omega(log_tr_demo, 1, 1)
    assert omega.terms.get(((Fraction(0), 2),)) == Fraction(-1, 24)
    assert omega.residues(0) == {}


def test_framing_removes_the_log_vital_point(log_tr_demo):
    framed = frame_curve(log_tr_demo, 1)
    assert logtr_correction(framed, 1).is_zero()
    assert get_engine(framed).log_vital_points == []


@pytest.mark.parametrize("g", [1, 2])
def test_linear_loop_equation(hz, g):
    assert all(linear_loop_check(hz, g).values())


def test_linear_loop_equation_with_log_x(log_pair):
    assert all(linear_loop_check(log_pair, 1).values())


def test_lemma31_on_harer_zagier(hz):
    result = lemma31_check(hz, 2)
    assert result.holds


def test_lemma31_on_the_log_pair(log_pair):
    assert lemma31_check(log_pair, 2).holds


def test_multidifferential_records():
    omega = MultiDifferential.from_terms(1, 1, {((Fraction(0), 4),): Fraction(-1, 8), ((Fraction(1), 2),): 0})
    assert omega.to_records() == [{"points": ["0"], "orders": [4], "coeff": "-1/8"}]
    assert omega.scale(-8).terms == {((Fraction(0), 4),): Fraction(1)}
    assert (omega - omega).is_zero()


def test_engines_are_shared_per_fingerprint(hz):
    assert get_engine(hz) is get_engine(catalog_get("harer-zagier").curve)


def test_scaling_y_scales_the_free_energy(z, rational_curve):
    scaled = rational_curve(z + 1 / z, z * 2, "hz-scaled")
    assert dilaton_free_energy(scaled, 2).value == Fraction(-1, 240) * Fraction(1, 4)


def test_gaiotto_free_energy_on_the_tr_path():
    curve = catalog_get("gaiotto").curve
    assert dilaton_free_energy(curve, 2).value == Fraction(1, 960)


@pytest.mark.slow
def test_lemma31_on_harer_zagier_g3(hz):
    result = lemma31_check(hz, 3)
    assert result.holds
