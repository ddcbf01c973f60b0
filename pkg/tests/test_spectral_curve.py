from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from curve_catalog import catalog_get
from errors import CurveValidationError, IrrationalPoleError, NonSimpleRamificationError, SeriesDomainError
from exact_algebra import INFINITY, RationalFunction
from spectral_curve import (
    CurveFunction,
    classify_residue_points,
    deck_transformation,
    frame_curve,
    integrate_rational,
    make_curve,
    parse_curve,
    primitive_phi,
    ramification_points,
    swap_curve,
)

HZ_DOCUMENT = {
    "label": "hz",
    "x": {"rational": {"num": [1, 0, 1], "den": [0, 1]}},
    "y": {"rational": {"num": [0, 1]}},
}


def test_parse_curve_from_document(hz):
    curve = parse_curve(HZ_DOCUMENT)
    assert curve.dx() == hz.dx()
    assert curve.fingerprint == hz.fingerprint
    assert curve.label == "hz"


def test_document_schema_is_enforced():
    with pytest.raises(ValidationError):
        parse_curve({"x": {"rational": {"num": ["half"]}}, "y": {"kind": "log_z"}})
    with pytest.raises(ValidationError):
        parse_curve({"x": {"kind": "log_z", "logs": [{"a": 0, "coeff": 1}]}, "y": {"rational": {"num": [0, 1]}}})


def test_y_with_general_logs_is_rejected():
    doc = {"x": {"rational": {"num": [0, 0, 1]}}, "y": {"logs": [{"a": 1, "coeff": 2}]}}
    with pytest.raises(CurveValidationError):
        parse_curve(doc)


def test_validation_errors(z, rational_curve):
    with pytest.raises(CurveValidationError):
        rational_curve(RationalFunction.constant(3), z)
    with pytest.raises(NonSimpleRamificationError):
        rational_curve(z ** 3, z)
    with pytest.raises(IrrationalPoleError):
        rational_curve(z + RationalFunction.from_coefficients([1], [-2, 0, 1]), z)


def test_ramification_points_of_harer_zagier(hz):
    assert [r.location for r in ramification_points(hz, "x")] == [Fraction(-1), Fraction(1)]
    assert ramification_points(hz, "y") == []


def test_ramification_skips_singular_points_of_the_other_function(z):
    # dx vanishes at 0 where y = 1/z has a pole
    curve = make_curve(CurveFunction.rational(z ** 2 / 2), CurveFunction.rational(1 / z), "pole-at-branch")
    assert ramification_points(curve, "x") == []


def test_deck_transformation_of_harer_zagier(hz):
    deck = deck_transformation(hz, Fraction(1), 8)
    # z -> 1/z around z = 1, so sigma(t) = 1/(1+t) - 1
    assert [deck.series.coefficient(k) for k in range(1, 6)] == [-1, 1, -1, 1, -1]
    assert deck.involution_residual().truncate(8).is_zero()


def test_deck_transformation_is_an_involution_for_log_x(log_pair):
    deck = deck_transformation(log_pair, Fraction(1, 2), 10)
    assert deck.series.coefficient(1) == -1
    assert deck.involution_residual().truncate(10).is_zero()


def test_local_expansion_drops_log_constants(log_pair):
    local = log_pair.x.local_expansion(Fraction(1, 2), 3)
    # log(1/2 + t) + log(-1/2 + t) has no linear term
    assert local.coefficient(1) == 0
    assert local.coefficient(2) == -4
    constant = log_pair.x.log_constant_at(Fraction(1, 2))
    assert dict(constant.logs) == {Fraction(1, 2): 1, Fraction(-1, 2): 1}
    with pytest.raises(SeriesDomainError):
        log_pair.x.local_expansion(INFINITY, 3)


def test_classification_of_the_log_tr_curve(log_tr_demo):
    classes = classify_residue_points(log_tr_demo)
    assert [a.branch_point for a in classes.log_y] == [0]
    assert classes.log_x == []
    assert classes.ram_x == [Fraction(1)]
    assert classes.poles_primal == []


def test_classification_of_harer_zagier(hz):
    classes = classify_residue_points(hz)
    # Res_0 x dy = 1 and Res_oo x dy != 0 make 0 and oo dual poles
    assert Fraction(0) in classes.poles_dual
    assert classes.ambiguous() == [INFINITY]
    assert classes.log_x == [] and classes.log_y == []


def _point_classes(curve):
    c = classify_residue_points(curve)
    return c.ram_x, c.ram_y, c.log_x, c.log_y, c.poles_primal, c.poles_dual


# integer constants: on the log pair a shift of y by -1/2 cancels Res_oo y dx
@settings(max_examples=20, deadline=None)
@given(constant=st.integers(min_value=-4, max_value=4), on=st.sampled_from(["x", "y"]))
def test_classification_ignores_added_constants(constant, on):
    shift = CurveFunction.rational(RationalFunction.constant(constant))
    for curve in (catalog_get("harer-zagier").curve, catalog_get("log-points", {"a": "0,1"}).curve):
        x, y = (curve.x + shift, curve.y) if on == "x" else (curve.x, curve.y + shift)
        assert _point_classes(make_curve(x, y, "shifted")) == _point_classes(curve)


def test_swap_is_an_involution(hz):
    swapped = swap_curve(hz)
    assert swapped.label == "harer-zagier^vee"
    assert swapped.x == hz.y
    assert swap_curve(swapped).label == "harer-zagier"


def test_framing_moves_log_z_into_x(log_tr_demo):
    framed = frame_curve(log_tr_demo, 1)
    assert [(a.branch_point, a.coefficient) for a in framed.x.log_atoms] == [(0, 1)]
    assert framed.dx().order_at(Fraction(0)) == -1
    assert classify_residue_points(framed).log_y == []
    assert frame_curve(log_tr_demo, 0) is log_tr_demo


def test_fingerprint_ignores_the_label(hz):
    relabelled = make_curve(hz.x, hz.y, "other name")
    assert relabelled.fingerprint == hz.fingerprint
    assert swap_curve(hz).fingerprint != hz.fingerprint


def test_integrate_rational_splits_off_logs(z):
    primitive = integrate_rational(z + 2 / z + RationalFunction.pole(1, 2))
    assert primitive.derivative() == z + 2 / z + RationalFunction.pole(1, 2)
    assert [(a.branch_point, a.coefficient) for a in primitive.log_atoms] == [(0, 2)]


def test_primitive_phi_of_harer_zagier(hz, z):
    primal = primitive_phi(hz)
    assert primal.derivative() == z * hz.dx()
    assert primal.rational_part == z ** 2 / 2
    assert [(a.branch_point, a.coefficient) for a in primal.log_atoms] == [(0, -1)]
    dual = primitive_phi(hz, "dual")
    assert [(a.branch_point, a.coefficient) for a in dual.log_atoms] == [(0, 1)]


def test_primitive_phi_needs_a_rational_integrand(log_pair, log_tr_demo):
    with pytest.raises(CurveValidationError):
        primitive_phi(log_tr_demo)
    with pytest.raises(CurveValidationError):
        primitive_phi(log_pair, "dual")
    assert [(a.branch_point, a.coefficient) for a in primitive_phi(log_pair).log_atoms] == [(1, 1)]
