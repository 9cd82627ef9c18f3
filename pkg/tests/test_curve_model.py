import json

import numpy as np
import pytest

from src.curve_model import (
    DeformationFamily,
    PolynomialCurve,
    SpaceCurve,
    cusp_family,
    eval_component_jet,
    load_spec,
    load_spec_file,
    normal_form_curve,
)
from src.errors import DomainError, ParseError, SchemaError


def test_load_curve(twisted_cubic):
    assert isinstance(twisted_cubic, SpaceCurve)
    assert not isinstance(twisted_cubic, DeformationFamily)
    assert twisted_cubic.t_range == (-1.0, 1.0)
    assert np.allclose(twisted_cubic.point(0.5), [0.5, 0.25, 0.125])


def test_load_family(family_g):
    assert isinstance(family_g, DeformationFamily)
    assert family_g.s_box == ((-0.2, 0.2), (-0.2, 0.2))
    gamma = family_g.jet3(0.0, 4, (0.1, -0.05))
    assert gamma.y.coefficient(1) == pytest.approx(0.1)
    assert gamma.z.coefficient(1) == pytest.approx(-0.05)
    assert gamma.z.coefficient(4) == pytest.approx(-1.0)


def test_poly_form_with_parameter_entries():
    spec = {
        "kind": "family",
        "poly": [[0, 0, 1], [0, "s1", 0, 1], [0, "s2", 0, 1]],
        "t_range": [-0.5, 0.5],
        "s_box": [[-0.1, 0.1], [-0.1, 0.1]],
    }
    family = load_spec(spec)
    gamma = family.jet3(0.2, 3, (0.3, 0.0))
    assert gamma.y.value == pytest.approx(0.3 * 0.2 + 0.2 ** 3)


@pytest.mark.parametrize(
    "document, message",
    [
        ("", "empty"),
        ("[1, 2]", "JSON object"),
        ('{"kind": "curve", "x": "t", "y": "t", "z": "t", "t_range": [0, 1], "color": "red"}', "unknown key"),
        ('{"kind": "surface", "x": "t", "y": "t", "z": "t", "t_range": [0, 1]}', "kind"),
        ('{"kind": "curve", "x": "t", "y": "t", "t_range": [0, 1]}', "missing field 'z'"),
        ('{"kind": "curve", "x": "t", "y": "t", "z": "t", "t_range": [1, 0]}', "lo < hi"),
        ('{"kind": "curve", "x": "s1*t", "y": "t", "z": "t", "t_range": [0, 1]}', "parameters"),
        ('{"kind": "family", "x": "t", "y": "t", "z": "t", "t_range": [0, 1]}', "s_box"),
    ],
)
def test_schema_errors(document, message):
    with pytest.raises(SchemaError, match=message):
        load_spec(document)


def test_component_parse_error_propagates():
    with pytest.raises(ParseError):
        load_spec({"kind": "curve", "x": "t +", "y": "t", "z": "t", "t_range": [0, 1]})


def test_load_spec_file(write_spec, tmp_path):
    path = write_spec({"kind": "curve", "x": "t", "y": "t^2", "z": "t^4", "t_range": [-1, 1]})
    curve = load_spec_file(path)
    assert curve.texts() == ["t", "t^2", "t^4"]
    with pytest.raises(SchemaError, match="not found"):
        load_spec_file(str(tmp_path / "missing.json"))


def test_load_spec_rejects_invalid_utf8():
    with pytest.raises(SchemaError, match="UTF-8"):
        load_spec(b"\xff\xfe{}")


def test_eval_component_jet_domain(family_g):
    jet = eval_component_jet(family_g, "x", 0.1, (0.0, 0.0), 3)
    assert jet.value == pytest.approx(0.01 + 0.001 + 0.0001)
    with pytest.raises(DomainError):
        eval_component_jet(family_g, "x", 0.9, (0.0, 0.0), 3)
    with pytest.raises(DomainError):
        eval_component_jet(family_g, "y", 0.0, (0.0, 0.0), 99)
    with pytest.raises(SchemaError):
        eval_component_jet(family_g, "w", 0.0, (0.0, 0.0), 3)


def test_slice_pins_parameters(family_g):
    curve = family_g.slice((0.1, 0.2))
    assert np.allclose(curve.point(0.0), [0.0, 0.0, 0.0])
    assert curve.jet3(0.0, 1).y.coefficient(1) == pytest.approx(0.1)


def test_normal_form_curve_is_unit_speed_to_third_order():
    curve = normal_form_curve(0.8, b3=0.3, c3=0.5)
    speed = curve.jet3(0.0, 5).derivative().norm()
    assert speed.value == pytest.approx(1.0)
    assert np.allclose(speed.coefficients[1:3], 0.0, atol=1e-14)


def test_polynomial_curve_matches_space_curve(rng):
    curve = PolynomialCurve([0, 1, 0.5], [0, 0, 1, -0.2], [0, 0, 0, 1])
    as_tree = curve.as_space_curve()
    t = rng.uniform(-1, 1, size=9)
    assert np.allclose(curve.point(t), as_tree.point(t))
    assert np.allclose(curve.jet3(0.3, 4).z.coefficients, as_tree.jet3(0.3, 4).z.coefficients)


def test_cusp_family_builder():
    family = cusp_family([1.0, 1.0], [0.0, 1.0], [0.0, 1.0])
    gamma = family.jet3(0.0, 3, (0.2, 0.1))
    assert np.allclose(gamma.coefficient(1), [0.0, 0.2, 0.1])
    assert np.allclose(gamma.coefficient(2), [1.0, 0.0, 0.0])
    assert np.allclose(gamma.coefficient(3), [1.0, 1.0, 1.0])


def test_moved_curve_keeps_invariant_geometry(twisted_cubic):
    angle = 0.4
    rotation = np.array([[np.cos(angle), -np.sin(angle), 0.0],
                         [np.sin(angle), np.cos(angle), 0.0],
                         [0.0, 0.0, 1.0]])
    moved = twisted_cubic.moved(rotation, (1.0, 2.0, 3.0))
    assert np.allclose(moved.jet3(0.0, 0).value(), [1.0, 2.0, 3.0])
    original = twisted_cubic.jet3(0.5, 3).derivative().norm().coefficients
    assert np.allclose(moved.jet3(0.5, 3).derivative().norm().coefficients, original)


def test_json_roundtrip_of_model_spec(family_g):
    document = json.dumps({"kind": "family", "x": family_g.texts()[0], "y": family_g.texts()[1],
                           "z": family_g.texts()[2], "t_range": list(family_g.t_range),
                           "s_box": [list(b) for b in family_g.s_box]})
    again = load_spec(document)
    assert np.allclose(again.jet3(0.1, 4, (0.05, 0.02)).coefficient(3),
                       family_g.jet3(0.1, 4, (0.05, 0.02)).coefficient(3))
