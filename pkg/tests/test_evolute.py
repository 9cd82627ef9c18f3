import numpy as np
import pytest

from src.curve_model import normal_form_curve
from src.errors import NotAFlattening, NotATwisting, NotAVertex, ZeroTorsion
from src.evolute import (
    evolute_flattening_asymptotics,
    evolute_jet,
    evolute_polyline,
    evolute_twisting_series,
    evolute_velocity,
    evolute_vertex_series,
    focal_data,
    normal_form,
    twisting_delta,
    vertex_condition,
)
from src.frenet import frenet_apparatus


def test_helix_evolute_is_a_coaxial_helix(helix):
    # focal curve of (cos t, sin t, t) is (-cos t, -sin t, t)
    data = focal_data(helix, 0.9)
    assert data.mu1 == pytest.approx(2.0)
    assert data.mu2 == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(data.center, [-np.cos(0.9), -np.sin(0.9), 0.9])


def test_evolute_point_is_equidistant_to_first_order(twisted_cubic):
    data = focal_data(twisted_cubic, 0.4)
    gamma = twisted_cubic.jet3(0.4, 3)
    diff = gamma.translate(-data.center)
    d = diff.norm_squared()
    assert d.value == pytest.approx(data.radius ** 2)
    # osculating sphere: the distance is stationary to third order
    assert np.allclose(d.coefficients[1:4], 0.0, atol=1e-10)


def test_evolute_velocity_is_binormal(twisted_cubic):
    velocity = evolute_velocity(twisted_cubic, 0.4)
    frenet = frenet_apparatus(twisted_cubic, 0.4, 2)
    unit = velocity / np.linalg.norm(velocity)
    assert abs(float(np.dot(unit, frenet.B))) == pytest.approx(1.0)


def test_evolute_jet_rejects_zero_torsion(fr_model):
    with pytest.raises(ZeroTorsion):
        evolute_jet(fr_model, 0.0, 2)


def test_polyline_skips_the_flattening(fr_model):
    polyline = evolute_polyline(fr_model, (-1.0, 1.0), 201)
    assert 0.0 in polyline.skipped
    assert polyline.points.shape == (200, 3)
    assert np.all(np.isfinite(polyline.points))


def test_normal_form_places_frame_on_axes(twisted_cubic):
    form = normal_form(twisted_cubic, 0.3, 8)
    frenet = frenet_apparatus(form.curve, 0.0, 2)
    assert np.allclose(form.curve.point(0.0), 0.0)
    assert np.allclose(frenet.T, [1, 0, 0])
    assert np.allclose(frenet.N, [0, 1, 0])
    assert np.allclose(frenet.B, [0, 0, 1])
    speed = form.curve.jet3(0.0, 6).derivative().norm()
    assert np.allclose(speed.coefficients, [1, 0, 0, 0, 0, 0], atol=1e-10)


def test_flattening_asymptotics_match_closed_forms():
    curve = normal_form_curve(1.0, b3=0.5, c4=1.0)
    report = evolute_flattening_asymptotics(curve, 0.0)
    assert report.entry("y0").computed == pytest.approx(0.5, rel=1e-9)
    assert report.entry("x2").computed == pytest.approx(0.25, rel=1e-8)
    assert report.entry("y1").computed == pytest.approx(-0.375, rel=1e-8)
    assert report.entry("z_pole").computed == pytest.approx(-0.0625, rel=1e-5)
    assert report.max_rel_dev < 1e-5


def test_flattening_report_on_fr_model(fr_model):
    report = evolute_flattening_asymptotics(fr_model, 0.0)
    assert report.kind == "flattening"
    assert report.entry("y0").rel_dev < 1e-9
    # b3 = 0 here, so x2 and the pole are compared in absolute terms
    assert report.entry("z_pole").degenerate
    assert report.entry("z_pole").rel_dev < 1e-6


def test_flattening_report_rejects_regular_points(twisted_cubic):
    with pytest.raises(NotAFlattening):
        evolute_flattening_asymptotics(twisted_cubic, 0.2)


def test_vertex_series_match_closed_forms(vertex_curve):
    form = normal_form(vertex_curve, 0.0, 10)
    a, b, c = form.a, form.b, form.c
    assert vertex_condition(a[3], b[2], b[3], b[4], c[3], c[4]) == pytest.approx(0.0, abs=1e-12)
    report = evolute_vertex_series(vertex_curve, 0.0)
    assert report.kind == "vertex"
    assert report.entry("b0_bar").computed == pytest.approx(0.5)
    assert report.entry("c0_bar").computed == pytest.approx(-0.25)
    assert report.max_rel_dev < 1e-6
    assert np.linalg.norm(evolute_velocity(vertex_curve, 0.0)) < 1e-8


def test_vertex_series_rejects_non_vertices(twisted_cubic, fr_model):
    with pytest.raises(NotAVertex):
        evolute_vertex_series(twisted_cubic, 0.2)
    with pytest.raises(NotAVertex):
        evolute_vertex_series(fr_model, 0.0)


def test_twisting_series_on_twisted_cubic(twisted_cubic):
    report = evolute_twisting_series(twisted_cubic, 0.0)
    assert report.kind == "twisting"
    assert report.extras["delta"] == pytest.approx(twisting_delta(1.0, 0.0, -4.0 / 3.0))
    assert report.extras["delta"] == pytest.approx(-12.0)
    assert report.entry("kappa_c0").closed_form == pytest.approx(1.5)
    assert report.entry("tau_c0").closed_form == pytest.approx(1.0)
    assert report.max_rel_dev < 1e-6


def test_twisting_series_rejects_non_twistings(twisted_cubic):
    with pytest.raises(NotATwisting):
        evolute_twisting_series(twisted_cubic, 0.3)


def test_evolute_inherits_the_twisting(twisted_cubic):
    report = evolute_twisting_series(twisted_cubic, 0.0)
    assert abs(report.extras["evolute_twist_cert"]) < 1e-6 * report.extras["evolute_kappa_cubed"]


def test_evolute_commutes_with_rigid_motions(twisted_cubic, rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    rotation = q * np.sign(np.diag(r))
    if np.linalg.det(rotation) < 0:
        rotation[:, 0] = -rotation[:, 0]
    shift = rng.normal(size=3)
    moved = twisted_cubic.moved(rotation, shift)
    for t in (-0.5, 0.1, 0.8):
        expected = rotation @ evolute_jet(twisted_cubic, t, 2).value() + shift
        assert np.allclose(evolute_jet(moved, t, 2).value(), expected, atol=1e-9)


def test_vertex_means_A4_contact_with_the_osculating_sphere(vertex_curve, twisted_cubic):
    from src.frenet import classify_Ak, distance_squared_jet

    at_vertex = distance_squared_jet(vertex_curve, 0.0, focal_data(vertex_curve, 0.0).center, 8)
    assert classify_Ak(at_vertex).k == 4
    ordinary = distance_squared_jet(twisted_cubic, 0.2, focal_data(twisted_cubic, 0.2).center, 8)
    assert classify_Ak(ordinary).k == 3


def _signed(rng, lo, hi):
    return rng.uniform(lo, hi) * rng.choice([-1.0, 1.0])


def test_flattening_asymptotics_on_random_normal_forms(rng):
    for _ in range(20):
        b2 = rng.uniform(0.5, 1.5)
        b3, c4 = _signed(rng, 0.2, 1.0), _signed(rng, 0.3, 1.5)
        b4, b5, c5 = rng.uniform(-1.0, 1.0, size=3)
        curve = normal_form_curve(b2, b3, b4, b5, 0.0, c4, c5)
        report = evolute_flattening_asymptotics(curve, 0.0)
        assert report.max_rel_dev < 1e-5, report.as_dict()


def test_vertex_series_on_random_normal_forms(rng):
    for _ in range(20):
        b2 = rng.uniform(0.5, 1.5)
        b3, c3 = _signed(rng, 0.2, 1.0), _signed(rng, 0.5, 1.5)
        c4, b5, c5 = rng.uniform(-1.0, 1.0, size=3)
        # vertex condition with a3 = -2b2²/3
        b4 = -b2 ** 3 / 3.0 + b3 * c4 / c3
        report = evolute_vertex_series(normal_form_curve(b2, b3, b4, b5, c3, c4, c5), 0.0)
        assert report.max_rel_dev < 1e-6, report.as_dict()


def test_twisting_series_on_random_normal_forms(rng):
    for _ in range(20):
        b2 = rng.uniform(0.5, 1.5)
        b3, c3 = _signed(rng, 0.2, 1.0), _signed(rng, 0.5, 1.5)
        delta = _signed(rng, 1.0, 5.0)
        b4 = (delta - 4.0 * b2 ** 4 + 27.0 * b3 ** 2) / (12.0 * b2)
        # κτ' - κ'τ at 0 is 24c4 - 54 b3 c3 / b2
        c4 = 9.0 * b3 * c3 / (4.0 * b2)
        b5, c5 = rng.uniform(-1.0, 1.0, size=2)
        report = evolute_twisting_series(normal_form_curve(b2, b3, b4, b5, c3, c4, c5), 0.0)
        assert report.extras["delta"] == pytest.approx(delta, rel=1e-9)
        for name in ("x3", "y2", "z0", "z1", "kappa_c0", "tau_c0"):
            assert report.entry(name).rel_dev < 1e-6, name


def test_twisting_lead_on_random_symmetric_curves(rng):
    for _ in range(20):
        b2 = rng.uniform(0.5, 1.5)
        c3 = _signed(rng, 0.5, 1.5)
        delta = _signed(rng, 1.0, 5.0)
        b4 = (delta - 4.0 * b2 ** 4) / (12.0 * b2)
        c5 = rng.uniform(-1.0, 1.0)
        report = evolute_twisting_series(normal_form_curve(b2, b4=b4, c3=c3, c5=c5), 0.0)
        assert report.max_rel_dev < 1e-6, report.as_dict()


def test_random_vertices_have_A4_contact_with_the_osculating_sphere(rng):
    from src.frenet import classify_Ak, distance_squared_jet

    for _ in range(50):
        b2 = rng.uniform(0.5, 1.5)
        b3, c3 = _signed(rng, 0.2, 1.0), _signed(rng, 0.5, 1.5)
        c4, b5, c5 = rng.uniform(-1.0, 1.0, size=3)
        curve = normal_form_curve(b2, b3, -b2 ** 3 / 3.0 + b3 * c4 / c3, b5, c3, c4, c5)
        d = distance_squared_jet(curve, 0.0, focal_data(curve, 0.0).center, 8)
        assert classify_Ak(d).k == 4
