import numpy as np
import pytest

from src.errors import InflectionError, ZeroTorsion
from src.features import (
    CUSP,
    DEGENERATE,
    FLATTENING,
    TWISTING,
    detect_cusp,
    feature_certificates,
    scan_features,
    vertex_kappa_identity,
)


def test_fr_model_has_one_flattening_at_origin(fr_model):
    scan = scan_features(fr_model, (-1.0, 1.0), 400)
    flats = scan.of_kind(FLATTENING)
    assert len(flats) == 1
    assert abs(flats[0].t) < 1e-9
    assert flats[0].certificate == "flattening"
    assert not scan.issues


def test_scan_is_sorted_and_rows_are_flat(twisted_cubic):
    scan = scan_features(twisted_cubic, (-1.0, 1.0), 256, workers=3)
    ts = [p.t for p in scan]
    assert ts == sorted(ts)
    for point in scan:
        row = point.as_row()
        assert row["kind"] == point.kind
        assert all(isinstance(v, (str, float, int)) for v in row.values())


def test_worker_count_does_not_change_the_result(twisted_cubic):
    one = scan_features(twisted_cubic, (-1.0, 1.0), 256, workers=1)
    four = scan_features(twisted_cubic, (-1.0, 1.0), 256, workers=4)
    assert [p.kind for p in one] == [p.kind for p in four]
    assert np.allclose([p.t for p in one], [p.t for p in four], atol=1e-12)


def test_twisted_cubic_twistings(twisted_cubic):
    # τ/κ is a function of t^2 whose derivative in t^2 is proportional to 45t^4 - 5
    scan = scan_features(twisted_cubic, (-1.0, 1.0), 512)
    twists = sorted(p.t for p in scan.of_kind(TWISTING))
    assert len(twists) == 3
    assert np.allclose(twists, [-1.0 / np.sqrt(3.0), 0.0, 1.0 / np.sqrt(3.0)], atol=1e-8)


def test_space_cusp_is_reported_once(space_cusp):
    scan = scan_features(space_cusp, (-1.0, 1.0), 400)
    cusps = scan.of_kind(CUSP)
    assert len(cusps) == 1
    assert abs(cusps[0].t) < 1e-8
    assert cusps[0].certificates["is_space_cusp"] == 1.0


def test_helix_twisting_certificate_is_degenerate(helix):
    scan = scan_features(helix, (0.0, 6.0), 256)
    assert [p.kind for p in scan] == [DEGENERATE]
    assert scan[0].certificate == "twisting"
    assert scan[0].certificates["t_hi"] == 6.0


def test_too_few_samples(twisted_cubic):
    with pytest.raises(ValueError):
        scan_features(twisted_cubic, (-1.0, 1.0), 8)


def test_detect_cusp(space_cusp, twisted_cubic):
    check = detect_cusp(space_cusp, 0.0)
    assert check.is_space_cusp
    assert check.acceleration == pytest.approx(2.0)
    assert check.cross_23 == pytest.approx(12.0)
    assert not detect_cusp(twisted_cubic, 0.0).is_space_cusp


def test_feature_certificates_at_flattening(fr_model):
    certs = feature_certificates(fr_model, 0.0)
    assert certs.tau == pytest.approx(0.0, abs=1e-14)
    assert certs.flattening_det == pytest.approx(0.0, abs=1e-14)
    assert certs.vertex_cert is None
    assert certs.tau_prime != 0.0


def test_feature_certificates_reject_inflection():
    from src.curve_model import load_spec

    cubic = load_spec({"kind": "curve", "x": "t", "y": "t^3", "z": "t^5", "t_range": [-1, 1]})
    with pytest.raises(InflectionError):
        feature_certificates(cubic, 0.0)


def test_vertex_identity_needs_torsion(fr_model, twisted_cubic):
    with pytest.raises(ZeroTorsion):
        vertex_kappa_identity(fr_model, 0.0)
    value = vertex_kappa_identity(twisted_cubic, 0.2)
    certs = feature_certificates(twisted_cubic, 0.2)
    # the identity and the pole-free certificate differ by the factor -κτ
    assert value == pytest.approx(-certs.vertex_numerator / (certs.kappa * certs.tau), rel=1e-8)


def test_root_above_the_residual_bound_is_not_a_feature(twisted_cubic):
    from src.features import FeatureIssue, _classify_root

    issue = _classify_root(twisted_cubic, "twisting", 0.0, 1e-6, None, 1e-8, (-0.3, 0.3))
    assert isinstance(issue, FeatureIssue)
    assert issue.kind == "UnresolvedRoot"
    assert (issue.t_lo, issue.t_hi) == (-0.3, 0.3)
    point = _classify_root(twisted_cubic, "twisting", 0.0, 0.0, None, 1e-8, (-0.3, 0.3))
    assert point.kind == TWISTING
