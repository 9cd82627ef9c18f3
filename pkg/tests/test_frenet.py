import numpy as np
import pytest

from src.curve_model import normal_form_curve
from src.errors import InconsistentDegrees, InflectionError, NonUnitDirection, RegularityError
from src.frenet import (
    arc_length_reparametrization,
    classify_Ak,
    distance_squared_jet,
    frenet_apparatus,
    height_jet,
    helix_defect,
    local_jets,
    rectifying_direction,
    sphere_contact_order,
    versality_test,
)
from src.jet import Jet


def test_normal_form_curvature_and_torsion():
    curve = normal_form_curve(0.7, b3=0.2, c3=0.4)
    frenet = frenet_apparatus(curve, 0.0)
    assert frenet.kappa == pytest.approx(2 * 0.7)
    assert frenet.tau == pytest.approx(3 * 0.4 / 0.7)
    assert np.allclose(frenet.T, [1, 0, 0])
    assert np.allclose(frenet.N, [0, 1, 0])
    assert np.allclose(frenet.B, [0, 0, 1])


def test_normal_form_invariants_on_random_coefficients(rng):
    for _ in range(100):
        b2 = rng.uniform(0.3, 2.0) * rng.choice([-1.0, 1.0])
        c3 = rng.uniform(0.1, 1.5) * rng.choice([-1.0, 1.0])
        b3, b4, b5, c4, c5 = rng.uniform(-1.0, 1.0, size=5)
        frenet = frenet_apparatus(normal_form_curve(b2, b3, b4, b5, c3, c4, c5), 0.0, 2)
        assert frenet.kappa == pytest.approx(2.0 * abs(b2), rel=1e-12)
        assert frenet.tau == pytest.approx(3.0 * c3 / b2, rel=1e-10)


def test_twisted_cubic_at_origin(twisted_cubic):
    frenet = frenet_apparatus(twisted_cubic, 0.0)
    assert frenet.kappa == pytest.approx(2.0)
    assert frenet.tau == pytest.approx(3.0)
    # symmetric under the half-turn (x, y, z, t) -> (-x, y, -z, -t)
    assert frenet.kappa_jet.coefficient(1) == pytest.approx(0.0, abs=1e-12)
    assert frenet.tau_jet.coefficient(1) == pytest.approx(0.0, abs=1e-12)


def test_helix_has_constant_curvature_and_torsion(helix):
    frenet = frenet_apparatus(helix, 1.3, degree=6)
    assert frenet.kappa == pytest.approx(0.5)
    assert frenet.tau == pytest.approx(0.5)
    assert np.allclose(frenet.kappa_jet.coefficients[1:], 0.0, atol=1e-12)
    assert np.allclose(frenet.tau_jet.coefficients[1:], 0.0, atol=1e-12)
    axis = rectifying_direction(frenet)
    assert np.allclose(axis, [0.0, 0.0, 1.0])


def test_frame_is_orthonormal(twisted_cubic):
    frenet = frenet_apparatus(twisted_cubic, 0.6)
    frame = np.vstack([frenet.T, frenet.N, frenet.B])
    assert np.allclose(frame @ frame.T, np.eye(3))
    assert np.linalg.det(frame) == pytest.approx(1.0)


def test_batched_local_jets_agree_with_single_points(twisted_cubic):
    t = np.array([-0.4, 0.1, 0.7])
    batch = local_jets(twisted_cubic, t, 4)
    for i, ti in enumerate(t):
        single = local_jets(twisted_cubic, float(ti), 4)
        assert np.allclose(batch.kappa[i].coefficients, single.kappa.coefficients)
        assert np.allclose(batch.tau[i].coefficients, single.tau.coefficients)


def test_singular_points_raise(space_cusp):
    with pytest.raises(RegularityError) as exc:
        frenet_apparatus(space_cusp, 0.0)
    assert exc.value.magnitude == pytest.approx(0.0)
    assert exc.value.t == 0.0
    with pytest.raises(InflectionError):
        frenet_apparatus(normal_form_curve(0.0), 0.0)


def test_arc_length_of_unit_speed_line():
    line = normal_form_curve(0.0)
    h = arc_length_reparametrization(line, 0.0, 6)
    # the line (t, 0, 0) is already unit speed
    assert np.allclose(h.coefficients, [0, 1, 0, 0, 0, 0, 0], atol=1e-14)


def test_distance_squared_to_centre_of_curvature_is_A2_or_worse(helix):
    frenet = frenet_apparatus(helix, 0.0, 3)
    centre = helix.point(0.0) + frenet.N / frenet.kappa
    d = distance_squared_jet(helix, 0.0, centre, 6)
    kind = classify_Ak(d)
    assert kind.is_singular
    assert kind.k is None or kind.k >= 2


def test_height_jet_rejects_non_unit_direction(twisted_cubic):
    with pytest.raises(NonUnitDirection):
        height_jet(twisted_cubic, 0.0, [1.0, 1.0, 0.0])
    h = height_jet(twisted_cubic, 0.0, [0.0, 0.0, 1.0], 5)
    # z = t^3: A_2 in the binormal direction
    assert classify_Ak(h).k == 2


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_classify_monomials(k):
    h = Jet.identity(8)
    assert classify_Ak(h ** (k + 1)).k == k
    assert not classify_Ak(h + h ** 3).is_singular


def test_classify_zero_jet():
    assert classify_Ak(Jet.constant(0.0, 5)).label == "DegenerateBeyondK"


def test_versality_of_miniversal_unfolding():
    h = Jet.identity(6)
    f = h ** 4
    speeds = [h, h * h]
    assert versality_test(f, 3, speeds)
    result = versality_test(f, 3, [h])
    assert not result
    assert result.deficit == 1


def test_versality_rejects_mismatched_speeds():
    h = Jet.identity(6)
    with pytest.raises(InconsistentDegrees):
        versality_test(h ** 3, 2, [Jet.identity(5)])


def test_sphere_contact_of_osculating_sphere(twisted_cubic):
    from src.evolute import osculating_sphere

    centre, radius = osculating_sphere(twisted_cubic, 0.3)
    assert sphere_contact_order(twisted_cubic, 0.3, centre, radius) >= 3
    assert sphere_contact_order(twisted_cubic, 0.3, centre, 2.0 * radius) == 0


def test_helix_defect_vanishes_on_a_helix(helix, twisted_cubic):
    assert helix_defect(helix, 0.7).value == pytest.approx(0.0, abs=1e-10)
    assert abs(helix_defect(twisted_cubic, 0.7).value) > 1e-6
