import math

import numpy as np
import pytest

from src.errors import (
    BasepointMismatch,
    CompositionBasepointError,
    DegreeMismatch,
    DivisionByZeroSeries,
    DomainError,
)
from src.jet import Jet, Jet3, det3, jet_arith, jet_compose, jet_elementary


def test_variable_and_constant():
    t = Jet.variable(0.5, 4)
    assert list(t.coefficients) == [0.5, 1.0, 0.0, 0.0, 0.0]
    c = Jet.constant(3.0, 4, 0.5)
    assert c.value == 3.0
    assert c.degree == 4


def test_product_matches_polynomial_expansion():
    t = Jet.variable(0.0, 6)
    p = (1.0 + t) * (1.0 - t + t * t)
    # 1 + t^3
    assert np.allclose(p.coefficients, [1, 0, 0, 1, 0, 0, 0])


def test_division_recovers_geometric_series():
    t = Jet.variable(0.0, 8)
    q = 1.0 / (1.0 - t)
    assert np.allclose(q.coefficients, np.ones(9))


def test_division_by_vanishing_constant_term():
    t = Jet.identity(5)
    with pytest.raises(DivisionByZeroSeries):
        Jet.constant(1.0, 5) / t


def test_exp_sin_cos_taylor_coefficients():
    t = Jet.identity(10)
    factorials = np.array([math.factorial(k) for k in range(11)], dtype=float)
    assert np.allclose(t.exp().coefficients, 1.0 / factorials)
    sin = t.sin().coefficients
    cos = t.cos().coefficients
    assert sin[1] == pytest.approx(1.0)
    assert sin[3] == pytest.approx(-1.0 / 6.0)
    assert cos[2] == pytest.approx(-0.5)
    assert cos[4] == pytest.approx(1.0 / 24.0)


def test_pythagorean_identity_at_a_basepoint():
    x = Jet.variable(0.7, 12)
    one = x.sin() * x.sin() + x.cos() * x.cos()
    assert one.value == pytest.approx(1.0)
    assert np.allclose(one.coefficients[1:], 0.0, atol=1e-13)


def test_sqrt_squares_back():
    x = Jet.variable(2.0, 8)
    r = x.sqrt()
    assert np.allclose((r * r).coefficients, x.coefficients, atol=1e-14)


def test_sqrt_outside_domain():
    with pytest.raises(DomainError):
        Jet.variable(0.0, 4).sqrt()
    with pytest.raises(DomainError):
        Jet.constant(-1.0, 4).sqrt()


def test_pow_int_negative_exponent():
    x = Jet.variable(2.0, 5)
    assert np.allclose((x ** -2 * x ** 2).coefficients, [1, 0, 0, 0, 0, 0], atol=1e-14)
    with pytest.raises(DomainError):
        x.pow_int(0.5)


def test_degree_and_basepoint_mismatch():
    with pytest.raises(DegreeMismatch):
        Jet.variable(0.0, 3) + Jet.variable(0.0, 4)
    with pytest.raises(BasepointMismatch, match="basepoint 0.0 vs 1.0"):
        Jet.variable(0.0, 3) * Jet.variable(1.0, 3)
    with pytest.raises(DegreeMismatch, match="degree 3 vs 4"):
        Jet.variable(0.0, 3) - Jet.variable(0.0, 4)


def test_derivative_and_integral():
    t = Jet.identity(6)
    f = t.exp()
    assert np.allclose(f.derivative().coefficients, f.truncate(5).coefficients)
    g = f.integral()
    assert g.value == 0.0
    assert np.allclose(g.derivative().coefficients, f.truncate(5).coefficients)


def test_compose_exp_of_log_series():
    h = Jet.identity(8)
    # log(1 + h) = h - h^2/2 + h^3/3 - ...
    log1p = Jet([0.0] + [(-1.0) ** (k + 1) / k for k in range(1, 9)])
    result = h.exp().compose(log1p)
    assert np.allclose(result.coefficients, (1.0 + h).coefficients, atol=1e-12)


def test_compose_requires_zero_constant_term():
    with pytest.raises(CompositionBasepointError):
        Jet.identity(4).exp().compose(Jet.variable(0.3, 4))


def test_revert_inverts_composition():
    h = Jet.identity(9)
    p = h + 0.5 * h * h - 0.2 * h ** 3
    q = p.revert()
    assert np.allclose(p.compose(q).coefficients, h.coefficients, atol=1e-12)


def test_revert_needs_linear_term():
    h = Jet.identity(5)
    with pytest.raises(DivisionByZeroSeries):
        (h * h).revert()


def test_batched_coefficients_follow_each_basepoint(rng):
    t0 = rng.uniform(-1.0, 1.0, size=7)
    x = Jet.variable(t0, 6)
    f = (x * x).sin()
    for i, t in enumerate(t0):
        single = Jet.variable(float(t), 6)
        assert np.allclose(f[i].coefficients, (single * single).sin().coefficients)


def test_call_evaluates_truncated_polynomial():
    t = Jet.variable(1.0, 3)
    cube = t ** 3
    assert cube(0.1) == pytest.approx(1.1 ** 3)


def test_jet3_cross_and_triple_product():
    t = Jet.variable(0.0, 4)
    one = Jet.constant(1.0, 4)
    zero = Jet.constant(0.0, 4)
    gamma = Jet3(t, t * t, t ** 3)
    d1 = gamma.derivative()
    d2 = d1.derivative()
    d3 = d2.derivative()
    m = d3.degree
    triple = det3(d1.truncate(m), d2.truncate(m), d3)
    # twisted cubic: det(γ', γ'', γ''') = 12
    assert triple.value == pytest.approx(12.0)
    e1 = Jet3(one, zero, zero)
    e2 = Jet3(zero, one, zero)
    assert np.allclose(e1.cross(e2).value(), [0.0, 0.0, 1.0])


def test_named_operations():
    a = Jet.variable(0.0, 3)
    b = Jet.constant(2.0, 3)
    assert jet_arith("mul", a, b).coefficient(1) == 2.0
    with pytest.raises(ValueError):
        jet_arith("pow", a, b)
    assert jet_elementary("pow_int", a, 2).coefficient(2) == 1.0
    with pytest.raises(ValueError):
        jet_elementary("tan", a)
    assert jet_compose(Jet.identity(3).exp(), Jet.identity(3)).coefficient(3) == pytest.approx(1.0 / 6.0)


def test_non_finite_coefficients_are_rejected():
    with pytest.raises(DomainError):
        Jet([1.0, float("nan")])
