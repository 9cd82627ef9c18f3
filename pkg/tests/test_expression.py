import numpy as np
import pytest

from src.errors import ParseError, UnknownIdentifier
from src.expression import (
    Binary,
    Num,
    Power,
    Unary,
    Var,
    evaluate,
    free_variables,
    parse_expression,
    polynomial_tree,
    pretty_print,
    to_jet,
)


def test_precedence_and_associativity():
    tree = parse_expression("1 - t - t^2 * 3")
    assert tree == Binary("-", Binary("-", Num(1.0), Var("t")), Binary("*", Power(Var("t"), 2), Num(3.0)))


def test_unary_minus_binds_looser_than_power():
    assert parse_expression("-t^2") == Unary("neg", Power(Var("t"), 2))


def test_negative_integer_exponent():
    assert parse_expression("t^-3") == Power(Var("t"), -3)


def test_functions_and_parameters():
    tree = parse_expression("s1*sin(t) + exp(s2)")
    assert free_variables(tree) == {"t", "s1", "s2"}


@pytest.mark.parametrize(
    "text",
    ["t^2 + 3*t - 1", "-(t + 1)^3", "sin(t)/(1 + t^2)", "2 - (3 - t)", "s1*t + sqrt(1 + t^2)", "t^-2"],
)
def test_pretty_print_reparses_to_the_same_tree(text):
    tree = parse_expression(text)
    assert parse_expression(pretty_print(tree)) == tree


def test_unknown_identifier_reports_offset():
    with pytest.raises(UnknownIdentifier) as exc:
        parse_expression("t + tan(t)")
    assert exc.value.offset == 4
    assert exc.value.name == "tan"


def test_unbalanced_parenthesis():
    with pytest.raises(ParseError) as exc:
        parse_expression("(t + 1")
    assert exc.value.offset == 6
    assert "')'" in exc.value.expected


def test_fractional_exponent_is_rejected():
    with pytest.raises(ParseError):
        parse_expression("t^0.5")


def test_non_ascii_is_rejected():
    with pytest.raises(ParseError):
        parse_expression("t + π")


def test_evaluate_broadcasts_over_arrays():
    tree = parse_expression("s1*t + t^3")
    t = np.linspace(-1.0, 1.0, 5)
    assert np.allclose(evaluate(tree, t, 2.0), 2.0 * t + t ** 3)


def test_to_jet_matches_derivatives():
    tree = parse_expression("exp(t)*cos(t)")
    jet = to_jet(tree, 0.3, 4)
    h = 1e-4
    centred = (evaluate(tree, 0.3 + h) - evaluate(tree, 0.3 - h)) / (2 * h)
    assert jet.value == pytest.approx(np.exp(0.3) * np.cos(0.3))
    assert jet.coefficient(1) == pytest.approx(centred, rel=1e-7)


def test_to_jet_with_batched_parameters():
    tree = parse_expression("s1*t + s2*t^2")
    s1 = np.array([1.0, 2.0, 3.0])
    jet = to_jet(tree, 0.0, 3, (s1, 0.5))
    assert jet.batch_shape == (3,)
    assert np.allclose(jet.coefficient(1), s1)
    assert np.allclose(jet.coefficient(2), 0.5)


def test_polynomial_tree_skips_zeros_and_keeps_signs():
    tree = polynomial_tree([0.0, 1.0, 0.0, -2.0])
    assert pretty_print(tree) == "t - 2.0 * t^3"
    assert evaluate(tree, 0.5) == pytest.approx(0.5 - 2.0 * 0.125)


def _random_expression(rng, depth: int) -> str:
    if depth == 0:
        return "t" if rng.random() < 0.6 else f"({rng.uniform(-2.0, 2.0):.3f})"
    a = _random_expression(rng, depth - 1)
    b = _random_expression(rng, depth - 1)
    return [
        f"sin({a})",
        f"cos({a})",
        f"exp(0.3*({a}))",
        f"sqrt(2 + ({a})^2)",
        f"({a}) + ({b})",
        f"({a}) - ({b})",
        f"({a}) * ({b})",
        f"({a}) / (1.5 + cos({b}))",
    ][rng.integers(8)]


def test_random_expression_jets_match_finite_differences(rng):
    h = 1e-3
    for _ in range(50):
        text = _random_expression(rng, 3)
        tree = parse_expression(text)
        t0 = float(rng.uniform(-1.0, 1.0))
        f = np.asarray(evaluate(tree, t0 + h * np.arange(-2.0, 3.0)), dtype=float) * np.ones(5)
        first = (8.0 * (f[3] - f[1]) - (f[4] - f[0])) / (12.0 * h)
        second = (16.0 * (f[3] + f[1]) - (f[4] + f[0]) - 30.0 * f[2]) / (12.0 * h * h)
        jet = to_jet(tree, t0, 4)
        assert jet.coefficient(0) == pytest.approx(f[2], rel=1e-12, abs=1e-12), text
        assert jet.coefficient(1) == pytest.approx(first, rel=1e-6, abs=1e-6), text
        assert 2.0 * jet.coefficient(2) == pytest.approx(second, rel=1e-4, abs=1e-4), text
