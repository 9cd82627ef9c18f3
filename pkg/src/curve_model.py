"""
Curve and deformation-family models.

Anything exposing ``jet3(t0, degree, s)``, ``t_range`` and ``label`` is
curve-like; the geometry modules only ever talk to that protocol.
"""
from __future__ import annotations

import json
import logging
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.errors import DomainError, SchemaError
from src.expression import (
    Binary,
    Node,
    Num,
    Var,
    evaluate,
    free_variables,
    parse_expression,
    polynomial_tree,
    pretty_print,
    to_jet,
)
from src.jet import Jet, Jet3

logger = logging.getLogger(__name__)

COMPONENTS = ("x", "y", "z")
SPEC_KEYS = {"kind", "x", "y", "z", "poly", "t_range", "s_box", "label"}

DEFAULT_MAX_DEGREE = 24
_DOMAIN_SLACK = 1e-9

Interval = Tuple[float, float]


class CurveBase:
    """Shared behaviour of every curve-like object."""

    label: str = ""
    t_range: Interval = (-1.0, 1.0)
    params: Tuple[float, float] = (0.0, 0.0)
    max_degree: int = DEFAULT_MAX_DEGREE

    def jet3(self, t0, degree: int, s=None) -> Jet3:  # pragma: no cover - abstract
        raise NotImplementedError

    def point(self, t) -> np.ndarray:
        """Position, shape (3, *shape(t))."""
        return self.jet3(t, 0).value()

    def moved(self, rotation, translation=(0.0, 0.0, 0.0)) -> "MovedCurve":
        return MovedCurve(self, rotation, translation)

    def check_degree(self, degree: int) -> None:
        if degree < 0 or degree > self.max_degree:
            raise DomainError(f"jet degree {degree} outside [0, {self.max_degree}]")


class SpaceCurve(CurveBase):
    """
    Three expression trees in t.

    A family slice is a SpaceCurve whose parameters are pinned to ``params``.
    """

    def __init__(self, components: Sequence[Node], t_range: Interval, label: str = "",
                 params: Tuple[float, float] = (0.0, 0.0), max_degree: int = DEFAULT_MAX_DEGREE):
        if len(components) != 3:
            raise SchemaError("a space curve needs exactly three components")
        self.components: Tuple[Node, Node, Node] = tuple(components)
        self.t_range = (float(t_range[0]), float(t_range[1]))
        self.label = label
        self.params = (float(params[0]), float(params[1]))
        self.max_degree = max_degree

    def jet3(self, t0, degree: int, s=None) -> Jet3:
        self.check_degree(degree)
        s = self.params if s is None else s
        return Jet3(*(to_jet(node, t0, degree, s) for node in self.components))

    def component_jet(self, component: str, t0, degree: int, s=None) -> Jet:
        self.check_degree(degree)
        node = self.components[COMPONENTS.index(component)]
        return to_jet(node, t0, degree, self.params if s is None else s)

    def point(self, t) -> np.ndarray:
        parts = [evaluate(node, t, *self.params) for node in self.components]
        return np.stack(np.broadcast_arrays(*(np.asarray(p, dtype=float) for p in parts)))

    def texts(self) -> List[str]:
        return [pretty_print(node) for node in self.components]

    def __repr__(self) -> str:
        return f"SpaceCurve({self.label!r}, {self.texts()}, t_range={self.t_range})"


class DeformationFamily(SpaceCurve):
    """Two-parameter family γ_s(t), s = (s1, s2) in a box."""

    def __init__(self, components: Sequence[Node], t_range: Interval,
                 s_box: Tuple[Interval, Interval], label: str = "",
                 max_degree: int = DEFAULT_MAX_DEGREE):
        super().__init__(components, t_range, label, (0.0, 0.0), max_degree)
        self.s_box = (
            (float(s_box[0][0]), float(s_box[0][1])),
            (float(s_box[1][0]), float(s_box[1][1])),
        )

    def slice(self, s: Tuple[float, float]) -> SpaceCurve:
        label = f"{self.label}@s=({s[0]:g},{s[1]:g})"
        return SpaceCurve(self.components, self.t_range, label, (s[0], s[1]), self.max_degree)

    def __repr__(self) -> str:
        return f"DeformationFamily({self.label!r}, {self.texts()}, s_box={self.s_box})"


class PolynomialCurve(CurveBase):
    """Curve given by coefficient lists of x, y, z in powers of t."""

    def __init__(self, a: Sequence[float], b: Sequence[float], c: Sequence[float],
                 t_range: Interval = (-1.0, 1.0), label: str = "",
                 max_degree: int = DEFAULT_MAX_DEGREE):
        n = max(len(a), len(b), len(c))
        self.coefficients = np.zeros((3, n))
        for row, coeffs in enumerate((a, b, c)):
            self.coefficients[row, : len(coeffs)] = np.asarray(coeffs, dtype=float)
        self.t_range = (float(t_range[0]), float(t_range[1]))
        self.label = label
        self.max_degree = max_degree

    @property
    def a(self) -> np.ndarray:
        return self.coefficients[0]

    @property
    def b(self) -> np.ndarray:
        return self.coefficients[1]

    @property
    def c(self) -> np.ndarray:
        return self.coefficients[2]

    def jet3(self, t0, degree: int, s=None) -> Jet3:
        self.check_degree(degree)
        t = Jet.variable(t0, degree)
        parts = []
        for row in self.coefficients:
            acc = Jet.constant(row[-1], degree, t0)
            for ck in row[-2::-1]:
                acc = acc * t + ck
            parts.append(acc)
        return Jet3(*parts)

    def point(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.stack([np.polynomial.polynomial.polyval(t, row) for row in self.coefficients])

    def as_space_curve(self) -> SpaceCurve:
        return SpaceCurve([polynomial_tree(row) for row in self.coefficients],
                          self.t_range, self.label)

    def __repr__(self) -> str:
        return f"PolynomialCurve({self.label!r}, degree={self.coefficients.shape[1] - 1})"


class MovedCurve(CurveBase):
    """R·γ(t) + v for a rotation R and translation v."""

    def __init__(self, curve: CurveBase, rotation, translation=(0.0, 0.0, 0.0)):
        self.curve = curve
        self.rotation = np.asarray(rotation, dtype=float)
        self.translation = np.asarray(translation, dtype=float)
        self.t_range = curve.t_range
        self.label = f"moved({curve.label})"
        self.max_degree = curve.max_degree

    def jet3(self, t0, degree: int, s=None) -> Jet3:
        return self.curve.jet3(t0, degree, s).rotate(self.rotation).translate(self.translation)


class TangentIndicatrix(CurveBase):
    """Unit tangent T(t) of a regular curve, viewed as a curve on the sphere."""

    def __init__(self, curve: CurveBase):
        self.curve = curve
        self.t_range = curve.t_range
        self.label = f"tangent({curve.label})"
        self.max_degree = curve.max_degree - 1

    def jet3(self, t0, degree: int, s=None) -> Jet3:
        velocity = self.curve.jet3(t0, degree + 1, s).derivative()
        return velocity / velocity.norm()


class EvoluteCurve(CurveBase):
    """Generalized evolute c = γ + μ1 N + μ2 B of a curve."""

    def __init__(self, curve: CurveBase):
        self.curve = curve
        self.t_range = curve.t_range
        self.label = f"evolute({curve.label})"
        self.max_degree = curve.max_degree - 4

    def jet3(self, t0, degree: int, s=None) -> Jet3:
        from src.evolute import evolute_jet

        curve = self.curve if s is None else _pinned(self.curve, s)
        return evolute_jet(curve, t0, degree)


def _pinned(curve: CurveBase, s) -> CurveBase:
    if isinstance(curve, DeformationFamily):
        return curve.slice(s)
    return curve


# ----------------------------------------------------------------------
# Component jets
# ----------------------------------------------------------------------

def eval_component_jet(family: SpaceCurve, component: str, t0, s: Tuple[float, float],
                       degree: int) -> Jet:
    """
    Jet of one component of a family (or curve) in t at t0 with parameters s.

    Raises:
        DomainError: t0 outside the family's t-range, degree above the maximum,
            or an elementary function evaluated outside its domain
    """
    if component not in COMPONENTS:
        raise SchemaError(f"component must be one of x, y, z, got {component!r}")
    lo, hi = family.t_range
    slack = _DOMAIN_SLACK * max(1.0, hi - lo)
    t_arr = np.asarray(t0, dtype=float)
    if np.any(t_arr < lo - slack) or np.any(t_arr > hi + slack):
        raise DomainError(f"t0 outside the parameter range [{lo}, {hi}]")
    return family.component_jet(component, t0, degree, s)


# ----------------------------------------------------------------------
# Curve documents
# ----------------------------------------------------------------------

def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _interval(value: Any, name: str) -> Interval:
    if not isinstance(value, list) or len(value) != 2 or not all(_is_number(v) for v in value):
        raise SchemaError(f"'{name}' must be a list of two finite numbers")
    lo, hi = float(value[0]), float(value[1])
    if not lo < hi:
        raise SchemaError(f"'{name}' must satisfy lo < hi, got [{lo}, {hi}]")
    return lo, hi


def _poly_components(poly: Any) -> List[Node]:
    if not isinstance(poly, list) or len(poly) != 3:
        raise SchemaError("'poly' must be a list of three coefficient lists")
    trees = []
    for i, row in enumerate(poly):
        if not isinstance(row, list) or not row:
            raise SchemaError(f"'poly[{i}]' must be a non-empty list")
        coeffs: List[Union[float, Node]] = []
        for j, entry in enumerate(row):
            if _is_number(entry):
                coeffs.append(float(entry))
            elif isinstance(entry, str):
                coeffs.append(parse_expression(entry))
            else:
                raise SchemaError(f"'poly[{i}][{j}]' must be a number or an expression string")
        trees.append(polynomial_tree(coeffs))
    return trees


def load_spec(document: Union[str, bytes, Dict[str, Any]],
              max_degree: int = DEFAULT_MAX_DEGREE) -> SpaceCurve:
    """
    Build a SpaceCurve or DeformationFamily from a JSON spec.

    Args:
        document: JSON text or an already decoded mapping
        max_degree: largest jet degree the model will hand out

    Returns:
        SpaceCurve for kind "curve", DeformationFamily for kind "family"

    Raises:
        SchemaError: malformed document, missing/unknown keys or wrong types
        ParseError: a component expression does not parse
    """
    if isinstance(document, (str, bytes)):
        if isinstance(document, bytes):
            try:
                document = document.decode("utf-8")
            except UnicodeDecodeError as e:
                raise SchemaError(f"spec is not valid UTF-8: {e}") from e
        if not document.strip():
            raise SchemaError("spec document is empty")
        try:
            data = json.loads(document)
        except json.JSONDecodeError as e:
            raise SchemaError(f"spec is not valid JSON: {e}") from e
    else:
        data = document

    if not isinstance(data, dict):
        raise SchemaError("spec must be a JSON object")

    unknown = sorted(set(data) - SPEC_KEYS)
    if unknown:
        raise SchemaError(f"unknown key(s): {', '.join(unknown)}")

    kind = data.get("kind")
    if kind not in ("curve", "family"):
        raise SchemaError("'kind' must be \"curve\" or \"family\"")

    if "t_range" not in data:
        raise SchemaError("missing field 't_range'")
    t_range = _interval(data["t_range"], "t_range")

    label = data.get("label", "")
    if not isinstance(label, str):
        raise SchemaError("'label' must be a string")

    has_text = [c for c in COMPONENTS if c in data]
    if "poly" in data:
        if has_text:
            raise SchemaError("give either 'poly' or 'x'/'y'/'z', not both")
        components = _poly_components(data["poly"])
    else:
        for name in COMPONENTS:
            if name not in data:
                raise SchemaError(f"missing field '{name}'")
            if not isinstance(data[name], str):
                raise SchemaError(f"'{name}' must be an expression string")
        components = [parse_expression(data[name]) for name in COMPONENTS]

    if kind == "curve":
        if "s_box" in data:
            raise SchemaError("'s_box' is only allowed for families")
        used = set().union(*(free_variables(node) for node in components))
        if used & {"s1", "s2"}:
            raise SchemaError("curve components may not use the parameters s1, s2")
        logger.debug(f"Loaded curve '{label}' on {t_range}")
        return SpaceCurve(components, t_range, label, max_degree=max_degree)

    if "s_box" not in data:
        raise SchemaError("missing field 's_box'")
    box = data["s_box"]
    if not isinstance(box, list) or len(box) != 2:
        raise SchemaError("'s_box' must be [[lo1, hi1], [lo2, hi2]]")
    s_box = (_interval(box[0], "s_box[0]"), _interval(box[1], "s_box[1]"))
    logger.debug(f"Loaded family '{label}' on {t_range} x {s_box}")
    return DeformationFamily(components, t_range, s_box, label, max_degree=max_degree)


def load_spec_file(path: str, max_degree: int = DEFAULT_MAX_DEGREE) -> SpaceCurve:
    try:
        with open(path, "rb") as f:
            raw = f.read()
    except FileNotFoundError as e:
        raise SchemaError(f"input file not found: {path}") from e
    return load_spec(raw, max_degree=max_degree)


# ----------------------------------------------------------------------
# Normal forms used throughout the local analysis
# ----------------------------------------------------------------------

def normal_form_curve(b2: float, b3: float = 0.0, b4: float = 0.0, b5: float = 0.0,
                      c3: float = 0.0, c4: float = 0.0, c5: float = 0.0,
                      a3: Optional[float] = None, a4: Optional[float] = None,
                      a5: float = 0.0, t_range: Interval = (-0.25, 0.25),
                      label: str = "normal form") -> PolynomialCurve:
    """
    (t + a3 t^3 + a4 t^4 + a5 t^5, b2 t^2 + ... + b5 t^5, c3 t^3 + c4 t^4 + c5 t^5).

    Omitted a3, a4 are chosen so that |γ'| = 1 + O(t^3), i.e. the curve is
    unit speed through the orders the local evolute formulas depend on.
    """
    if a3 is None:
        a3 = -2.0 * b2 * b2 / 3.0
    if a4 is None:
        a4 = -1.5 * b2 * b3
    return PolynomialCurve(
        [0.0, 1.0, 0.0, a3, a4, a5],
        [0.0, 0.0, b2, b3, b4, b5],
        [0.0, 0.0, 0.0, c3, c4, c5],
        t_range,
        label,
    )


def cusp_family(a: Sequence[float], b: Sequence[float], c: Sequence[float],
                t_range: Interval = (-0.5, 0.5),
                s_box: Tuple[Interval, Interval] = ((-0.2, 0.2), (-0.2, 0.2)),
                label: str = "cusp family") -> DeformationFamily:
    """
    (a2 t^2 + a3 t^3 + ..., s1 t + b2 t^2 + ..., s2 t + c2 t^2 + ...).

    ``a``, ``b``, ``c`` list the coefficients from t^2 upwards.
    """
    x = polynomial_tree([0.0, 0.0] + [float(v) for v in a])
    y = _plus_parameter(polynomial_tree([0.0, 0.0] + [float(v) for v in b]), "s1")
    z = _plus_parameter(polynomial_tree([0.0, 0.0] + [float(v) for v in c]), "s2")
    return DeformationFamily([x, y, z], t_range, s_box, label)


def _plus_parameter(tree: Node, name: str) -> Node:
    linear = Binary("*", Var(name), Var("t"))
    if tree == Num(0.0):
        return linear
    return Binary("+", linear, tree)
