"""
Truncated Taylor series (jets) in one variable.

A jet stores c_0..c_K with c_j = f^(j)(t0)/j!.  Coefficients are numpy
arrays of shape (K+1, *batch) so that a whole grid of basepoints (or of
parameter values) is pushed through the recurrences in one pass; every
invariant holds per batch element.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np

from src.errors import (
    BasepointMismatch,
    CompositionBasepointError,
    DegreeMismatch,
    DivisionByZeroSeries,
    DomainError,
)

logger = logging.getLogger(__name__)

Scalar = Union[float, int, np.floating, np.ndarray]

DEFAULT_DIV_EPS = 1e-12
_settings: Dict[str, float] = {"div_eps": DEFAULT_DIV_EPS}


def set_division_epsilon(eps: float) -> None:
    """Set the relative threshold below which a divisor's constant term counts as zero."""
    if not eps > 0:
        raise ValueError(f"division epsilon must be positive, got {eps}")
    _settings["div_eps"] = float(eps)


def division_epsilon() -> float:
    return _settings["div_eps"]


def _same_basepoint(p: Scalar, q: Scalar) -> bool:
    if p is q:
        return True
    p_arr, q_arr = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    try:
        np.broadcast_shapes(p_arr.shape, q_arr.shape)
    except ValueError:
        return False
    return bool(np.all(p_arr == q_arr))


def _expand(c: np.ndarray, batch: Tuple[int, ...]) -> np.ndarray:
    """Reshape (K+1, *b) to (K+1, 1.., *b) so that it broadcasts against batch."""
    pad = len(batch) - (c.ndim - 1)
    if pad <= 0:
        return c
    return c.reshape((c.shape[0],) + (1,) * pad + c.shape[1:])


class Jet:
    """Immutable truncated power series around a basepoint."""

    __slots__ = ("_c", "_basepoint")

    def __init__(self, coefficients, basepoint: Scalar = 0.0):
        c = np.array(coefficients, dtype=float)
        if c.ndim == 0:
            raise ValueError("a jet needs at least one coefficient")
        if not np.all(np.isfinite(c)):
            raise DomainError("jet coefficients must be finite")
        c.setflags(write=False)
        self._c = c
        bp = np.asarray(basepoint, dtype=float)
        self._basepoint = float(bp) if bp.ndim == 0 else bp

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------

    @classmethod
    def _make(cls, c: np.ndarray, basepoint: Scalar) -> "Jet":
        return cls(c, basepoint)

    @classmethod
    def constant(cls, value: Scalar, degree: int, basepoint: Scalar = 0.0) -> "Jet":
        """Constant jet; the batch shape covers both value and basepoint."""
        value = np.asarray(value, dtype=float)
        batch = np.broadcast_shapes(value.shape, np.shape(basepoint))
        c = np.zeros((degree + 1,) + batch)
        c[0] = value
        return cls(c, basepoint)

    @classmethod
    def variable(cls, basepoint: Scalar, degree: int) -> "Jet":
        """The jet of the independent variable t itself at t0."""
        bp = np.asarray(basepoint, dtype=float)
        c = np.zeros((degree + 1,) + bp.shape)
        c[0] = bp
        if degree >= 1:
            c[1] = 1.0
        return cls(c, basepoint)

    @classmethod
    def identity(cls, degree: int, basepoint: Scalar = 0.0) -> "Jet":
        """The local coordinate h = t - t0 (zero constant term)."""
        c = np.zeros((degree + 1,) + np.shape(basepoint))
        if degree >= 1:
            c[1] = 1.0
        return cls(c, basepoint)

    # ------------------------------------------------------------------
    # Accessors
    # ------------------------------------------------------------------

    @property
    def coefficients(self) -> np.ndarray:
        return self._c

    @property
    def degree(self) -> int:
        return self._c.shape[0] - 1

    @property
    def basepoint(self) -> Scalar:
        return self._basepoint

    @property
    def batch_shape(self) -> Tuple[int, ...]:
        return self._c.shape[1:]

    @property
    def value(self) -> Scalar:
        c0 = self._c[0]
        return float(c0) if c0.ndim == 0 else c0

    def coefficient(self, k: int) -> Scalar:
        ck = self._c[k]
        return float(ck) if ck.ndim == 0 else ck

    def derivatives(self) -> np.ndarray:
        """f^(j)(t0) for j = 0..K."""
        fact = np.array([math.factorial(j) for j in range(self.degree + 1)], dtype=float)
        return self._c * fact.reshape((-1,) + (1,) * len(self.batch_shape))

    def scale(self) -> np.ndarray:
        """Largest absolute coefficient, per batch element."""
        return np.max(np.abs(self._c), axis=0)

    def __call__(self, h: Scalar) -> Scalar:
        """Evaluate the truncated polynomial at offset h from the basepoint."""
        acc = self._c[-1]
        for ck in self._c[-2::-1]:
            acc = acc * h + ck
        return acc

    def __getitem__(self, index) -> "Jet":
        """Select batch elements."""
        if not isinstance(index, tuple):
            index = (index,)
        bp = self._basepoint
        if isinstance(bp, np.ndarray) and bp.shape == self.batch_shape:
            bp = bp[index]
        return Jet._make(self._c[(slice(None),) + index], bp)

    def __repr__(self) -> str:
        if not self.batch_shape:
            coeffs = ", ".join(f"{x:.6g}" for x in self._c)
            return f"Jet([{coeffs}], basepoint={self._basepoint:.6g})"
        return f"Jet(degree={self.degree}, batch={self.batch_shape})"

    # ------------------------------------------------------------------
    # Structural operations
    # ------------------------------------------------------------------

    def truncate(self, k: int) -> "Jet":
        if k > self.degree or k < 0:
            raise DegreeMismatch(f"cannot truncate degree {self.degree} jet to {k}")
        return Jet._make(self._c[: k + 1], self._basepoint)

    def derivative(self) -> "Jet":
        """d/dt, degree drops by one."""
        if self.degree == 0:
            raise DegreeMismatch("derivative of a degree-0 jet")
        k = np.arange(1, self.degree + 1, dtype=float)
        k = k.reshape((-1,) + (1,) * len(self.batch_shape))
        return Jet._make(self._c[1:] * k, self._basepoint)

    def integral(self) -> "Jet":
        """Antiderivative with zero constant term, truncated to the same degree."""
        c = np.zeros_like(self._c)
        k = np.arange(1, self.degree + 1, dtype=float)
        k = k.reshape((-1,) + (1,) * len(self.batch_shape))
        c[1:] = self._c[:-1] / k
        return Jet._make(c, self._basepoint)

    def shift(self) -> "Jet":
        """(f - f(t0)) / (t - t0), degree drops by one."""
        if self.degree == 0:
            raise DegreeMismatch("shift of a degree-0 jet")
        return Jet._make(self._c[1:], self._basepoint)

    # ------------------------------------------------------------------
    # Arithmetic
    # ------------------------------------------------------------------

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.degree != self.degree:
                raise DegreeMismatch(f"degree {self.degree} vs {other.degree}")
            if not _same_basepoint(self._basepoint, other._basepoint):
                raise BasepointMismatch(f"basepoint {self._basepoint} vs {other._basepoint}")
            return other
        return Jet.constant(other, self.degree, self._basepoint)

    def _aligned(self, other) -> Tuple[np.ndarray, np.ndarray, Scalar]:
        other = self._coerce(other)
        batch = np.broadcast_shapes(self.batch_shape, other.batch_shape)
        a = np.broadcast_to(_expand(self._c, batch), (self.degree + 1,) + batch)
        b = np.broadcast_to(_expand(other._c, batch), (self.degree + 1,) + batch)
        bp = self._basepoint
        if np.ndim(other._basepoint) > np.ndim(bp):
            bp = other._basepoint
        return a, b, bp

    def __add__(self, other) -> "Jet":
        a, b, bp = self._aligned(other)
        return Jet._make(a + b, bp)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet":
        a, b, bp = self._aligned(other)
        return Jet._make(a - b, bp)

    def __rsub__(self, other) -> "Jet":
        a, b, bp = self._aligned(other)
        return Jet._make(b - a, bp)

    def __neg__(self) -> "Jet":
        return Jet._make(-self._c, self._basepoint)

    def __pos__(self) -> "Jet":
        return self

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet._make(_expand(self._c, np.shape(other)) * np.asarray(other, dtype=float),
                             self._basepoint)
        a, b, bp = self._aligned(other)
        return Jet._make(_cauchy(a, b), bp)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet":
        a, b, bp = self._aligned(other)
        return Jet._make(_divide(a, b), bp)

    def __rtruediv__(self, other) -> "Jet":
        a, b, bp = self._aligned(other)
        return Jet._make(_divide(b, a), bp)

    def __pow__(self, n: int) -> "Jet":
        return self.pow_int(n)

    def pow_int(self, n: int) -> "Jet":
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
            raise DomainError(f"only integer exponents are supported, got {n!r}")
        n = int(n)
        if n < 0:
            return 1.0 / self.pow_int(-n)
        result = Jet.constant(1.0, self.degree, self._basepoint)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # ------------------------------------------------------------------
    # Elementary functions
    # ------------------------------------------------------------------

    def exp(self) -> "Jet":
        a = self._c
        e = np.empty_like(a)
        e[0] = np.exp(a[0])
        for k in range(1, self.degree + 1):
            j = _weights(k, a.ndim)
            e[k] = np.sum(j * a[1 : k + 1] * e[k - 1 :: -1][:k], axis=0) / k
        return Jet._make(e, self._basepoint)

    def _sincos(self) -> Tuple[np.ndarray, np.ndarray]:
        a = self._c
        s = np.empty_like(a)
        c = np.empty_like(a)
        s[0] = np.sin(a[0])
        c[0] = np.cos(a[0])
        for k in range(1, self.degree + 1):
            j = _weights(k, a.ndim)
            ja = j * a[1 : k + 1]
            s[k] = np.sum(ja * c[k - 1 :: -1][:k], axis=0) / k
            c[k] = -np.sum(ja * s[k - 1 :: -1][:k], axis=0) / k
        return s, c

    def sin(self) -> "Jet":
        return Jet._make(self._sincos()[0], self._basepoint)

    def cos(self) -> "Jet":
        return Jet._make(self._sincos()[1], self._basepoint)

    def sqrt(self) -> "Jet":
        a = self._c
        if np.any(a[0] <= 0):
            worst = float(np.min(a[0]))
            raise DomainError(f"sqrt of a series with non-positive constant term {worst:.6g}")
        r = np.empty_like(a)
        r[0] = np.sqrt(a[0])
        for k in range(1, self.degree + 1):
            acc = np.sum(r[1:k] * r[k - 1 : 0 : -1], axis=0)
            r[k] = (a[k] - acc) / (2.0 * r[0])
        return Jet._make(r, self._basepoint)

    # ------------------------------------------------------------------
    # Composition and reversion
    # ------------------------------------------------------------------

    def compose(self, inner: "Jet") -> "Jet":
        """self ∘ inner, where inner is a series with vanishing constant term."""
        if inner.degree != self.degree:
            raise DegreeMismatch(f"degree {self.degree} vs {inner.degree}")
        c0 = inner._c[0]
        tol = 1e-12 * np.maximum(1.0, inner.scale())
        if np.any(np.abs(c0) > tol):
            raise CompositionBasepointError(
                f"inner series has constant term {float(np.max(np.abs(c0))):.3e}"
            )
        h = inner._c.copy()
        h[0] = 0.0
        h_jet = Jet._make(h, inner._basepoint)
        batch = np.broadcast_shapes(self.batch_shape, inner.batch_shape)
        outer = np.broadcast_to(_expand(self._c, batch), (self.degree + 1,) + batch)
        acc = Jet.constant(outer[-1], self.degree, inner._basepoint)
        for ck in outer[-2::-1]:
            acc = acc * h_jet + ck
        return acc

    def revert(self) -> "Jet":
        """Compositional inverse q of p = self (p(0)=0, p'(0)≠0): p(q(σ)) = σ."""
        p = self._c
        tol = 1e-12 * np.maximum(1.0, self.scale())
        if np.any(np.abs(p[0]) > tol):
            raise CompositionBasepointError("series to revert must vanish at its basepoint")
        if np.any(np.abs(p[1]) <= division_epsilon() * self.scale()):
            raise DivisionByZeroSeries("series to revert has vanishing linear term")
        zero_bp = 0.0
        sigma = Jet.identity(self.degree, zero_bp)
        nonlinear = p.copy()
        nonlinear[0] = 0.0
        nonlinear[1] = 0.0
        nl = Jet._make(nonlinear, zero_bp)
        q = sigma * (1.0 / p[1])
        for _ in range(self.degree):
            q = (sigma - nl.compose(q)) * (1.0 / p[1])
        return q


def _weights(k: int, ndim: int) -> np.ndarray:
    return np.arange(1, k + 1, dtype=float).reshape((-1,) + (1,) * (ndim - 1))


def _cauchy(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    c = np.empty(a.shape)
    for k in range(a.shape[0]):
        c[k] = np.sum(a[: k + 1] * b[k::-1], axis=0)
    return c


def _divide(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    scale = np.max(np.abs(b), axis=0)
    b0 = b[0]
    bad = np.abs(b0) <= division_epsilon() * scale
    if np.any(bad):
        raise DivisionByZeroSeries(
            f"divisor constant term {float(np.min(np.abs(b0))):.3e} is numerically zero"
        )
    q = np.empty(a.shape)
    for k in range(a.shape[0]):
        acc = np.sum(q[:k] * b[k:0:-1], axis=0)
        q[k] = (a[k] - acc) / b0
    return q


# ----------------------------------------------------------------------
# Three-component jets
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Jet3:
    """A space-curve valued jet (x, y, z)."""

    x: Jet
    y: Jet
    z: Jet

    @property
    def components(self) -> Tuple[Jet, Jet, Jet]:
        return (self.x, self.y, self.z)

    @property
    def degree(self) -> int:
        return self.x.degree

    @property
    def basepoint(self) -> Scalar:
        return self.x.basepoint

    def map(self, fn: Callable[[Jet], Jet]) -> "Jet3":
        return Jet3(fn(self.x), fn(self.y), fn(self.z))

    def value(self) -> np.ndarray:
        """Point value, shape (3, *batch)."""
        return self.coefficient(0)

    def coefficient(self, k: int) -> np.ndarray:
        parts = np.broadcast_arrays(*(np.asarray(c.coefficients[k]) for c in self.components))
        return np.stack(parts)

    def derivative(self) -> "Jet3":
        return self.map(Jet.derivative)

    def truncate(self, k: int) -> "Jet3":
        return self.map(lambda c: c.truncate(k))

    def compose(self, inner: Jet) -> "Jet3":
        return self.map(lambda c: c.compose(inner))

    def __getitem__(self, index) -> "Jet3":
        return self.map(lambda c: c[index])

    def __add__(self, other: "Jet3") -> "Jet3":
        return Jet3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Jet3") -> "Jet3":
        return Jet3(self.x - other.x, self.y - other.y, self.z - other.z)

    def __neg__(self) -> "Jet3":
        return self.map(Jet.__neg__)

    def __mul__(self, factor) -> "Jet3":
        """Scale by a scalar jet or a number."""
        return Jet3(self.x * factor, self.y * factor, self.z * factor)

    __rmul__ = __mul__

    def __truediv__(self, factor) -> "Jet3":
        if isinstance(factor, Jet):
            inv = 1.0 / factor
            return self * inv
        return self * (1.0 / np.asarray(factor, dtype=float))

    def translate(self, offset) -> "Jet3":
        return Jet3(self.x + offset[0], self.y + offset[1], self.z + offset[2])

    def rotate(self, matrix) -> "Jet3":
        """Apply a constant 3x3 matrix to the components."""
        m = np.asarray(matrix, dtype=float)
        rows = []
        for i in range(3):
            rows.append(self.x * m[i, 0] + self.y * m[i, 1] + self.z * m[i, 2])
        return Jet3(*rows)

    def dot(self, other: "Jet3") -> Jet:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def dot_vector(self, v) -> Jet:
        return self.x * float(v[0]) + self.y * float(v[1]) + self.z * float(v[2])

    def cross(self, other: "Jet3") -> "Jet3":
        return Jet3(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )

    def norm_squared(self) -> Jet:
        return self.dot(self)

    def norm(self) -> Jet:
        return self.norm_squared().sqrt()


def det3(a: Jet3, b: Jet3, c: Jet3) -> Jet:
    """Scalar triple product det(a, b, c) = <a × b, c>."""
    return a.cross(b).dot(c)


# ----------------------------------------------------------------------
# Named operations
# ----------------------------------------------------------------------

_ARITH: Dict[str, Callable[[Jet, Jet], Jet]] = {
    "add": Jet.__add__,
    "sub": Jet.__sub__,
    "mul": Jet.__mul__,
    "div": Jet.__truediv__,
}

_ELEMENTARY: Dict[str, Callable[[Jet], Jet]] = {
    "sin": Jet.sin,
    "cos": Jet.cos,
    "exp": Jet.exp,
    "sqrt": Jet.sqrt,
    "neg": Jet.__neg__,
}


def jet_arith(op: str, a: Jet, b: Jet) -> Jet:
    """
    Binary jet arithmetic.

    Args:
        op: one of add, sub, mul, div
        a, b: jets of equal degree and basepoint

    Returns:
        truncated series of the corresponding operation
    """
    try:
        fn = _ARITH[op]
    except KeyError:
        raise ValueError(f"unknown jet operation '{op}'") from None
    if not isinstance(b, Jet) or not isinstance(a, Jet):
        raise TypeError("jet_arith expects two jets")
    a._coerce(b)
    return fn(a, b)


def jet_elementary(fn: str, a: Jet, exponent: Optional[int] = None) -> Jet:
    """Apply sin, cos, exp, sqrt, neg or pow_int (with exponent) to a jet."""
    if fn == "pow_int":
        if exponent is None:
            raise ValueError("pow_int needs an exponent")
        return a.pow_int(exponent)
    try:
        return _ELEMENTARY[fn](a)
    except KeyError:
        raise ValueError(f"unknown elementary function '{fn}'") from None


def jet_compose(outer: Jet, inner: Jet) -> Jet:
    return outer.compose(inner)
