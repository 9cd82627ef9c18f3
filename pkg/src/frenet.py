"""
Frenet apparatus, contact functions and singularity classification.

Curves are taken at arbitrary speed.  Invariants are first formed as jets in
t, then carried to arc length by composing with the reverted arc-length
series, so κ', τ', κ'' are exact to truncation order.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.curve_model import CurveBase, TangentIndicatrix
from src.errors import (
    InconsistentDegrees,
    InflectionError,
    NonUnitDirection,
    RegularityError,
)
from src.jet import Jet, Jet3, det3

logger = logging.getLogger(__name__)

DEFAULT_DEGREE = 12
DEFAULT_TOL = 1e-8
UNIT_TOL = 1e-10


def _worst(magnitude, t0) -> Tuple[float, Optional[float]]:
    """Smallest magnitude of a batch and the basepoint where it happens."""
    mag = np.asarray(magnitude)
    if mag.ndim == 0:
        return float(mag), float(np.asarray(t0)) if np.ndim(t0) == 0 else None
    i = np.unravel_index(np.argmin(mag), mag.shape)
    t = np.broadcast_to(np.asarray(t0, dtype=float), mag.shape)[i]
    return float(mag[i]), float(t)


@dataclass(frozen=True)
class LocalJets:
    """t-jets of γ and its first derived quantities at one (or a batch of) basepoint(s)."""

    gamma: Jet3
    d1: Jet3
    d2: Jet3
    d3: Jet3
    speed: Jet
    cross: Jet3
    cross_sq: Jet
    kappa: Jet
    tau: Jet

    @property
    def degree(self) -> int:
        return self.kappa.degree

    def arc_length(self) -> Jet:
        """h(σ) = t(σ) − t0 as a jet in arc length σ."""
        return self.speed.integral().revert()

    def frame(self) -> Tuple[Jet3, Jet3, Jet3]:
        tangent = self.d1 / self.speed
        binormal = self.cross / self.cross_sq.sqrt()
        normal = binormal.cross(tangent)
        return tangent, normal, binormal


def local_jets(curve: CurveBase, t0, degree: int = DEFAULT_DEGREE, s=None,
               tol: float = DEFAULT_TOL, check: bool = True) -> LocalJets:
    """
    κ and τ as t-jets of the given degree; γ itself is expanded three orders higher.

    Raises:
        RegularityError: |γ'(t0)| <= tol
        InflectionError: |γ'×γ''(t0)| <= tol
    """
    gamma = curve.jet3(t0, degree + 3, s)
    d1 = gamma.derivative()
    d2 = d1.derivative()
    d3 = d2.derivative()
    d1 = d1.truncate(degree)
    d2 = d2.truncate(degree)
    speed_sq = d1.norm_squared()
    if check:
        speed0 = np.sqrt(np.asarray(speed_sq.value))
        if np.any(speed0 <= tol):
            raise RegularityError(*_worst(speed0, t0))
    speed = speed_sq.sqrt()
    cross = d1.cross(d2)
    cross_sq = cross.norm_squared()
    if check:
        cross0 = np.sqrt(np.asarray(cross_sq.value))
        if np.any(cross0 <= tol):
            raise InflectionError(*_worst(cross0, t0))
    kappa = cross_sq.sqrt() / (speed_sq * speed)
    tau = cross.dot(d3) / cross_sq
    return LocalJets(gamma.truncate(degree), d1, d2, d3, speed, cross, cross_sq, kappa, tau)


@dataclass(frozen=True)
class FrenetData:
    """Frenet frame at t0 with κ and τ as jets in arc length."""

    T: np.ndarray
    N: np.ndarray
    B: np.ndarray
    kappa_jet: Jet
    tau_jet: Jet
    speed_jet: Jet
    basepoint: float

    @property
    def kappa(self) -> float:
        return self.kappa_jet.value

    @property
    def tau(self) -> float:
        return self.tau_jet.value

    def kappa_derivatives(self) -> np.ndarray:
        return self.kappa_jet.derivatives()

    def tau_derivatives(self) -> np.ndarray:
        return self.tau_jet.derivatives()


def frenet_apparatus(curve: CurveBase, t0: float, degree: int = DEFAULT_DEGREE, s=None,
                     tol: float = DEFAULT_TOL) -> FrenetData:
    """
    Frenet frame and arc-length jets of κ, τ at t0.

    Args:
        curve: any curve-like object
        t0: parameter value
        degree: jet degree of κ and τ
        tol: absolute threshold for |γ'| and |γ'×γ''|

    Returns:
        FrenetData

    Raises:
        RegularityError, InflectionError
    """
    lj = local_jets(curve, t0, degree, s, tol)
    h = lj.arc_length()
    kappa_s = lj.kappa.compose(h)
    tau_s = lj.tau.compose(h)
    d1 = lj.d1.value()
    cross = lj.cross.value()
    T = d1 / np.linalg.norm(d1, axis=0)
    B = cross / np.linalg.norm(cross, axis=0)
    N = np.cross(B, T, axis=0)
    return FrenetData(T, N, B, kappa_s, tau_s, lj.speed, float(t0))


def arc_length_reparametrization(curve: CurveBase, t0: float, degree: int = DEFAULT_DEGREE,
                                 s=None, tol: float = DEFAULT_TOL) -> Jet:
    """Jet of t(σ) − t0 in the arc length σ measured from t0."""
    gamma = curve.jet3(t0, degree + 1, s)
    velocity = gamma.derivative()
    speed_sq = velocity.norm_squared()
    speed0 = float(np.sqrt(speed_sq.value))
    if speed0 <= tol:
        raise RegularityError(speed0, float(t0))
    return speed_sq.sqrt().integral().revert()


# ----------------------------------------------------------------------
# Contact functions
# ----------------------------------------------------------------------

def distance_squared_jet(curve: CurveBase, t0: float, center, degree: int = DEFAULT_DEGREE,
                         s=None) -> Jet:
    """Jet of ½⟨γ(t) − a, γ(t) − a⟩ at t0."""
    center = np.asarray(center, dtype=float)
    diff = curve.jet3(t0, degree, s).translate(-center)
    return diff.norm_squared() * 0.5


def height_jet(curve: CurveBase, t0: float, direction, degree: int = DEFAULT_DEGREE,
               s=None) -> Jet:
    """Jet of ⟨γ(t), v⟩ for a unit vector v."""
    v = np.asarray(direction, dtype=float)
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > UNIT_TOL:
        raise NonUnitDirection(f"height direction has norm {norm:.12g}")
    return curve.jet3(t0, degree, s).dot_vector(v)


def rectifying_direction(frenet: FrenetData) -> np.ndarray:
    """(τT + κB)/√(κ² + τ²), the axis of the osculating helix."""
    k, t = frenet.kappa, frenet.tau
    return (t * frenet.T + k * frenet.B) / np.hypot(k, t)


def tangent_indicatrix_height_jet(curve: CurveBase, t0: float, direction,
                                  degree: int = DEFAULT_DEGREE, s=None) -> Jet:
    return height_jet(TangentIndicatrix(curve), t0, direction, degree, s)


# ----------------------------------------------------------------------
# Singularity type
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class AkType:
    """A_k singularity type; k is None for the non-A_k outcomes."""

    label: str
    k: Optional[int] = None

    @property
    def is_singular(self) -> bool:
        return self.label != "NonSingular"

    def __str__(self) -> str:
        return self.label


NON_SINGULAR = AkType("NonSingular")
DEGENERATE_BEYOND_K = AkType("DegenerateBeyondK")


def classify_Ak(f: Jet, scale: Optional[float] = None, tol: float = DEFAULT_TOL) -> AkType:
    """
    Classify the germ of f at its basepoint.

    Coefficients c_j = f^(j)/j! count as zero when |c_j| <= tol·scale; by
    default scale is the largest |c_j| for j >= 1.
    """
    if f.degree < 2:
        raise InconsistentDegrees("classification needs a jet of degree >= 2")
    c = np.abs(np.asarray(f.coefficients[1:], dtype=float))
    if scale is None:
        scale = float(np.max(c))
    threshold = tol * scale
    if scale == 0.0:
        return DEGENERATE_BEYOND_K
    if c[0] > threshold:
        return NON_SINGULAR
    for j in range(1, len(c)):
        if c[j] > threshold:
            return AkType(f"A{j}", j)
    return DEGENERATE_BEYOND_K


@dataclass(frozen=True)
class VersalityResult:
    versal: bool
    rank: int
    required: int

    @property
    def deficit(self) -> int:
        return self.required - self.rank

    def __bool__(self) -> bool:
        return self.versal

    def as_dict(self) -> Dict[str, object]:
        return {"versal": self.versal, "rank": self.rank, "required": self.required}


def versality_test(f: Jet, k: int, unfolding_speeds: Sequence[Jet] = (),
                   tol: float = DEFAULT_TOL) -> VersalityResult:
    """
    Finite-jet R+-versality check of an unfolding of an A_k germ.

    The columns t^i·f' (i < k), the constant 1 and every speed ∂F/∂s_j|_{s=0}
    are truncated to degree k−1; the unfolding is versal iff they span all
    k monomials 1, t, ..., t^(k−1).
    """
    if k < 1:
        raise InconsistentDegrees(f"versality needs k >= 1, got {k}")
    if f.degree < k:
        raise InconsistentDegrees(f"jet degree {f.degree} below k={k}")
    for i, speed in enumerate(unfolding_speeds):
        if speed.degree != f.degree:
            raise InconsistentDegrees(f"speed {i} has degree {speed.degree}, expected {f.degree}")
        if not np.all(np.asarray(speed.basepoint) == np.asarray(f.basepoint)):
            raise InconsistentDegrees(f"speed {i} has a different basepoint")

    fprime = np.asarray(f.derivative().coefficients, dtype=float)
    columns: List[np.ndarray] = []
    for i in range(k):
        col = np.zeros(k)
        n = max(0, min(k - i, fprime.shape[0]))
        col[i : i + n] = fprime[:n]
        columns.append(col)
    one = np.zeros(k)
    one[0] = 1.0
    columns.append(one)
    for speed in unfolding_speeds:
        columns.append(np.asarray(speed.coefficients[:k], dtype=float))
    matrix = np.column_stack(columns)
    size = max(1.0, float(np.max(np.abs(matrix))))
    rank = int(np.linalg.matrix_rank(matrix, tol=tol * size))
    logger.debug(f"Versality matrix {matrix.shape}, rank {rank} of {k}")
    return VersalityResult(rank == k, rank, k)


def sphere_contact_order(curve: CurveBase, t0: float, center, radius: float,
                         degree: int = DEFAULT_DEGREE, s=None, tol: float = DEFAULT_TOL) -> int:
    """
    Order of contact between γ at t0 and the sphere S(center, radius).

    The sphere passes through γ(t0) when d(t0) = ½ radius²; the order is then
    the A_k index of d at t0 (0 when d' does not vanish).
    """
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    d = distance_squared_jet(curve, t0, center, degree, s)
    if abs(d.value - 0.5 * radius * radius) > tol * max(1.0, radius * radius):
        return 0
    kind = classify_Ak(d, tol=tol)
    if not kind.is_singular:
        return 0
    if kind.k is None:
        return d.degree
    return kind.k


@dataclass(frozen=True)
class HelixDefect:
    value: float
    planar: bool


def helix_defect(curve: CurveBase, t0: float, degree: int = 8, s=None,
                 tol: float = DEFAULT_TOL) -> HelixDefect:
    """
    det(α'', α''', α'''') in arc-length derivatives; zero along helices.

    Planar stretches (det(γ', γ'', γ''') ≡ 0 in the jet) return value 0 with
    the planar flag set.
    """
    gamma = curve.jet3(t0, degree, s)
    d1 = gamma.derivative()
    speed0 = float(np.sqrt(d1.norm_squared().value))
    if speed0 <= tol:
        raise RegularityError(speed0, float(t0))
    d2 = d1.derivative()
    d3 = d2.derivative()
    m = d3.degree
    flat = det3(d1.truncate(m), d2.truncate(m), d3)
    ref = max(1.0, speed0 ** 6)
    if np.all(np.abs(np.asarray(flat.coefficients)) <= tol * ref):
        return HelixDefect(0.0, True)
    h = arc_length_reparametrization(curve, t0, degree, s, tol)
    alpha = gamma.compose(h)
    derivs = [alpha.coefficient(j) * math.factorial(j) for j in (2, 3, 4)]
    value = float(np.linalg.det(np.column_stack(derivs)))
    return HelixDefect(value, False)