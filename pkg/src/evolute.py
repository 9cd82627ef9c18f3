"""
Focal data, the generalized evolute c = γ + μ1 N + μ2 B and the local
models of the evolute at flattenings, vertices and twistings.

All local-model reports run on the arc-length normal form of the curve at
t0 (γ(t0) at the origin, Frenet frame on the coordinate axes).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from src.curve_model import CurveBase, EvoluteCurve, PolynomialCurve
from src.errors import (
    DegenerateDelta,
    InflectionError,
    NotAFlattening,
    NotATwisting,
    NotAVertex,
    RegularityError,
    ZeroTorsion,
)
from src.frenet import (
    DEFAULT_DEGREE,
    DEFAULT_TOL,
    arc_length_reparametrization,
    frenet_apparatus,
    local_jets,
)
from src.jet import Jet, Jet3

logger = logging.getLogger(__name__)

POLE_LADDER = (1e-2, 1e-3, 1e-4)
FEATURE_TOL = 1e-6


@dataclass(frozen=True)
class FocalData:
    mu1: float
    mu2: float
    radius: float
    center: np.ndarray


@dataclass(frozen=True)
class CoefficientEntry:
    name: str
    computed: float
    closed_form: float
    rel_dev: float
    degenerate: bool = False

    def as_dict(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "computed": self.computed,
            "closed_form": self.closed_form,
            "rel_dev": self.rel_dev,
            "degenerate": self.degenerate,
        }


@dataclass(frozen=True)
class CoefficientReport:
    kind: str
    t0: float
    entries: List[CoefficientEntry]
    extras: Dict[str, float] = field(default_factory=dict)

    def entry(self, name: str) -> CoefficientEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    @property
    def max_rel_dev(self) -> float:
        devs = [e.rel_dev for e in self.entries if not e.degenerate]
        return max(devs) if devs else 0.0

    def as_dict(self) -> Dict[str, object]:
        return {
            "kind": self.kind,
            "t0": self.t0,
            "entries": [e.as_dict() for e in self.entries],
            "extras": dict(self.extras),
        }


def _entry(name: str, computed: float, closed_form: float, zero_tol: float = 1e-12) -> CoefficientEntry:
    computed, closed_form = float(computed), float(closed_form)
    degenerate = abs(closed_form) <= zero_tol
    if degenerate:
        rel_dev = abs(computed)
    else:
        rel_dev = abs(computed - closed_form) / abs(closed_form)
    return CoefficientEntry(name, computed, closed_form, rel_dev, degenerate)


# ----------------------------------------------------------------------
# Evolute
# ----------------------------------------------------------------------

def evolute_jet(curve: CurveBase, t0, degree: int = DEFAULT_DEGREE, s=None,
                tol: float = DEFAULT_TOL) -> Jet3:
    """
    Component jets of c = γ + (1/κ)N − (κ'/(κ²τ))B at t0, κ' taken in arc length.

    Raises:
        ZeroTorsion: |τ(t0)| <= tol·κ(t0); the evolute has a pole there
        RegularityError, InflectionError
    """
    lj = local_jets(curve, t0, degree + 1, s, tol)
    kappa0 = np.asarray(lj.kappa.value)
    tau0 = np.asarray(lj.tau.value)
    flat = np.abs(tau0) <= tol * kappa0
    if np.any(flat):
        i = np.argmin(np.abs(tau0) / kappa0) if tau0.ndim else ()
        t_bad = float(np.broadcast_to(np.asarray(t0, dtype=float), tau0.shape)[i])
        raise ZeroTorsion(float(tau0[i]), t_bad)
    _, normal, binormal = lj.frame()
    speed = lj.speed.truncate(degree)
    kappa = lj.kappa.truncate(degree)
    tau = lj.tau.truncate(degree)
    kappa_s = lj.kappa.derivative() / speed
    mu1 = 1.0 / kappa
    mu2 = -kappa_s / (kappa * kappa * tau)
    return lj.gamma.truncate(degree) + normal.truncate(degree) * mu1 + binormal.truncate(degree) * mu2


def focal_data(curve: CurveBase, t0: float, s=None, tol: float = DEFAULT_TOL) -> FocalData:
    """μ1 = 1/κ, μ2 = −κ'/(κ²τ), radius √(μ1² + μ2²) and center γ + μ1N + μ2B."""
    frenet = frenet_apparatus(curve, t0, 2, s, tol)
    kappa, tau = frenet.kappa, frenet.tau
    if abs(tau) <= tol * kappa:
        raise ZeroTorsion(tau, float(t0))
    kappa_prime = frenet.kappa_jet.coefficient(1)
    mu1 = 1.0 / kappa
    mu2 = -kappa_prime / (kappa * kappa * tau)
    point = curve.jet3(t0, 0, s).value()
    center = point + mu1 * frenet.N + mu2 * frenet.B
    return FocalData(mu1, mu2, float(np.sqrt(mu1 * mu1 + mu2 * mu2)), center)


def osculating_sphere(curve: CurveBase, t0: float, s=None,
                      tol: float = DEFAULT_TOL) -> Tuple[np.ndarray, float]:
    data = focal_data(curve, t0, s, tol)
    return data.center, data.radius


@dataclass(frozen=True)
class EvolutePolyline:
    t: np.ndarray
    points: np.ndarray  # (n, 3)
    skipped: np.ndarray  # parameter values with τ ≈ 0 or singular γ


def evolute_polyline(curve: CurveBase, interval: Tuple[float, float], samples: int,
                     s=None, tol: float = DEFAULT_TOL) -> EvolutePolyline:
    """Evolute points on a grid; samples where the evolute is undefined are skipped."""
    lo, hi = interval
    grid = np.linspace(lo, hi, samples)
    gamma = curve.jet3(grid, 4, s)
    d1 = gamma.derivative()
    d2 = d1.derivative()
    d3 = d2.derivative()
    speed = np.linalg.norm(d1.value(), axis=0)
    cross = np.cross(d1.value(), d2.value(), axis=0)
    cross_norm = np.linalg.norm(cross, axis=0)
    ok = (speed > tol) & (cross_norm > tol)
    kappa = np.where(ok, cross_norm / np.where(ok, speed, 1.0) ** 3, 0.0)
    triple = np.einsum("i...,i...->...", cross, d3.value())
    tau = np.where(ok, triple / np.where(ok, cross_norm, 1.0) ** 2, 0.0)
    ok &= np.abs(tau) > tol * kappa
    if np.any(~ok):
        logger.info(f"Evolute undefined at {int(np.sum(~ok))} of {samples} sample(s)")
    if not np.any(ok):
        return EvolutePolyline(np.empty(0), np.empty((0, 3)), grid)
    points = evolute_jet(curve, grid[ok], 0, s, tol).value().T
    return EvolutePolyline(grid[ok], points, grid[~ok])


# ----------------------------------------------------------------------
# Normal form
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class NormalForm:
    curve: PolynomialCurve
    rotation: np.ndarray
    translation: np.ndarray

    @property
    def a(self) -> np.ndarray:
        return self.curve.a

    @property
    def b(self) -> np.ndarray:
        return self.curve.b

    @property
    def c(self) -> np.ndarray:
        return self.curve.c


def normal_form(curve: CurveBase, t0: float, degree: int = DEFAULT_DEGREE, s=None,
                tol: float = DEFAULT_TOL) -> NormalForm:
    """
    Rigidly move γ(t0) to the origin with T, N, B on e1, e2, e3 and
    reparametrize by arc length; the result is a polynomial curve
    (σ + a3σ³ + ..., b2σ² + ..., c3σ³ + ...).
    """
    frenet = frenet_apparatus(curve, t0, 1, s, tol)
    rotation = np.vstack([frenet.T, frenet.N, frenet.B])
    gamma = curve.jet3(t0, degree, s)
    translation = gamma.value()
    h = arc_length_reparametrization(curve, t0, degree, s, tol)
    alpha = gamma.translate(-translation).rotate(rotation).compose(h)
    coeffs = [np.asarray(c.coefficients, dtype=float) for c in alpha.components]
    span = 0.25 / max(1.0, frenet.kappa)
    nf = PolynomialCurve(*coeffs, t_range=(-span, span), label=f"normal form of {curve.label}")
    return NormalForm(nf, rotation, translation)


def _evolute_coefficients(nf: PolynomialCurve, degree: int = 6) -> np.ndarray:
    """Taylor coefficients of the evolute at 0, shape (3, degree+1)."""
    c = evolute_jet(nf, 0.0, degree)
    return np.vstack([np.asarray(part.coefficients) for part in c.components])


# ----------------------------------------------------------------------
# Local models
# ----------------------------------------------------------------------

def _richardson_pole(nf: PolynomialCurve) -> float:
    """lim t→0 of t·z(t) from a symmetric geometric ladder."""
    levels = []
    for h in POLE_LADDER:
        vals = []
        for t in (h, -h):
            z = evolute_jet(nf, t, 0).z.value
            vals.append(t * z)
        levels.append(0.5 * (vals[0] + vals[1]))
    ratio = (POLE_LADDER[0] / POLE_LADDER[1]) ** 2
    first = [(ratio * levels[i + 1] - levels[i]) / (ratio - 1.0) for i in range(len(levels) - 1)]
    ratio2 = ratio * ratio
    return (ratio2 * first[1] - first[0]) / (ratio2 - 1.0)


def evolute_flattening_asymptotics(curve: CurveBase, t0: float, degree: int = 8, s=None,
                                   tol: float = FEATURE_TOL) -> CoefficientReport:
    """
    Compare the evolute's expansion at a flattening with its closed forms.

    x ~ b3/(2b2) t², y ~ 1/(2b2) − 3b3/(4b2²) t, z ~ b3/(−8 c4 b2) / t.

    Raises:
        NotAFlattening: τ(t0) ≠ 0 or τ'(t0) = 0
    """
    frenet = frenet_apparatus(curve, t0, 2, s)
    kappa = frenet.kappa
    tau_prime = frenet.tau_jet.coefficient(1)
    if abs(frenet.tau) > tol * kappa or abs(tau_prime) <= tol * kappa * kappa:
        raise NotAFlattening(
            f"t={t0}: tau={frenet.tau:.3e}, tau'={tau_prime:.3e} do not describe a flattening"
        )
    form = normal_form(curve, t0, degree + 4, s)
    nf = form.curve
    b2, b3, c4 = nf.b[2], nf.b[3], nf.c[4]

    # x and y: μ2 B has a removable singularity since B_x(0) = B_y(0) = 0
    lj = local_jets(nf, 0.0, degree + 1)
    _, normal, binormal = lj.frame()
    speed = lj.speed.truncate(degree)
    kappa_j = lj.kappa.truncate(degree)
    kappa_s = lj.kappa.derivative() / speed
    tau_reduced = lj.tau.shift()
    gamma = lj.gamma.truncate(degree)
    mu1 = 1.0 / kappa_j
    factor = -kappa_s / (kappa_j * kappa_j * tau_reduced)
    x = gamma.x + normal.x.truncate(degree) * mu1 + binormal.x.shift() * factor
    y = gamma.y + normal.y.truncate(degree) * mu1 + binormal.y.shift() * factor
    pole = _richardson_pole(nf)

    entries = [
        _entry("x2", x.coefficient(2), b3 / (2.0 * b2)),
        _entry("y0", y.coefficient(0), 1.0 / (2.0 * b2)),
        _entry("y1", y.coefficient(1), -3.0 * b3 / (4.0 * b2 * b2)),
        _entry("z_pole", pole, b3 / (-8.0 * c4 * b2)),
    ]
    extras = {"b2": b2, "b3": b3, "c4": c4, "x0": x.coefficient(0), "x1": x.coefficient(1)}
    logger.debug(f"Flattening report at t={t0}: max rel dev {max(e.rel_dev for e in entries):.3e}")
    return CoefficientReport("flattening", float(t0), entries, extras)


def vertex_series_closed_forms(a3: float, a4: float, b2: float, b3: float, b5: float,
                               c3: float, c5: float) -> Dict[str, float]:
    return {
        "a4_bar": 3.0 * (8 * b2 ** 2 * b3 * c3 - 3 * a3 * b3 * c3 + 10 * a4 * b2 * c3
                         + 5 * b3 * c5 - 5 * b5 * c3) / (2 * c3 * b2),
        "b0_bar": 1.0 / (2 * b2),
        "b3_bar": (-34 * b2 ** 2 * b3 * c3 + 9 * a3 * b3 * c3 - 40 * a4 * b2 * c3
                   - 20 * b3 * c5 + 20 * b5 * c3) / (2 * c3 * b2 ** 2),
        "c0_bar": -b3 / (2 * b2 * c3),
        "c2_bar": (18 * b2 ** 2 * b3 * c3 - 3 * a3 * b3 * c3 + 20 * a4 * b2 * c3
                   + 10 * b3 * c5 - 10 * b5 * c3) / (2 * c3 ** 2 * b2),
    }


def vertex_condition(a3: float, b2: float, b3: float, b4: float, c3: float, c4: float) -> float:
    """b2³c3 + 2a3b2c3 + b3c4 − b4c3; vanishes exactly at vertices of the normal form."""
    return b2 ** 3 * c3 + 2 * a3 * b2 * c3 + b3 * c4 - b4 * c3


def evolute_vertex_series(curve: CurveBase, t0: float, degree: int = 8, s=None,
                          tol: float = FEATURE_TOL) -> CoefficientReport:
    """
    Evolute coefficients ā4, b̄0, b̄3, c̄0, c̄2 at a vertex against their closed forms.

    Raises:
        NotAVertex: τ(t0) = 0 or the vertex condition fails
    """
    form = normal_form(curve, t0, degree + 4, s)
    a, b, c = form.a, form.b, form.c
    frenet = frenet_apparatus(form.curve, 0.0, 3)
    kappa, tau = frenet.kappa, frenet.tau
    if abs(tau) <= tol * kappa:
        raise NotAVertex(f"t={t0}: torsion vanishes, this is a flattening")
    condition = vertex_condition(a[3], b[2], b[3], b[4], c[3], c[4])
    scale = max(abs(b[2]) ** 3 * abs(c[3]), abs(b[3] * c[4]), abs(b[4] * c[3]), 1e-300)
    if abs(condition) > tol * scale:
        raise NotAVertex(f"t={t0}: vertex condition residual {condition:.3e}")
    coeffs = _evolute_coefficients(form.curve, 5)
    closed = vertex_series_closed_forms(a[3], a[4], b[2], b[3], b[5], c[3], c[5])
    entries = [
        _entry("a4_bar", coeffs[0, 4], closed["a4_bar"]),
        _entry("b0_bar", coeffs[1, 0], closed["b0_bar"]),
        _entry("b3_bar", coeffs[1, 3], closed["b3_bar"]),
        _entry("c0_bar", coeffs[2, 0], closed["c0_bar"]),
        _entry("c2_bar", coeffs[2, 2], closed["c2_bar"]),
    ]
    extras = {
        "vertex_condition": condition,
        "x1": coeffs[0, 1], "x2": coeffs[0, 2], "x3": coeffs[0, 3],
        "y1": coeffs[1, 1], "y2": coeffs[1, 2],
        "z1": coeffs[2, 1],
    }
    return CoefficientReport("vertex", float(t0), entries, extras)


def twisting_delta(b2: float, b3: float, b4: float) -> float:
    return 4 * b2 ** 4 + 12 * b2 * b4 - 27 * b3 ** 2


def twisting_delta_tilde(b2: float, b3: float, b4: float, c3: float, c5: float) -> float:
    return (12 * b2 ** 4 * c3 - 20 * b2 ** 2 * c5 + 48 * b2 * b4 * c3
            + 27 * b3 ** 2 * c3 + 27 * c3 ** 3)


def twisting_certificate_t(curve: CurveBase, t0, s=None) -> Jet:
    """κ'τ − τ'κ with t-derivatives, as a degree-1 jet in t."""
    lj = local_jets(curve, t0, 2, s)
    kp = lj.kappa.derivative()
    tp = lj.tau.derivative()
    return kp * lj.tau.truncate(1) - tp * lj.kappa.truncate(1)


def evolute_twisting_series(curve: CurveBase, t0: float, degree: int = 8, s=None,
                            tol: float = FEATURE_TOL) -> CoefficientReport:
    """
    Evolute data at a twisting against the closed forms in δ = 4b2⁴ + 12b2b4 − 27b3².

    The leading coefficient of κ_c'τ_c − τ_c'κ_c is compared in absolute
    value; its sign is kept in the extras.

    Raises:
        NotATwisting: τ(t0) = 0 or κτ' − κ'τ ≠ 0
        DegenerateDelta: |δ| below tolerance
    """
    form = normal_form(curve, t0, degree + 6, s)
    nf = form.curve
    b2, b3, b4 = nf.b[2], nf.b[3], nf.b[4]
    c3, c5 = nf.c[3], nf.c[5]
    frenet = frenet_apparatus(nf, 0.0, 3)
    kappa, tau = frenet.kappa, frenet.tau
    if abs(tau) <= tol * kappa:
        raise NotATwisting(f"t={t0}: torsion vanishes")
    twist = kappa * frenet.tau_jet.coefficient(1) - frenet.kappa_jet.coefficient(1) * tau
    if abs(twist) > tol * kappa ** 3:
        raise NotATwisting(f"t={t0}: twisting certificate {twist:.3e}")
    delta = twisting_delta(b2, b3, b4)
    if abs(delta) <= tol * max(1.0, b2 ** 4):
        raise DegenerateDelta(f"t={t0}: delta = {delta:.3e}")
    delta_t = twisting_delta_tilde(b2, b3, b4, c3, c5)

    coeffs = _evolute_coefficients(nf, 4)
    evolute = EvoluteCurve(nf)
    ev = frenet_apparatus(evolute, 0.0, 3)
    lead = twisting_certificate_t(evolute, 0.0).coefficient(1)
    ev_twist = ev.kappa * ev.tau_jet.coefficient(1) - ev.kappa_jet.coefficient(1) * ev.tau

    entries = [
        _entry("x3", coeffs[0, 3], -delta / (6 * b2 ** 2)),
        _entry("y2", coeffs[1, 2], delta / (4 * b2 ** 3)),
        _entry("z0", coeffs[2, 0], -b3 / (2 * b2 * c3)),
        _entry("z1", coeffs[2, 1], -delta / (6 * b2 ** 2 * c3)),
        _entry("kappa_c0", ev.kappa, 18 * b2 * c3 ** 2 / abs(delta)),
        _entry("tau_c0", ev.tau, -12 * c3 * b2 ** 3 / delta),
        _entry("twist_lead_abs", abs(lead), 216 * b2 ** 2 * c3 ** 2 * abs(delta_t) / delta ** 2),
    ]
    extras = {
        "delta": delta,
        "delta_tilde": delta_t,
        "twist_lead": lead,
        "twist_lead_sign": float(np.sign(lead)),
        "evolute_twist_cert": ev_twist,
        "evolute_kappa_cubed": ev.kappa ** 3,
    }
    return CoefficientReport("twisting", float(t0), entries, extras)


def evolute_velocity(curve: CurveBase, t0: float, s=None, tol: float = DEFAULT_TOL) -> np.ndarray:
    """c'(t0); parallel to B(t0) and zero exactly at vertices."""
    c = evolute_jet(curve, t0, 1, s, tol)
    return c.coefficient(1)
