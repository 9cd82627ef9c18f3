"""
Jet-space strata and the bifurcation set of two-parameter cusp families.

The strata C, F, V, T are evaluated on the deformed curve itself: for every
parameter value s the certificate is read at the tracked root t*(s) of
⟨γ_s', γ_s''⟩ near the cusp, then its zero set is traced on the s-grid.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq, least_squares

from src.curve_model import DeformationFamily, load_spec
from src.data_constants import MODEL_FAMILY_G
from src.errors import (
    DivisionByZeroSeries,
    DomainError,
    FrameAdaptationError,
    InsufficientPoints,
    LostTrack,
    NoCuspAtOrigin,
    NotGeneric,
)
from src.features import certificate_table, detect_cusp
from src.frenet import DEFAULT_TOL, VersalityResult, classify_Ak, versality_test
from src.jet import Jet

logger = logging.getLogger(__name__)

STRATA = ("C", "F", "V", "T")
CERTIFICATE_KEY = {"F": "flattening", "V": "vertex", "T": "twisting"}

BISECTION_STEPS = 45
NEWTON_ITERATIONS = 30
CONTACT_LADDER = 4
COINCIDENT_EXPONENT = 6
TRANSVERSE_ANGLE = 1e-2

Certificate = Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]


# ----------------------------------------------------------------------
# Jet-space strata
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class JetCoefficients:
    """Taylor coefficients a_1..a_k, b_1..b_k, c_1..c_k of the three components."""

    a: Tuple[float, ...]
    b: Tuple[float, ...]
    c: Tuple[float, ...]

    def __post_init__(self):
        if not len(self.a) == len(self.b) == len(self.c):
            raise ValueError("coefficient lists must have equal length")
        if len(self.a) < 4:
            raise ValueError("at least four coefficients per component are needed")

    def get(self, row: str, i: int) -> float:
        """1-based access: get('b', 3) is b_3."""
        return getattr(self, row)[i - 1]


def jet_coefficients(curve, t0: float, k: int = 5, s=None) -> JetCoefficients:
    gamma = curve.jet3(t0, k, s)
    rows = [tuple(float(x) for x in np.asarray(part.coefficients)[1:]) for part in gamma.components]
    return JetCoefficients(*rows)


@dataclass(frozen=True)
class StratumValues:
    C_residual: Tuple[float, float, float]
    F_value: float
    V_linear_part: float
    xi: Tuple[float, float, float]
    T_components: Tuple[float, float, float]
    T_leading: float

    def as_dict(self) -> Dict[str, object]:
        return {
            "C_residual": list(self.C_residual),
            "F_value": self.F_value,
            "V_linear_part": self.V_linear_part,
            "xi": list(self.xi),
            "T_components": list(self.T_components),
            "T_leading": self.T_leading,
        }


def stratum_values(j: JetCoefficients) -> StratumValues:
    """Evaluate the C, F, V (linear part) and T (leading part) stratum expressions on a jet."""
    a1, a2, a3 = j.a[0], j.a[1], j.a[2]
    b1, b2, b3 = j.b[0], j.b[1], j.b[2]
    c1, c2, c3 = j.c[0], j.c[1], j.c[2]
    m1 = b2 * c3 - b3 * c2
    m2 = a3 * c2 - a2 * c3
    m3 = a2 * b3 - a3 * b2
    f_value = a1 * m1 + b1 * m2 + c1 * m3
    norm2 = a2 * a2 + b2 * b2 + c2 * c2
    xi = (24.0 * m1 * norm2, 24.0 * m2 * norm2, 24.0 * m3 * norm2)
    v_linear = a1 * xi[0] + b1 * xi[1] + c1 * xi[2]
    t1 = a1 * a2 + b1 * b2 + c1 * c2
    quad = (a1 * a1 * (b2 * b2 + c2 * c2) - 2 * a1 * b1 * a2 * b2 - 2 * a1 * c1 * a2 * c2
            + b1 * b1 * (a2 * a2 + c2 * c2) + c1 * c1 * (a2 * a2 + b2 * b2) - 2 * b1 * c1 * b2 * c2)
    return StratumValues(
        C_residual=(a1, b1, c1),
        F_value=f_value,
        V_linear_part=v_linear,
        xi=xi,
        T_components=(t1, f_value, quad),
        T_leading=36.0 * quad * quad * t1 * f_value,
    )


# ----------------------------------------------------------------------
# Cusp location and the tracked root
# ----------------------------------------------------------------------

def _speed_derivatives(family, t, s1, s2):
    """⟨γ', γ''⟩ and its t-derivative |γ''|² + ⟨γ', γ'''⟩."""
    d1 = family.jet3(t, 3, (s1, s2)).derivative()
    g1 = d1.coefficient(0)
    g2 = d1.coefficient(1)
    g3 = 2.0 * d1.coefficient(2)
    q = np.einsum("i...,i...->...", g1, g2)
    dq = np.einsum("i...,i...->...", g2, g2) + np.einsum("i...,i...->...", g1, g3)
    return q, dq, np.sqrt(np.einsum("i...,i...->...", g1, g1))


def locate_cusp(family: DeformationFamily, samples: int = 512,
                tol: float = DEFAULT_TOL) -> float:
    """
    Parameter t0 of the space cusp of the s = 0 slice.

    Raises:
        NoCuspAtOrigin: no point with γ' = 0, γ'' ≠ 0 and γ''×γ''' ≠ 0
    """
    lo, hi = family.t_range
    grid = np.linspace(lo, hi, samples)
    _, _, speed = _speed_derivatives(family, grid, 0.0, 0.0)
    start = float(grid[int(np.argmin(speed))])

    def velocity(x):
        return family.jet3(float(x[0]), 1, (0.0, 0.0)).coefficient(1)

    sol = least_squares(velocity, [start], bounds=([lo], [hi]), xtol=1e-15, ftol=1e-15, gtol=1e-15)
    t0 = float(sol.x[0])
    check = detect_cusp(family, t0, (0.0, 0.0), tol)
    if not check.is_space_cusp:
        raise NoCuspAtOrigin(
            f"s=0 slice has no space cusp in [{lo}, {hi}] (closest |γ'|={check.speed:.3e} "
            f"at t={t0:.6g}, |γ''×γ'''|={check.cross_23:.3e})"
        )
    logger.debug(f"Cusp of {family.label!r} at t0={t0:.17g}")
    return t0


def tracked_root(family: DeformationFamily, t0: float, s1, s2, window: Optional[float] = None,
                 tol: float = DEFAULT_TOL) -> np.ndarray:
    """
    Root t*(s) of ⟨γ_s', γ_s''⟩ nearest t0, vectorized over s.

    Points where plain Newton from t0 fails are continued from s = 0 along
    the segment towards s with step halving.

    Raises:
        LostTrack: the root leaves |t − t0| <= window
    """
    s1, s2 = np.broadcast_arrays(np.asarray(s1, dtype=float), np.asarray(s2, dtype=float))
    shape = s1.shape
    s1, s2 = s1.ravel(), s2.ravel()
    if window is None:
        window = 0.25 * (family.t_range[1] - family.t_range[0])
    t, ok = _newton(family, np.full(s1.shape, t0), s1, s2, t0, window)
    for i in np.flatnonzero(~ok):
        t[i] = _continue_root(family, t0, s1[i], s2[i], window)
    return t.reshape(shape)


def _newton(family, t, s1, s2, t0: float, window: float):
    converged = np.zeros(t.shape, dtype=bool)
    failed = np.zeros(t.shape, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for _ in range(NEWTON_ITERATIONS):
            q, dq, _ = _speed_derivatives(family, t, s1, s2)
            step = np.where(dq != 0.0, q / dq, np.nan)
            step = np.where(q == 0.0, 0.0, step)
            t = t - step
            lost = ~np.isfinite(t) | (np.abs(t - t0) > 2.0 * window)
            failed |= lost
            # parked at t0 so the next jet evaluation stays finite
            t = np.where(failed, t0, t)
            converged = ~failed & (np.abs(step) <= 1e-14 * np.maximum(1.0, np.abs(t)))
            if np.all(converged | failed):
                break
    ok = converged & (np.abs(t - t0) <= window)
    return np.where(ok, t, t0), ok


def _continue_root(family, t0: float, s1: float, s2: float, window: float) -> float:
    lam, t, step = 0.0, t0, 0.25
    while lam < 1.0:
        trial = min(1.0, lam + step)
        t_new, ok = _newton(family, np.array([t]), np.array([trial * s1]),
                            np.array([trial * s2]), t0, window)
        if ok[0]:
            lam, t = trial, float(t_new[0])
            step = min(0.5, 2.0 * step)
            continue
        step *= 0.5
        if step < 1e-6:
            raise LostTrack(f"feature root left the window |t - {t0:.6g}| <= {window:.3g}",
                            (lam * s1, lam * s2))
    return t


def _certificate_values(family, key: str, t, s1, s2) -> Tuple[np.ndarray, np.ndarray]:
    """
    Batched certificate and reference scale; samples whose series division
    is numerically singular come back as NaN.

    A failing batch is halved until the singular samples are isolated.
    """
    shape = np.shape(t)
    t, s1, s2 = (np.ravel(a) for a in (t, s1, s2))
    value = np.full(t.shape, np.nan)
    ref = np.full(t.shape, np.nan)
    pending = [np.arange(t.size)] if t.size else []
    while pending:
        idx = pending.pop()
        try:
            table = certificate_table(family, t[idx], (s1[idx], s2[idx]))
        except (DivisionByZeroSeries, DomainError) as e:
            if idx.size > 1:
                half = idx.size // 2
                pending.extend([idx[:half], idx[half:]])
            else:
                logger.debug(f"Certificate skipped at s=({s1[idx[0]]:.6g}, {s2[idx[0]]:.6g}): {e}")
            continue
        value[idx] = table[key]
        ref[idx] = table["ref_" + key]
    return value.reshape(shape), ref.reshape(shape)


def stratum_certificate(family: DeformationFamily, stratum: str, t0: float,
                        window: Optional[float] = None, tol: float = DEFAULT_TOL) -> Certificate:
    """g(s1, s2) -> (value, reference scale) of a stratum's certificate at t*(s)."""
    key = CERTIFICATE_KEY[stratum]

    def certificate(s1, s2):
        s1, s2 = np.broadcast_arrays(np.asarray(s1, dtype=float), np.asarray(s2, dtype=float))
        t = tracked_root(family, t0, s1, s2, window, tol)
        _, _, speed = _speed_derivatives(family, t, s1, s2)
        bad = speed <= max(tol, 1e-6 * float(np.max(speed, initial=0.0)))
        safe1 = np.where(bad, 1.0, s1)
        safe2 = np.where(bad, 1.0, s2)
        t_safe = np.where(bad, t0, t)
        value, ref = _certificate_values(family, key, t_safe, safe1, safe2)
        return np.where(bad, np.nan, value), np.where(bad, np.nan, ref)

    return certificate


# ----------------------------------------------------------------------
# Loci
# ----------------------------------------------------------------------

@dataclass
class StratumLocus:
    stratum: str
    points: np.ndarray  # (n, 2) in (s1, s2)
    residuals: np.ndarray
    tangent_direction: Optional[np.ndarray] = None
    resolution: float = 0.0
    box: Tuple[Tuple[float, float], Tuple[float, float]] = ((-1.0, 1.0), (-1.0, 1.0))
    certificate: Optional[Certificate] = field(default=None, repr=False, compare=False)
    extras: Dict[str, float] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.points)

    def branches(self, gap: float = 0.2) -> List[np.ndarray]:
        """Split the angle-sorted points into rays from the origin."""
        if len(self.points) == 0:
            return []
        angles = np.arctan2(self.points[:, 1], self.points[:, 0])
        cuts = np.flatnonzero(np.diff(angles) > gap) + 1
        out = []
        for part in np.split(np.arange(len(self.points)), cuts):
            pts = self.points[part]
            out.append(pts[np.argsort(np.hypot(pts[:, 0], pts[:, 1]), kind="stable")])
        if len(out) > 1:
            first, last = angles[0], angles[-1]
            if first + 2 * np.pi - last <= gap:
                merged = np.vstack([out[-1], out[0]])
                out = [merged[np.argsort(np.hypot(merged[:, 0], merged[:, 1]), kind="stable")]] + out[1:-1]
        return out

    def rows(self) -> List[Dict[str, object]]:
        return [{"stratum": self.stratum, "s1": float(p[0]), "s2": float(p[1]), "residual": float(r)}
                for p, r in zip(self.points, self.residuals)]


def _canonical(direction: np.ndarray) -> np.ndarray:
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    if d[0] < 0 or (d[0] == 0 and d[1] < 0):
        d = -d
    return d


def _sort_points(points: np.ndarray) -> np.ndarray:
    angle = np.arctan2(points[:, 1], points[:, 0])
    radius = np.hypot(points[:, 0], points[:, 1])
    return np.lexsort((radius, angle))


def _bisect_edges(certificate: Certificate, p0: np.ndarray, p1: np.ndarray,
                  g0: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    lo, hi = p0.copy(), p1.copy()
    sign_lo = np.sign(g0)
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        g, _ = certificate(mid[:, 0], mid[:, 1])
        same = np.sign(g) == sign_lo
        lo = np.where(same[:, None], mid, lo)
        hi = np.where(same[:, None], hi, mid)
    point = 0.5 * (lo + hi)
    g, ref = certificate(point[:, 0], point[:, 1])
    return point, g, ref


def trace_bifurcation(family: DeformationFamily, stratum: str, box=None, grid: int = 256,
                      t0: Optional[float] = None, tol: float = DEFAULT_TOL,
                      workers: int = 1) -> StratumLocus:
    """
    Trace one stratum of the bifurcation set in the (s1, s2) plane.

    Args:
        family: two-parameter family whose s=0 slice has a space cusp
        stratum: one of C, F, V, T
        box: ((lo1, hi1), (lo2, hi2)); defaults to the family's s_box
        grid: grid lines per axis

    Returns:
        StratumLocus with points sorted by angle then radius

    Raises:
        NoCuspAtOrigin, LostTrack
    """
    if stratum not in STRATA:
        raise ValueError(f"stratum must be one of {', '.join(STRATA)}, got {stratum!r}")
    box = family.s_box if box is None else box
    if t0 is None:
        t0 = locate_cusp(family, tol=tol)
    s1 = np.linspace(box[0][0], box[0][1], grid)
    s2 = np.linspace(box[1][0], box[1][1], grid)
    resolution = max(s1[1] - s1[0], s2[1] - s2[0])
    logger.info(f"Tracing stratum {stratum} of {family.label!r} on a {grid}x{grid} grid")

    if stratum == "C":
        return _trace_cusp(family, t0, box, s1, s2, resolution, tol)

    certificate = stratum_certificate(family, stratum, t0, tol=tol)
    S1, S2 = np.meshgrid(s1, s2, indexing="ij")
    rows = np.array_split(np.arange(grid), max(1, min(workers, grid)))
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        parts = list(pool.map(lambda r: certificate(S1[r], S2[r])[0], rows))
    values = np.vstack(parts)

    p0, p1, g0 = [], [], []
    sign = np.sign(values)
    for axis in (0, 1):
        a = sign[:-1, :] if axis == 0 else sign[:, :-1]
        b = sign[1:, :] if axis == 0 else sign[:, 1:]
        idx = np.argwhere(a * b < 0)
        for i, j in idx:
            i2, j2 = (i + 1, j) if axis == 0 else (i, j + 1)
            p0.append((S1[i, j], S2[i, j]))
            p1.append((S1[i2, j2], S2[i2, j2]))
            g0.append(values[i, j])
    # nodes where the certificate vanishes exactly belong to the locus as they are
    nodes = np.argwhere(values == 0.0)
    exact = np.column_stack([S1[nodes[:, 0], nodes[:, 1]], S2[nodes[:, 0], nodes[:, 1]]])
    if not p0 and not len(exact):
        logger.warning(f"No sign change of the {stratum} certificate in the box")
        return StratumLocus(stratum, np.empty((0, 2)), np.empty(0), None, resolution, box,
                            certificate)

    points, residuals = exact, np.zeros(len(exact))
    if p0:
        p0a, p1a, g0a = np.array(p0), np.array(p1), np.array(g0)
        crossed, g, ref = _bisect_edges(certificate, p0a, p1a, g0a)
        g_end, _ = certificate(p1a[:, 0], p1a[:, 1])
        pole = np.abs(g) > 0.5 * np.minimum(np.abs(g0a), np.abs(g_end))
        keep = np.isfinite(g) & ~pole
        if np.any(pole):
            logger.debug(f"Dropped {int(np.sum(pole))} pole crossing(s) of {stratum}")
        points = np.vstack([points, crossed[keep]])
        residuals = np.concatenate([residuals, np.abs(g[keep]) / np.where(ref[keep] > 0, ref[keep], 1.0)])

    order = _sort_points(points)
    points, residuals = points[order], residuals[order]
    unique = np.ones(len(points), dtype=bool)
    for i in range(1, len(points)):
        if np.hypot(*(points[i] - points[i - 1])) <= 1e-12:
            unique[i] = False
    points, residuals = points[unique], residuals[unique]

    locus = StratumLocus(stratum, points, residuals, None, resolution, box, certificate)
    try:
        locus.tangent_direction = fit_tangent_direction(locus)
    except InsufficientPoints as e:
        logger.debug(f"No tangent direction for {stratum}: {e}")
    logger.info(f"Stratum {stratum}: {len(points)} point(s)")
    return locus


def _trace_cusp(family, t0, box, s1, s2, resolution, tol) -> StratumLocus:
    def velocity(x):
        return family.jet3(float(x[0]), 1, (float(x[1]), float(x[2]))).coefficient(1)

    sol = least_squares(velocity, [t0, 0.0, 0.0], xtol=1e-15, ftol=1e-15, gtol=1e-15)
    t_c, c1, c2 = (float(v) for v in sol.x)
    residual = float(np.linalg.norm(velocity(sol.x)))

    S1, S2 = np.meshgrid(s1, s2, indexing="ij")
    t = tracked_root(family, t0, S1, S2, tol=tol)
    _, _, speed = _speed_derivatives(family, t, S1, S2)
    far = np.hypot(S1 - c1, S2 - c2) > 2.0 * resolution
    min_far = float(np.min(speed[far])) if np.any(far) else float("inf")
    isolated = min_far > 10.0 * tol
    if not isolated:
        logger.warning(f"Cusp stratum is not isolated: |γ'| = {min_far:.3e} away from the origin")
    return StratumLocus("C", np.array([[c1, c2]]), np.array([residual]), None, resolution, box,
                        None, {"t": t_c, "isolated": float(isolated), "min_speed_elsewhere": min_far})


# ----------------------------------------------------------------------
# Tangent cones
# ----------------------------------------------------------------------

def _circle_root(certificate: Certificate, radius: float, phi0: float,
                 width: float = 0.35, samples: int = 33) -> Optional[float]:
    phis = np.linspace(phi0 - width, phi0 + width, samples)
    g, _ = certificate(radius * np.cos(phis), radius * np.sin(phis))
    best = None
    for i in range(samples - 1):
        if np.isfinite(g[i]) and np.isfinite(g[i + 1]) and g[i] * g[i + 1] < 0:
            mid = 0.5 * (phis[i] + phis[i + 1])
            if best is None or abs(mid - phi0) < abs(best[0] - phi0):
                best = (mid, phis[i], phis[i + 1])
    if best is None:
        return None

    def on_circle(phi: float) -> float:
        return float(certificate(np.array([radius * np.cos(phi)]),
                                 np.array([radius * np.sin(phi)]))[0][0])

    return brentq(on_circle, best[1], best[2], xtol=1e-15)


def fit_tangent_direction(locus: StratumLocus) -> np.ndarray:
    """
    Unit direction of the locus at the origin.

    Total least squares through the origin on the five nearest points,
    then re-solved on circles of half and a quarter of their radius.

    Raises:
        InsufficientPoints
    """
    pts = locus.points
    if len(pts) < 5:
        raise InsufficientPoints(f"stratum {locus.stratum} has {len(pts)} point(s), need 5")
    radius = np.hypot(pts[:, 0], pts[:, 1])
    nearest = pts[np.argsort(radius, kind="stable")[:5]]
    if np.min(radius) > 2.0 * locus.resolution:
        raise InsufficientPoints(f"stratum {locus.stratum} does not reach the origin")
    _, _, vt = np.linalg.svd(nearest, full_matrices=False)
    direction = _canonical(vt[0])
    rho = float(np.median(np.hypot(nearest[:, 0], nearest[:, 1])))
    if locus.certificate is None:
        return direction
    for r in (rho / 2.0, rho / 4.0):
        phi = float(np.arctan2(direction[1], direction[0]))
        forward = _circle_root(locus.certificate, r, phi)
        backward = _circle_root(locus.certificate, r, phi + np.pi)
        if forward is None or backward is None:
            logger.warning(f"Circle refinement of {locus.stratum} failed at radius {r:.3g}")
            break
        u1 = np.array([np.cos(forward), np.sin(forward)])
        u2 = np.array([np.cos(backward), np.sin(backward)])
        direction = _canonical(u1 - u2)
    logger.debug(f"Tangent of {locus.stratum}: {direction}")
    return direction


@dataclass(frozen=True)
class TangentCone:
    direction: np.ndarray
    exponent: int
    coefficient: float
    reference: np.ndarray

    @property
    def transverse(self) -> bool:
        return self.exponent == 1

    def as_dict(self) -> Dict[str, object]:
        return {
            "direction": [float(x) for x in self.direction],
            "exponent": self.exponent,
            "coefficient": self.coefficient,
            "reference": [float(x) for x in self.reference],
        }


def _graph_point(certificate: Certificate, reference: np.ndarray, u: float) -> Optional[float]:
    """Separation of the locus from the reference line at abscissa u along the dominant axis."""
    swap = abs(reference[1]) > abs(reference[0])
    slope = reference[0] / reference[1] if swap else reference[1] / reference[0]

    def g(v: float) -> float:
        w = slope * u + v
        s1, s2 = (w, u) if swap else (u, w)
        return float(certificate(np.array([s1]), np.array([s2]))[0][0])

    width = 0.5 * abs(u)
    vs = np.linspace(-width, width, 41)
    vals = np.array([g(v) for v in vs])
    candidates = []
    for i in range(len(vs) - 1):
        if np.isfinite(vals[i]) and np.isfinite(vals[i + 1]):
            if vals[i] == 0.0:
                candidates.append(vs[i])
            elif vals[i] * vals[i + 1] < 0:
                candidates.append(brentq(g, vs[i], vs[i + 1], xtol=1e-16 * max(1.0, abs(u))))
    if not candidates:
        return None
    return float(min(candidates, key=abs))


def _slope_gap(direction: np.ndarray, reference: np.ndarray) -> float:
    """Difference of slopes over the reference's dominant axis."""
    swap = abs(reference[1]) > abs(reference[0])
    i, j = (1, 0) if swap else (0, 1)
    if abs(direction[i]) <= 1e-12:
        return float("inf")
    return float(direction[j] / direction[i] - reference[j] / reference[i])


def tangent_cone(locus: StratumLocus, reference: Optional[Sequence[float]] = None,
                 against: Optional[StratumLocus] = None) -> TangentCone:
    """
    Direction of the locus at the origin and its contact with a reference line,
    or with another locus when `against` is given.

    The separation, measured as a graph over the reference's dominant axis,
    is solved at u, u/2, u/4, u/8; the exponent is read from the ratio of
    consecutive separations and rounded.  Against another locus both graphs
    are solved over the same line and differenced.  A separation at rounding
    level reports COINCIDENT_EXPONENT.

    Raises:
        InsufficientPoints
    """
    direction = locus.tangent_direction
    if direction is None:
        direction = fit_tangent_direction(locus)
    if reference is None and against is not None:
        reference = against.tangent_direction if against.tangent_direction is not None \
            else fit_tangent_direction(against)
    ref = _canonical(direction if reference is None else np.asarray(reference, dtype=float))
    if locus.certificate is None:
        return TangentCone(direction, COINCIDENT_EXPONENT, 0.0, ref)
    angle = float(np.arccos(min(1.0, abs(float(np.dot(direction, ref))))))
    if angle > TRANSVERSE_ANGLE:
        return TangentCone(direction, 1, _slope_gap(direction, ref), ref)

    half = 0.5 * min(locus.box[0][1] - locus.box[0][0], locus.box[1][1] - locus.box[1][0])
    u0 = 0.25 * half
    us = [u0 / 2 ** k for k in range(CONTACT_LADDER)]
    seps = [_graph_point(locus.certificate, ref, u) for u in us]
    if against is not None and against.certificate is not None:
        base = [_graph_point(against.certificate, ref, u) for u in us]
        seps = [None if s is None or b is None else s - b for s, b in zip(seps, base)]
    if any(s is None for s in seps):
        raise InsufficientPoints(f"stratum {locus.stratum} could not be followed towards the origin")
    if all(abs(s) <= 1e-10 * u for s, u in zip(seps, us)):
        return TangentCone(direction, COINCIDENT_EXPONENT, 0.0, ref)
    ratio = abs(seps[-2]) / max(abs(seps[-1]), 1e-300)
    exponent = int(round(np.log2(ratio)))
    exponent = max(1, min(exponent, COINCIDENT_EXPONENT))
    c_prev = seps[-2] / us[-2] ** exponent
    c_last = seps[-1] / us[-1] ** exponent
    coefficient = 2.0 * c_last - c_prev
    logger.debug(f"Contact of {locus.stratum} with {ref}: exponent {exponent}, "
                 f"coefficient {coefficient:.6g}")
    return TangentCone(direction, exponent, float(coefficient), ref)


# ----------------------------------------------------------------------
# Genericity and closed-form predictions
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class GenericityVerdict:
    generic: bool
    t0: float
    a2b3: float
    b4c3_minus_b3c4: float
    parameter_det: float
    frame: np.ndarray

    def as_dict(self) -> Dict[str, object]:
        return {
            "generic": self.generic,
            "t0": self.t0,
            "a2b3": self.a2b3,
            "b4c3_minus_b3c4": self.b4c3_minus_b3c4,
            "parameter_det": self.parameter_det,
        }


def adapted_frame(family: DeformationFamily, t0: float, tol: float = DEFAULT_TOL) -> np.ndarray:
    """
    Rotation whose rows e1, e2, e3 satisfy γ'' ∥ e1 and the part of γ''' normal to γ'' ∥ e2.

    Raises:
        FrameAdaptationError
    """
    gamma = family.jet3(t0, 3, (0.0, 0.0))
    g2 = 2.0 * gamma.coefficient(2)
    g3 = 6.0 * gamma.coefficient(3)
    n2 = float(np.linalg.norm(g2))
    if n2 <= tol:
        raise FrameAdaptationError(f"γ'' vanishes at the cusp (|γ''| = {n2:.3e})")
    e1 = g2 / n2
    normal = g3 - np.dot(g3, e1) * e1
    nn = float(np.linalg.norm(normal))
    if nn <= tol * max(1.0, float(np.linalg.norm(g3))):
        raise FrameAdaptationError("γ''' is parallel to γ'' at the cusp")
    e2 = normal / nn
    e3 = np.cross(e1, e2)
    return np.vstack([e1, e2, e3])


def _adapted_coefficients(family, t0: float, frame: np.ndarray, s=(0.0, 0.0), k: int = 5) -> np.ndarray:
    gamma = family.jet3(t0, k, s).rotate(frame)
    return np.vstack([np.asarray(part.coefficients, dtype=float) for part in gamma.components])


def frs_genericity(family: DeformationFamily, t0: Optional[float] = None,
                   tol: float = DEFAULT_TOL, step: float = 1e-5) -> GenericityVerdict:
    """
    FRS-genericity of a two-parameter deformation of a space cusp.

    Certificates: a2b3 and b4c3 − b3c4 in the adapted frame, and the
    determinant of s ↦ (b1(s), c1(s)) at s = 0 by central differences.

    Raises:
        NoCuspAtOrigin, FrameAdaptationError
    """
    if t0 is None:
        t0 = locate_cusp(family, tol=tol)
    frame = adapted_frame(family, t0, tol)
    coeffs = _adapted_coefficients(family, t0, frame)
    a, b, c = coeffs
    a2b3 = float(a[2] * b[3])
    cross = float(b[4] * c[3] - b[3] * c[4])
    jac = np.empty((2, 2))
    for j in range(2):
        e = np.zeros(2)
        e[j] = step
        plus = _adapted_coefficients(family, t0, frame, tuple(e), 1)
        minus = _adapted_coefficients(family, t0, frame, tuple(-e), 1)
        jac[:, j] = (plus[1:, 1] - minus[1:, 1]) / (2.0 * step)
    det = float(np.linalg.det(jac))
    generic = abs(a2b3) > tol and abs(cross) > tol and abs(det) > tol
    logger.info(f"FRS genericity of {family.label!r}: a2b3={a2b3:.6g}, "
                f"b4c3-b3c4={cross:.6g}, det={det:.6g} -> {'generic' if generic else 'not generic'}")
    return GenericityVerdict(generic, t0, a2b3, cross, det, frame)


@dataclass(frozen=True)
class BifurcationPredictions:
    f_slope: float
    t_direction: np.ndarray
    v_cubic: float

    def as_dict(self) -> Dict[str, object]:
        return {
            "f_slope": self.f_slope,
            "t_direction": [float(x) for x in self.t_direction],
            "v_cubic": self.v_cubic,
        }


def bifurcation_predictions(family: DeformationFamily, t0: Optional[float] = None) -> BifurcationPredictions:
    """
    Closed-form leading terms of F, T and V for a family in normal form
    (a2 t² + ..., s1 t + b3 t³ + ..., s2 t + c3 t³ + ...).
    """
    if t0 is None:
        t0 = locate_cusp(family)
    j = jet_coefficients(family, t0, 5, (0.0, 0.0))
    a2, a3 = j.get("a", 2), j.get("a", 3)
    b3, b4 = j.get("b", 3), j.get("b", 4)
    c3, c4 = j.get("c", 3), j.get("c", 4)
    # zero line of (4a2b4 − 9a3b3)s2 + (9a3c3 − 4a2c4)s1
    p = 9 * a3 * c3 - 4 * a2 * c4
    q = 4 * a2 * b4 - 9 * a3 * b3
    t_direction = _canonical(np.array([q, -p])) if (p or q) else np.array([np.nan, np.nan])
    v_cubic = a3 * (b3 ** 2 + c3 ** 2) * (b3 * c4 - b4 * c3) / (a2 ** 3 * b3 ** 4)
    return BifurcationPredictions(c3 / b3, t_direction, float(v_cubic))


def cusp_distance_squared_versality(family: DeformationFamily, t0: Optional[float] = None,
                                    degree: int = 8, step: float = 1e-6,
                                    tol: float = DEFAULT_TOL) -> VersalityResult:
    """
    Versality of the distance-squared family D(t, q, s) = ½|γ_s(t) − q|² at the cusp,
    unfolded by the centre q and the family parameters s.

    `tol` is the relative threshold under which a Taylor coefficient of D counts as zero.
    """
    if t0 is None:
        t0 = locate_cusp(family)
    gamma = family.jet3(t0, degree, (0.0, 0.0))
    q0 = gamma.value()
    diff = gamma.translate(-q0)
    d = diff.norm_squared() * 0.5
    kind = classify_Ak(d, tol=tol)
    k = kind.k if kind.k is not None else d.degree - 1
    speeds: List[Jet] = [-part for part in diff.components]
    for j in range(2):
        e = np.zeros(2)
        e[j] = step
        plus = family.jet3(t0, degree, tuple(e))
        minus = family.jet3(t0, degree, tuple(-e))
        dgamma = (plus - minus) * (1.0 / (2.0 * step))
        speeds.append(diff.dot(dgamma))
    result = versality_test(d, k, speeds)
    logger.info(f"Distance-squared family at the cusp: {kind}, rank {result.rank}/{result.required}")
    return result


# ----------------------------------------------------------------------
# Comparison with the model family
# ----------------------------------------------------------------------

def model_family(label: str = "G") -> DeformationFamily:
    spec = dict(MODEL_FAMILY_G)
    spec["label"] = label
    return load_spec(spec)


def _circle_word(loci: Dict[str, StratumLocus], radius: float) -> Tuple[str, List[float]]:
    rays: List[Tuple[float, str]] = []
    phis = np.linspace(-np.pi, np.pi, 2881)
    for name in ("F", "V", "T"):
        locus = loci.get(name)
        if locus is None or locus.certificate is None:
            continue
        g, _ = locus.certificate(radius * np.cos(phis), radius * np.sin(phis))

        def on_circle(phi, cert=locus.certificate):
            return float(cert(np.array([radius * np.cos(phi)]), np.array([radius * np.sin(phi)]))[0][0])

        for i in range(len(phis) - 1):
            if not (np.isfinite(g[i]) and np.isfinite(g[i + 1])):
                continue
            if g[i] * g[i + 1] < 0:
                rays.append((brentq(on_circle, phis[i], phis[i + 1], xtol=1e-14), name))
            elif g[i] == 0.0 and 0 < i and g[i - 1] * g[i + 1] < 0:
                rays.append((float(phis[i]), name))
    rays.sort()
    word = "".join(name for _, name in rays)
    return word, [phi for phi, _ in rays]


def canonical_cyclic_word(word: str) -> str:
    """Lexicographically least rotation of the word or of its reverse."""
    if not word:
        return word
    candidates = []
    for w in (word, word[::-1]):
        candidates.extend(w[i:] + w[:i] for i in range(len(w)))
    return min(candidates)


@dataclass(frozen=True)
class StratificationData:
    strata_through_origin: int
    fv_exponent: int
    fv_coefficient: float
    t_exponent: int
    cyclic_word: str

    def as_dict(self) -> Dict[str, object]:
        return {
            "strata_through_origin": self.strata_through_origin,
            "fv_exponent": self.fv_exponent,
            "fv_coefficient": self.fv_coefficient,
            "t_exponent": self.t_exponent,
            "cyclic_word": self.cyclic_word,
        }


def bifurcation_set(family: DeformationFamily, grid: int = 256, t0: Optional[float] = None,
                    tol: float = DEFAULT_TOL, workers: int = 1) -> Dict[str, StratumLocus]:
    if t0 is None:
        t0 = locate_cusp(family, tol=tol)
    return {name: trace_bifurcation(family, name, None, grid, t0, tol, workers) for name in STRATA}


def stratification_data(loci: Dict[str, StratumLocus]) -> StratificationData:
    through = 0
    for name, locus in loci.items():
        if name == "C":
            through += int(len(locus) > 0 and np.hypot(*locus.points[0]) <= locus.resolution)
        elif len(locus) and np.min(np.hypot(locus.points[:, 0], locus.points[:, 1])) <= 2.0 * locus.resolution:
            through += 1
    f_cone = tangent_cone(loci["F"])
    v_cone = tangent_cone(loci["V"], f_cone.direction, against=loci["F"])
    t_cone = tangent_cone(loci["T"], f_cone.direction, against=loci["F"])
    box = loci["F"].box
    radius = 0.25 * min(box[0][1] - box[0][0], box[1][1] - box[1][0])
    word, _ = _circle_word(loci, radius)
    return StratificationData(through, v_cone.exponent, v_cone.coefficient, t_cone.exponent,
                              canonical_cyclic_word(word))


@dataclass(frozen=True)
class ModelComparison:
    family: StratificationData
    model: StratificationData
    verdict: GenericityVerdict

    @property
    def matches(self) -> Dict[str, bool]:
        keys = ("strata_through_origin", "fv_exponent", "t_exponent", "cyclic_word")
        return {k: getattr(self.family, k) == getattr(self.model, k) for k in keys}

    @property
    def equivalent(self) -> bool:
        return all(self.matches.values())

    def as_dict(self) -> Dict[str, object]:
        return {
            "family": self.family.as_dict(),
            "model": self.model.as_dict(),
            "genericity": self.verdict.as_dict(),
            "matches": self.matches,
            "equivalent": self.equivalent,
        }


def compare_to_model(family: DeformationFamily, grid: int = 128, tol: float = DEFAULT_TOL,
                     workers: int = 1) -> ModelComparison:
    """
    Juxtapose the family's stratification data with the model family's.

    Raises:
        NotGeneric: the family fails the FRS-genericity test
    """
    verdict = frs_genericity(family, tol=tol)
    if not verdict.generic:
        raise NotGeneric(f"family {family.label!r} is not FRS-generic: {verdict.as_dict()}")
    own = stratification_data(bifurcation_set(family, grid, verdict.t0, tol, workers))
    model = model_family()
    reference = stratification_data(bifurcation_set(model, grid, None, tol, workers))
    return ModelComparison(own, reference, verdict)
