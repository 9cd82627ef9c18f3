"""
Feature points of a space curve: flattenings, bi-flattenings, vertices,
twistings and cusps.

Certificates are sampled on a grid in one batched jet pass; every sign
change is bracketed, refined with brentq and polished with a Newton step
that uses the certificate's own jet derivative.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from src.curve_model import CurveBase
from src.errors import CurveKitError, NonConvergence, ZeroTorsion
from src.frenet import DEFAULT_TOL, local_jets

logger = logging.getLogger(__name__)

FLATTENING = "Flattening"
BI_FLATTENING = "BiFlattening"
VERTEX = "Vertex"
TWISTING = "Twisting"
CUSP = "Cusp"
DEGENERATE = "Degenerate"

KIND_ORDER = {CUSP: 0, BI_FLATTENING: 1, FLATTENING: 2, VERTEX: 3, TWISTING: 4, DEGENERATE: 5}

# certificate name -> reference scale key in the sample table
SCANNED = {
    "flattening": "ref_flattening",
    "vertex": "ref_vertex",
    "twisting": "ref_twisting",
    "tau_prime": "ref_tau_prime",
}
DEGENERATE_KIND = {"flattening": FLATTENING, "vertex": VERTEX, "twisting": TWISTING}

SCAN_DEGREE = 4
NEWTON_STEPS = 3


@dataclass(frozen=True)
class FeaturePoint:
    kind: str
    t: float
    certificates: Dict[str, float] = field(default_factory=dict)
    residual: float = 0.0
    certificate: str = ""

    def as_row(self) -> Dict[str, object]:
        row: Dict[str, object] = {"kind": self.kind, "t": self.t, "residual": self.residual}
        row.update(self.certificates)
        return row


@dataclass(frozen=True)
class FeatureIssue:
    """Stretch of the scan interval where the Frenet apparatus is undefined or a root stayed unresolved."""

    kind: str  # RegularityError, InflectionError or UnresolvedRoot
    t_lo: float
    t_hi: float
    magnitude: float


class FeatureScan(list):
    """List of FeaturePoint sorted by t, plus the issues met while scanning."""

    def __init__(self, points: Sequence[FeaturePoint] = (), issues: Sequence[FeatureIssue] = ()):
        super().__init__(points)
        self.issues: List[FeatureIssue] = list(issues)

    def of_kind(self, kind: str) -> List[FeaturePoint]:
        return [p for p in self if p.kind == kind]


@dataclass(frozen=True)
class FeatureCertificates:
    t: float
    kappa: float
    kappa_prime: float
    tau: float
    tau_prime: float
    flattening_det: float
    vertex_numerator: float
    vertex_cert: Optional[float]
    twist_cert: float

    def as_dict(self) -> Dict[str, float]:
        out = {
            "kappa": self.kappa,
            "kappa_prime": self.kappa_prime,
            "tau": self.tau,
            "tau_prime": self.tau_prime,
            "flattening_det": self.flattening_det,
            "vertex_numerator": self.vertex_numerator,
            "twist_cert": self.twist_cert,
        }
        if self.vertex_cert is not None:
            out["vertex_cert"] = self.vertex_cert
        return out


@dataclass(frozen=True)
class CuspCheck:
    is_space_cusp: bool
    speed: float
    acceleration: float
    cross_23: float

    def as_dict(self) -> Dict[str, float]:
        return {"speed": self.speed, "acceleration": self.acceleration, "cross_23": self.cross_23}


# ----------------------------------------------------------------------
# Certificate tables
# ----------------------------------------------------------------------

def certificate_table(curve: CurveBase, t, s=None) -> Dict[str, np.ndarray]:
    """
    Values and t-derivatives of all scanned certificates at regular points.

    The vertex certificate is carried in its pole-free form
    κ²τ³ − κκ''τ + 2κ'²τ + κκ'τ' = κ³τ²(μ2' + μ1τ).
    """
    lj = local_jets(curve, t, SCAN_DEGREE, s, check=False)
    h = lj.arc_length()
    k = lj.kappa.compose(h)
    ta = lj.tau.compose(h)
    kd1 = k.derivative()
    kd2 = kd1.derivative()
    td1 = ta.derivative()
    m = kd2.degree
    K, Kp, T, Tp = k.truncate(m), kd1.truncate(m), ta.truncate(m), td1.truncate(m)
    vertex = K * K * T * T * T - K * kd2 * T + 2.0 * Kp * Kp * T + K * Kp * Tp
    twisting = K * Tp - Kp * T
    flattening = lj.cross.dot(lj.d3)
    v = np.asarray(lj.speed.value)
    kappa = np.asarray(K.value)
    cross_norm = np.sqrt(np.asarray(lj.cross_sq.value))
    d3_norm = np.linalg.norm(lj.d3.value(), axis=0)
    return {
        "speed": v,
        "kappa": kappa,
        "kappa_prime": np.asarray(Kp.value),
        "kappa_pp": np.asarray(kd2.value),
        "tau": np.asarray(T.value),
        "tau_prime": np.asarray(Tp.value),
        "tau_prime_dt": np.asarray(td1.coefficient(1)) * v,
        "flattening": np.asarray(flattening.value),
        "flattening_dt": np.asarray(flattening.coefficient(1)),
        "vertex": np.asarray(vertex.value),
        "vertex_dt": np.asarray(vertex.coefficient(1)) * v,
        "twisting": np.asarray(twisting.value),
        "twisting_dt": np.asarray(twisting.coefficient(1)) * v,
        "ref_flattening": cross_norm * d3_norm,
        "ref_vertex": kappa ** 5,
        "ref_twisting": kappa ** 3,
        "ref_tau_prime": kappa ** 2,
    }


def _speed_table(curve: CurveBase, t, s=None) -> Dict[str, np.ndarray]:
    gamma = curve.jet3(t, 4, s)
    d1 = gamma.derivative()
    d2 = d1.derivative()
    d1t = d1.truncate(d2.degree)
    q = d1t.dot(d2)
    speed = np.linalg.norm(d1.value(), axis=0)
    cross = np.linalg.norm(np.cross(d1.value(), d2.value(), axis=0), axis=0)
    return {
        "speed": speed,
        "cross": cross,
        "cusp": np.asarray(q.value),
        "cusp_dt": np.asarray(q.coefficient(1)),
    }


def feature_certificates(curve: CurveBase, t: float, s=None,
                         tol: float = DEFAULT_TOL) -> FeatureCertificates:
    """
    All feature certificates at a regular, non-inflectional point.

    Raises:
        RegularityError, InflectionError
    """
    local_jets(curve, t, 1, s, tol)
    row = {key: float(val) for key, val in certificate_table(curve, t, s).items()}
    vertex_cert = None
    if abs(row["tau"]) > tol * row["kappa"]:
        vertex_cert = row["vertex"] / (row["kappa"] ** 3 * row["tau"] ** 2)
    return FeatureCertificates(
        t=float(t),
        kappa=row["kappa"],
        kappa_prime=row["kappa_prime"],
        tau=row["tau"],
        tau_prime=row["tau_prime"],
        flattening_det=row["flattening"],
        vertex_numerator=row["vertex"],
        vertex_cert=vertex_cert,
        twist_cert=row["twisting"],
    )


def detect_cusp(curve: CurveBase, t: float, s=None, tol: float = DEFAULT_TOL) -> CuspCheck:
    """Space cusp test: γ' = 0, γ'' ≠ 0 and γ''×γ''' ≠ 0."""
    gamma = curve.jet3(t, 3, s)
    d = gamma.derivative()
    g1 = d.coefficient(0)
    g2 = d.coefficient(1)
    g3 = 2.0 * d.coefficient(2)
    speed = float(np.linalg.norm(g1))
    accel = float(np.linalg.norm(g2))
    cross = float(np.linalg.norm(np.cross(g2, g3)))
    return CuspCheck(speed <= tol and accel > tol and cross > tol, speed, accel, cross)


def vertex_kappa_identity(curve: CurveBase, t: float, s=None, tol: float = DEFAULT_TOL) -> float:
    """
    κ'' − (2κ'²/κ + κ'τ'/τ + κτ²) in arc-length derivatives; zero at vertices.

    Raises:
        ZeroTorsion: |τ(t)| <= tol·κ(t)
    """
    local_jets(curve, t, 1, s, tol)
    row = certificate_table(curve, t, s)
    k, kp, kpp = float(row["kappa"]), float(row["kappa_prime"]), float(row["kappa_pp"])
    tau, taup = float(row["tau"]), float(row["tau_prime"])
    if abs(tau) <= tol * k:
        raise ZeroTorsion(tau, float(t))
    return kpp - (2.0 * kp * kp / k + kp * taup / tau + k * tau * tau)


# ----------------------------------------------------------------------
# Scanning
# ----------------------------------------------------------------------

def _chunks(n: int, parts: int) -> List[Tuple[int, int]]:
    """Index ranges covering 0..n-1 with one shared sample between neighbours."""
    parts = max(1, min(parts, n - 1))
    edges = np.linspace(0, n - 1, parts + 1).round().astype(int)
    return [(int(edges[i]), int(edges[i + 1]) + 1) for i in range(parts)]


def _runs(mask: np.ndarray) -> List[Tuple[int, int]]:
    """Maximal runs of True as (start, stop) index pairs."""
    padded = np.concatenate(([False], mask, [False])).astype(int)
    diff = np.diff(padded)
    return list(zip(np.flatnonzero(diff == 1), np.flatnonzero(diff == -1)))


def _sign_changes(values: np.ndarray, valid: np.ndarray) -> Tuple[List[int], List[int]]:
    """Bracket indices i (root in [t_i, t_i+1]) and indices of exact zeros."""
    sign = np.sign(values)
    pair_ok = valid[:-1] & valid[1:]
    brackets = np.flatnonzero(pair_ok & (sign[:-1] * sign[1:] < 0))
    zeros = np.flatnonzero(valid & (values == 0.0))
    return brackets.tolist(), zeros.tolist()


class _Refiner:
    """Scalar certificate refinement shared by the scanner's workers."""

    def __init__(self, curve: CurveBase, s, root_rel_tol: float):
        self.curve = curve
        self.s = s
        self.root_rel_tol = root_rel_tol

    def value(self, name: str, t: float) -> Tuple[float, float]:
        table = _speed_table(self.curve, t, self.s) if name == "cusp" \
            else certificate_table(self.curve, t, self.s)
        return float(table[name]), float(table[name + "_dt"])

    def refine(self, name: str, a: float, b: float) -> Tuple[float, float]:
        fn: Callable[[float], float] = lambda x: self.value(name, x)[0]
        xtol = self.root_rel_tol * max(1.0, abs(a), abs(b))
        try:
            root = brentq(fn, a, b, xtol=xtol, maxiter=200)
        except (ValueError, RuntimeError) as e:
            raise NonConvergence(f"refinement of {name} failed: {e}", (a, b)) from e
        g, dg = self.value(name, root)
        for _ in range(NEWTON_STEPS):
            if dg == 0.0 or g == 0.0:
                break
            candidate = root - g / dg
            if not a <= candidate <= b:
                break
            g_new, dg_new = self.value(name, candidate)
            if abs(g_new) >= abs(g):
                break
            root, g, dg = candidate, g_new, dg_new
        return root, abs(g)


def scan_features(curve: CurveBase, interval: Tuple[float, float], samples: int,
                  s=None, tol: float = DEFAULT_TOL, workers: int = 1,
                  merge_fraction: float = 0.1, degenerate_fraction: float = 0.9,
                  root_rel_tol: float = 1e-12, zero_rel_tol: float = 1e-8) -> FeatureScan:
    """
    Locate every feature point of a curve on an interval.

    Args:
        curve: curve-like object
        interval: (lo, hi) inside the curve's t-range
        samples: grid size, at least 16
        tol: absolute regularity threshold and relative zero threshold at roots
        workers: thread count for sampling and refinement
        zero_rel_tol: relative threshold under which a sampled certificate counts as vanishing

    Returns:
        FeatureScan sorted by t, with regularity issues attached

    Raises:
        NonConvergence: a bracketed root could not be refined
    """
    lo, hi = float(interval[0]), float(interval[1])
    if samples < 16:
        raise ValueError(f"samples must be at least 16, got {samples}")
    if not lo < hi:
        raise ValueError(f"empty scan interval [{lo}, {hi}]")
    grid = np.linspace(lo, hi, samples)
    merge_tol = (hi - lo) / samples * merge_fraction
    chunks = _chunks(samples, workers)
    logger.debug(f"Scanning {curve.label!r} on [{lo}, {hi}] with {samples} samples, "
                 f"{len(chunks)} chunk(s)")

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        speed_parts = list(pool.map(lambda c: _speed_table(curve, grid[c[0]:c[1]], s), chunks))
        speed = _stitch(speed_parts, chunks, samples)
        good = (speed["speed"] > tol) & (speed["cross"] > tol)

        def sample(c: Tuple[int, int]) -> Dict[str, np.ndarray]:
            idx = np.arange(c[0], c[1])
            idx = idx[good[idx]]
            return certificate_table(curve, grid[idx], s) if idx.size else {}

        cert_parts = list(pool.map(sample, chunks))
        table = _stitch_masked(cert_parts, chunks, good, samples)

        issues = _issues(grid, speed, tol)
        refiner = _Refiner(curve, s, root_rel_tol)

        # cusps: minima of |γ'|² where the speed actually vanishes
        cusp_brackets, cusp_zeros = _sign_changes(speed["cusp"], np.ones(samples, dtype=bool))
        cusp_brackets = [i for i in cusp_brackets if speed["cusp"][i] < 0 < speed["cusp"][i + 1]]
        jobs = [("cusp", grid[i], grid[i + 1]) for i in cusp_brackets]
        roots = list(pool.map(lambda job: _refine_job(refiner, job), jobs))
        cusp_ts = [float(grid[i]) for i in cusp_zeros] + [r[0] for r in roots if r is not None]
        points: List[FeaturePoint] = []
        for t in sorted(set(cusp_ts)):
            check = detect_cusp(curve, t, s, tol)
            if check.speed <= tol:
                points.append(FeaturePoint(CUSP, t, dict(check.as_dict(),
                                                         is_space_cusp=float(check.is_space_cusp)),
                                           check.speed, "cusp"))
        cusps = [p.t for p in points]

        jobs = []
        valid = good.copy()
        for name, ref_key in SCANNED.items():
            values = np.where(good, table[name], np.nan)
            ref = table[ref_key]
            if name in DEGENERATE_KIND and np.any(good):
                small = np.abs(values[good]) <= zero_rel_tol * ref[good]
                if small.mean() >= degenerate_fraction:
                    logger.warning(f"Certificate '{name}' is degenerate on [{lo}, {hi}] "
                                   f"({small.mean():.0%} of samples at zero)")
                    points.append(FeaturePoint(DEGENERATE, lo, {"t_hi": hi,
                                                                "fraction": float(small.mean())},
                                               0.0, name))
                    continue
            if name == "tau_prime" and np.all(np.abs(values[good]) <= zero_rel_tol * ref[good]):
                continue
            brackets, zeros = _sign_changes(np.nan_to_num(values), valid)
            for i in zeros:
                if not any(abs(grid[i] - c) <= merge_tol for c in cusps):
                    jobs.append((name, grid[i], grid[i]))
            for i in brackets:
                if any(grid[i] - merge_tol <= c <= grid[i + 1] + merge_tol for c in cusps):
                    continue
                jobs.append((name, grid[i], grid[i + 1]))
        logger.debug(f"{len(jobs)} bracket(s) to refine")
        refined = list(pool.map(lambda job: _refine_job(refiner, job), jobs))

    for (name, a, b), result in zip(jobs, refined):
        if result is None:
            continue
        t, residual = result
        point = _classify_root(curve, name, t, residual, s, tol, (a, b))
        if isinstance(point, FeatureIssue):
            issues.append(point)
        elif point is not None:
            points.append(point)

    merged = _merge(points, merge_tol)
    issues.sort(key=lambda i: i.t_lo)
    logger.debug(f"Found {len(merged)} feature point(s), {len(issues)} issue(s)")
    return FeatureScan(merged, issues)


def _refine_job(refiner: _Refiner, job) -> Optional[Tuple[float, float]]:
    name, a, b = job
    if a == b:
        return float(a), 0.0
    try:
        return refiner.refine(name, float(a), float(b))
    except NonConvergence:
        raise
    except CurveKitError as e:
        logger.debug(f"Skipping {name} bracket [{a}, {b}]: {e}")
        return None


def _classify_root(curve: CurveBase, name: str, t: float, residual: float, s, tol: float,
                   bracket: Tuple[float, float]) -> Union[FeaturePoint, FeatureIssue, None]:
    try:
        row = {k: float(v) for k, v in certificate_table(curve, t, s).items()}
    except CurveKitError as e:
        logger.debug(f"Dropping {name} root at t={t}: {e}")
        return None
    if residual > 1e-10 * row[SCANNED[name]] and name != "tau_prime":
        a, b = bracket
        ends = [abs(row[name])]
        try:
            ends = [abs(float(certificate_table(curve, x, s)[name])) for x in (a, b)]
        except CurveKitError:
            pass
        if residual >= max(ends):
            logger.debug(f"Sign change of {name} at t={t} is a pole, skipped")
            return None
        logger.warning(f"{name} root at t={t:.12g} has residual {residual:.3e}, not reported")
        return FeatureIssue("UnresolvedRoot", float(a), float(b), residual)
    kappa = row["kappa"]
    certs = {
        "kappa": kappa,
        "tau": row["tau"],
        "tau_prime": row["tau_prime"],
        "flattening_det": row["flattening"],
        "twist_cert": row["twisting"],
    }
    if name == "flattening":
        kind = BI_FLATTENING if abs(row["tau_prime"]) <= tol * kappa * kappa else FLATTENING
        return FeaturePoint(kind, t, certs, residual, name)
    if name == "tau_prime":
        if abs(row["tau"]) <= tol * kappa:
            return FeaturePoint(BI_FLATTENING, t, certs, residual, name)
        return None
    if name == "vertex":
        if abs(row["tau"]) <= tol * kappa:
            return None
        certs["vertex_cert"] = row["vertex"] / (kappa ** 3 * row["tau"] ** 2)
        return FeaturePoint(VERTEX, t, certs, residual, name)
    return FeaturePoint(TWISTING, t, certs, residual, name)


def _merge(points: List[FeaturePoint], merge_tol: float) -> List[FeaturePoint]:
    """Sort by (t, kind); fold duplicates and flattenings that sit on bi-flattenings."""
    points = sorted(points, key=lambda p: (p.t, KIND_ORDER[p.kind]))
    out: List[FeaturePoint] = []
    for p in points:
        if p.kind == DEGENERATE:
            out.append(p)
            continue
        clash = None
        for q in reversed(out):
            if q.kind == DEGENERATE:
                continue
            if p.t - q.t > merge_tol:
                break
            same = q.kind == p.kind
            flat_pair = {p.kind, q.kind} <= {FLATTENING, BI_FLATTENING}
            near_cusp = CUSP in (p.kind, q.kind)
            if same or flat_pair or near_cusp:
                clash = q
                break
        if clash is None:
            out.append(p)
        elif KIND_ORDER[p.kind] < KIND_ORDER[clash.kind]:
            out[out.index(clash)] = p
    return sorted(out, key=lambda p: (p.t, KIND_ORDER[p.kind]))


def _stitch(parts: List[Dict[str, np.ndarray]], chunks, n: int) -> Dict[str, np.ndarray]:
    out = {key: np.empty(n) for key in parts[0]}
    for part, (a, b) in zip(parts, chunks):
        for key, val in part.items():
            out[key][a:b] = val
    return out


def _stitch_masked(parts, chunks, good: np.ndarray, n: int) -> Dict[str, np.ndarray]:
    keys = next((p.keys() for p in parts if p), list(SCANNED) + list(SCANNED.values()))
    out = {key: np.full(n, np.nan) for key in keys}
    for part, (a, b) in zip(parts, chunks):
        if not part:
            continue
        idx = np.arange(a, b)
        idx = idx[good[idx]]
        for key, val in part.items():
            out[key][idx] = val
    return out


def _issues(grid: np.ndarray, speed: Dict[str, np.ndarray], tol: float) -> List[FeatureIssue]:
    issues = []
    singular = speed["speed"] <= tol
    inflection = ~singular & (speed["cross"] <= tol)
    for kind, mask, key in (("RegularityError", singular, "speed"),
                            ("InflectionError", inflection, "cross")):
        for a, b in _runs(mask):
            magnitude = float(np.min(speed[key][a:b]))
            issues.append(FeatureIssue(kind, float(grid[a]), float(grid[b - 1]), magnitude))
            logger.debug(f"{kind} on [{grid[a]:.6g}, {grid[b - 1]:.6g}]")
    return sorted(issues, key=lambda i: i.t_lo)
