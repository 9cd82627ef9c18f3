import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src.curve_model import CurveBase, DeformationFamily
from src.errors import InsufficientPoints, NonConvergence, NotAFlattening, NotATwisting, NotAVertex
from src.evolute import (
    CoefficientReport,
    EvolutePolyline,
    evolute_flattening_asymptotics,
    evolute_polyline,
    evolute_twisting_series,
    evolute_vertex_series,
)
from src.features import BI_FLATTENING, FLATTENING, TWISTING, VERTEX, FeatureScan, scan_features
from src.strata import (
    STRATA,
    StratumLocus,
    bifurcation_predictions,
    cusp_distance_squared_versality,
    frs_genericity,
    jet_coefficients,
    locate_cusp,
    stratum_values,
    tangent_cone,
    trace_bifurcation,
)

FEATURE_REPORTS = {
    "flattening": ((FLATTENING, BI_FLATTENING), evolute_flattening_asymptotics, NotAFlattening),
    "vertex": ((VERTEX,), evolute_vertex_series, NotAVertex),
    "twisting": ((TWISTING,), evolute_twisting_series, NotATwisting),
}


@dataclass
class BifurcationResult:
    t0: float
    loci: Dict[str, StratumLocus]
    report: Dict[str, Any] = field(default_factory=dict)


class InvariantCalculator:
    """
    不变量计算器类，串联特征扫描、渐屈线报告与分岔集追踪
    """

    def __init__(self, numerics: Optional[Dict[str, Any]] = None, logger: Optional[logging.Logger] = None):
        """
        Initialize calculator

        Args:
            numerics: tolerances and degrees (tol, degree, root_rel_tol, workers, ...)
            logger: Logger instance for logging messages
        """
        self.numerics = dict(numerics or {})
        self.logger = logger or logging.getLogger(__name__)

    @property
    def tol(self) -> float:
        return float(self.numerics.get("tol", 1e-8))

    @property
    def zero_rel_tol(self) -> float:
        return float(self.numerics.get("zero_rel_tol", 1e-8))

    def _guard(self, what: str, fn, *args, **kwargs):
        """
        运行一次计算并统一处理异常

        参数:
            what: 计算名称，用于日志
            fn: 计算函数

        返回:
            计算函数的返回值

        Raises:
            ValueError: 输入或前置条件无效时，原样抛出
            NonConvergence: 数值不收敛时，原样抛出
            RuntimeError: 其他未预期的错误
        """
        try:
            self.logger.info(f"Computing {what}")
            return fn(*args, **kwargs)
        except ValueError as e:
            self.logger.error(f"Validation error in {what}: {str(e)}")
            raise
        except NonConvergence as e:
            self.logger.error(f"Numerical failure in {what}: {str(e)}")
            raise
        except Exception as e:
            self.logger.error(f"Unexpected error in {what}: {str(e)}", exc_info=True)
            raise RuntimeError(f"{what} failed: {str(e)}") from e

    def analyze(self, curve: CurveBase, interval: Tuple[float, float], samples: int) -> FeatureScan:
        """
        扫描区间内的特征点

        参数:
            curve: 曲线
            interval: 参数区间 (lo, hi)
            samples: 采样数

        返回:
            FeatureScan（特征点列表，附带奇异区间）
        """
        n = self.numerics
        return self._guard(
            "feature scan", scan_features, curve, interval, samples,
            tol=self.tol,
            workers=int(n.get("workers", 1)),
            merge_fraction=float(n.get("merge_fraction", 0.1)),
            degenerate_fraction=float(n.get("degenerate_fraction", 0.9)),
            root_rel_tol=float(n.get("root_rel_tol", 1e-12)),
            zero_rel_tol=self.zero_rel_tol,
        )

    def evolute(self, curve: CurveBase, interval: Tuple[float, float], samples: int,
                feature: Optional[str] = None) -> Tuple[EvolutePolyline, Optional[CoefficientReport]]:
        """
        渐屈线折线，可选地附带某类特征点处的局部模型报告

        参数:
            feature: 'flattening' / 'vertex' / 'twisting'，取扫描到的第一个该类特征点

        返回:
            (折线, 报告或 None)
        """
        polyline = self._guard("evolute polyline", evolute_polyline, curve, interval, samples, tol=self.tol)
        if feature is None:
            return polyline, None
        kinds, report_fn, missing = FEATURE_REPORTS[feature]
        scan = self.analyze(curve, interval, samples)
        candidates = [p for p in scan if p.kind in kinds]
        if not candidates:
            raise missing(f"no {feature} found in [{interval[0]}, {interval[1]}]")
        t0 = candidates[0].t
        self.logger.info(f"Local {feature} report at t={t0:.17g}")
        report = self._guard(f"{feature} report", report_fn, curve, t0)
        return polyline, report

    def strata(self, curve: CurveBase, t0: float, k: int = 5) -> Dict[str, Any]:
        """在 t0 处的 jet 系数及 C、F、V、T 分层值"""
        coeffs = self._guard("jet coefficients", jet_coefficients, curve, t0, k)
        values = stratum_values(coeffs)
        return {
            "t": float(t0),
            "a": list(coeffs.a),
            "b": list(coeffs.b),
            "c": list(coeffs.c),
            "values": values.as_dict(),
        }

    def jets(self, curve: CurveBase, t0: float, degree: int) -> List[Dict[str, Any]]:
        """各分量在 t0 处的 Taylor 系数，每个 (分量, 阶) 一行"""
        gamma = self._guard("component jets", curve.jet3, t0, degree)
        rows = []
        for name, part in zip("xyz", gamma.components):
            for j, value in enumerate(np.asarray(part.coefficients, dtype=float)):
                rows.append({"component": name, "order": j, "coefficient": float(value)})
        return rows

    def bifurcation(self, family: DeformationFamily, grid: int,
                    strata: Tuple[str, ...] = STRATA) -> BifurcationResult:
        """
        追踪分岔集并生成切锥报告

        参数:
            family: 双参数尖点族
            grid: 每个方向的网格线数
            strata: 需要追踪的分层

        返回:
            BifurcationResult（各分层轨迹与报告）
        """
        t0 = self._guard("cusp location", locate_cusp, family, tol=self.tol)
        workers = int(self.numerics.get("workers", 1))
        loci = {}
        for name in strata:
            loci[name] = self._guard(f"stratum {name}", trace_bifurcation, family, name,
                                     None, grid, t0, self.tol, workers)

        report: Dict[str, Any] = {"t0": t0, "strata": {}}
        reference = None
        if "F" in loci and loci["F"].tangent_direction is not None:
            reference = loci["F"].tangent_direction
        for name, locus in loci.items():
            entry: Dict[str, Any] = {"points": len(locus)}
            if name == "C":
                entry["extras"] = dict(locus.extras)
            elif locus.tangent_direction is not None:
                try:
                    against = loci["F"] if reference is not None and name != "F" else None
                    entry["cone"] = self._guard(f"tangent cone of {name}", tangent_cone, locus, reference,
                                                against).as_dict()
                except InsufficientPoints as e:
                    self.logger.warning(f"Tangent cone of {name} unavailable: {str(e)}")
                    entry["cone"] = None
            if len(locus):
                entry["max_residual"] = float(np.max(locus.residuals))
            report["strata"][name] = entry

        try:
            report["genericity"] = frs_genericity(family, t0, self.tol).as_dict()
            report["predictions"] = bifurcation_predictions(family, t0).as_dict()
            report["distance_squared"] = cusp_distance_squared_versality(family, t0, tol=self.zero_rel_tol).as_dict()
        except ValueError as e:
            self.logger.warning(f"Closed-form predictions unavailable: {str(e)}")
        return BifurcationResult(t0, loci, report)
