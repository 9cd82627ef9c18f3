import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.data_constants import AXIS_COLOR, PALETTE, STRATUM_COLORS
from src.errors import EmptyPlot

SIZE = 600
MARGIN = 0.05


@dataclass
class Polyline:
    """带标签的折线；单个点的折线绘制为标记点"""

    label: str
    points: np.ndarray
    branches: List[np.ndarray] = field(default_factory=list)

    @property
    def is_marker(self) -> bool:
        return len(self.points) == 1


class SvgRenderer:
    """
    折线图渲染器，用于生成曲线与分岔集的 SVG 图
    """

    def __init__(self, logger: Optional[logging.Logger] = None):
        self.logger = logger or logging.getLogger(__name__)

    def render(self, polylines: Sequence[Polyline], viewport: Optional[Tuple[float, float, float, float]] = None,
               style: str = "detailed", title: str = "") -> str:
        """
        渲染 SVG 图

        参数:
            polylines: 待绘制的折线，至少一条含两个以上的点
            viewport: (xmin, ymin, xmax, ymax)；为空时按数据范围加 5% 边距
            style: 渲染风格，可选 'simple', 'detailed'（附图例）

        返回:
            完整的 SVG 文本
        """
        drawable = [p for p in polylines if len(p.points) >= 2 or p.is_marker]
        if not any(len(p.points) >= 2 for p in drawable):
            raise EmptyPlot("nothing to draw: need at least one polyline with two points")

        xmin, ymin, xmax, ymax = viewport or self._fit(drawable)
        width, height = xmax - xmin, ymax - ymin
        scale = SIZE / max(width, height)

        def sx(x: float) -> str:
            return format((x - xmin) * scale, ".3f")

        def sy(y: float) -> str:
            # 数学方向：y 轴向上
            return format((ymax - y) * scale, ".3f")

        w, h = format(width * scale, ".3f"), format(height * scale, ".3f")
        out = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w} {h}" width="{w}" height="{h}">',
        ]
        if title:
            out.append(f"<title>{self._escape(title)}</title>")
        if xmin <= 0 <= xmax:
            out.append(f'<line class="axis" x1="{sx(0)}" y1="0" x2="{sx(0)}" y2="{h}" '
                       f'stroke="{AXIS_COLOR}" stroke-width="0.5"/>')
        if ymin <= 0 <= ymax:
            out.append(f'<line class="axis" x1="0" y1="{sy(0)}" x2="{w}" y2="{sy(0)}" '
                       f'stroke="{AXIS_COLOR}" stroke-width="0.5"/>')

        legend = []
        for index, poly in enumerate(drawable):
            color = self._color(poly.label, index)
            if poly.is_marker:
                x, y = poly.points[0]
                out.append(f'<circle cx="{sx(x)}" cy="{sy(y)}" r="3" fill="{color}">'
                           f"<title>{self._escape(poly.label)}</title></circle>")
            else:
                parts = poly.branches or [poly.points]
                d = " ".join(
                    "M " + " L ".join(f"{sx(x)} {sy(y)}" for x, y in branch)
                    for branch in parts if len(branch) >= 1
                )
                out.append(f'<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5">'
                           f"<title>{self._escape(poly.label)}</title></path>")
            legend.append((poly.label, color))

        if style == "detailed":
            for row, (label, color) in enumerate(legend):
                y = 14 + 14 * row
                out.append(f'<text x="8" y="{y}" font-family="sans-serif" font-size="11" '
                           f'fill="{color}">{self._escape(label)}</text>')
        out.append("</svg>")
        self.logger.debug(f"Rendered {len(drawable)} polyline(s) in style {style}")
        return "\n".join(out) + "\n"

    def _fit(self, polylines: Sequence[Polyline]) -> Tuple[float, float, float, float]:
        pts = np.vstack([p.points for p in polylines])
        pts = pts[np.all(np.isfinite(pts), axis=1)]
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        span = np.maximum(hi - lo, 1e-12)
        lo, hi = lo - MARGIN * span, hi + MARGIN * span
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    @staticmethod
    def _color(label: str, index: int) -> str:
        return STRATUM_COLORS.get(label, PALETTE[index % len(PALETTE)])

    @staticmethod
    def _escape(text: str) -> str:
        return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def render_svg(polylines: Sequence[Polyline], viewport=None, style: str = "detailed") -> str:
    return SvgRenderer().render(polylines, viewport, style)
