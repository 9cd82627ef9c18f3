"""
曲线工具包使用的常量数据
包含模型族、命令集合、取值范围与绘图配色
"""

# 模型族 G：FRS 分层的标准模型
MODEL_FAMILY_G = {
    "kind": "family",
    "label": "G",
    "x": "t^2 + t^3 + t^4",
    "y": "s1*t + t^3 + t^4",
    "z": "s2*t + t^3 - t^4",
    "t_range": [-0.5, 0.5],
    "s_box": [[-0.2, 0.2], [-0.2, 0.2]],
}

# 正则平坦点模型 (t, t^2, t^4)
MODEL_FLATTENING = {
    "kind": "curve",
    "label": "FR-model",
    "x": "t",
    "y": "t^2",
    "z": "t^4",
    "t_range": [-1.0, 1.0],
}

COMMANDS = ("analyze", "evolute", "bifurcation", "strata", "jet")
FORMATS = ("csv", "json", "svg")
FEATURE_KINDS = ("flattening", "vertex", "twisting")
STRATUM_NAMES = ("C", "F", "V", "T")
RENDER_STYLES = ("simple", "detailed")

# 默认运行配置，与 manifest.yaml 中 spec.config 保持一致
DEFAULTS = {
    "degree": 12,
    "max_degree": 24,
    "samples_per_unit": 2048,
    "grid": 256,
    "tol": 1e-8,
    "div_eps": 1e-12,
    "zero_rel_tol": 1e-8,
    "root_rel_tol": 1e-12,
    "merge_fraction": 0.1,
    "degenerate_fraction": 0.9,
    "workers": 4,
    "output_dir": "output",
    "format": "csv",
    "style": "detailed",
    "debug": False,
}

# 合法区间之外为错误，区间内但超出建议值为警告
LIMITS = {
    "min_samples": 16,
    "max_samples_warn": 1_000_000,
    "min_grid": 8,
    "max_grid_warn": 1024,
    "min_degree_warn": 6,
}

# 按标签顺序分配颜色
PALETTE = (
    "#1f77b4",  # 蓝
    "#d62728",  # 红
    "#2ca02c",  # 绿
    "#9467bd",  # 紫
    "#ff7f0e",  # 橙
    "#8c564b",
    "#e377c2",
    "#17becf",
)

# 分层名称到颜色的固定映射，保证分岔图之间可比
STRATUM_COLORS = {
    "C": "#000000",
    "F": PALETTE[0],
    "V": PALETTE[1],
    "T": PALETTE[2],
}

AXIS_COLOR = "#999999"
