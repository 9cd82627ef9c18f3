#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
配置验证模块
用于验证运行配置 (RunConfig) 的有效性
"""

import logging
from typing import Any, Dict, List, Optional, Tuple

from src.data_constants import (
    COMMANDS,
    FEATURE_KINDS,
    FORMATS,
    LIMITS,
    RENDER_STYLES,
    STRATUM_NAMES,
)


class ConfigValidator:
    """配置验证器"""

    def __init__(self, logger: Optional[logging.Logger] = None):
        self.logger = logger or logging.getLogger(__name__)
        self.errors: List[str] = []
        self.warnings: List[str] = []

    def validate(self, config: Dict[str, Any]) -> Tuple[bool, List[str], List[str]]:
        """
        验证配置的有效性

        参数:
            config: 嵌套配置字典，包含 command / input / numerics / scan / output / debug

        返回:
            (is_valid, errors, warnings) 元组
            - is_valid: 配置是否有效
            - errors: 错误列表（导致配置无效）
            - warnings: 警告列表（不影响运行但建议修改）
        """
        self.errors = []
        self.warnings = []

        self._validate_command(config.get("command"), config.get("input"))
        self._validate_numerics(config.get("numerics", {}))
        self._validate_scan(config.get("scan", {}))
        self._validate_output(config.get("output", {}))
        self._validate_debug(config.get("debug", False))

        is_valid = len(self.errors) == 0

        if is_valid:
            self.logger.info("Configuration validation passed")
            for warning in self.warnings:
                self.logger.warning(f"Config warning: {warning}")
        else:
            self.logger.error("Configuration validation failed")
            for error in self.errors:
                self.logger.error(f"Config error: {error}")

        return is_valid, self.errors.copy(), self.warnings.copy()

    def _validate_command(self, command: Any, input_path: Any):
        """验证命令与输入文件"""
        if command not in COMMANDS:
            self.errors.append(f"command 必须是以下之一: {', '.join(COMMANDS)}，当前值: {command}")
        if not isinstance(input_path, str) or not input_path:
            self.errors.append("input 必须是非空的文件路径")

    def _positive(self, section: str, key: str, value: Any):
        if value is None:
            return
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.errors.append(f"{section}.{key} 必须是数字，当前类型: {type(value).__name__}")
        elif not value > 0:
            self.errors.append(f"{section}.{key} 必须大于 0，当前值: {value}")

    def _validate_numerics(self, numerics: Dict[str, Any]):
        """验证数值容差与阶数"""
        for key in ("tol", "div_eps", "zero_rel_tol", "root_rel_tol"):
            self._positive("numerics", key, numerics.get(key))

        degree = numerics.get("degree")
        max_degree = numerics.get("max_degree")
        for key, value in (("degree", degree), ("max_degree", max_degree)):
            if value is not None and (isinstance(value, bool) or not isinstance(value, int)):
                self.errors.append(f"numerics.{key} 必须是整数，当前类型: {type(value).__name__}")
                return
        if degree is not None:
            if degree < 1:
                self.errors.append(f"numerics.degree 必须至少为 1，当前值: {degree}")
            elif max_degree is not None and degree > max_degree:
                self.errors.append(f"numerics.degree ({degree}) 超过 numerics.max_degree ({max_degree})")
            elif degree < LIMITS["min_degree_warn"]:
                self.warnings.append(f"numerics.degree 较低 ({degree})，高阶报告可能失败")

        t_range = numerics.get("t_range")
        if t_range is not None:
            if not isinstance(t_range, (list, tuple)) or len(t_range) != 2:
                self.errors.append("numerics.t_range 必须是 [lo, hi]")
            elif not t_range[0] < t_range[1]:
                self.errors.append(f"numerics.t_range 需要 lo < hi，当前值: {list(t_range)}")

    def _validate_scan(self, scan: Dict[str, Any]):
        """验证采样、网格与特征选项"""
        samples = scan.get("samples")
        if samples is not None:
            if isinstance(samples, bool) or not isinstance(samples, int):
                self.errors.append(f"scan.samples 必须是整数，当前类型: {type(samples).__name__}")
            elif samples < LIMITS["min_samples"]:
                self.errors.append(f"scan.samples 必须至少为 {LIMITS['min_samples']}，当前值: {samples}")
            elif samples > LIMITS["max_samples_warn"]:
                self.warnings.append(f"scan.samples 设置过高 ({samples})，扫描会很慢")

        grid = scan.get("grid")
        if grid is not None:
            if isinstance(grid, bool) or not isinstance(grid, int):
                self.errors.append(f"scan.grid 必须是整数，当前类型: {type(grid).__name__}")
            elif grid < LIMITS["min_grid"]:
                self.errors.append(f"scan.grid 必须至少为 {LIMITS['min_grid']}，当前值: {grid}")
            elif grid > LIMITS["max_grid_warn"]:
                self.warnings.append(f"scan.grid 设置过高 ({grid})，网格扫描会很慢")

        workers = scan.get("workers")
        if workers is not None and (isinstance(workers, bool) or not isinstance(workers, int) or workers < 1):
            self.errors.append(f"scan.workers 必须是正整数，当前值: {workers}")

        for key in ("merge_fraction", "degenerate_fraction"):
            value = scan.get(key)
            if value is not None and not (isinstance(value, (int, float)) and 0 < value <= 1):
                self.errors.append(f"scan.{key} 必须在 (0, 1] 之间，当前值: {value}")

        feature = scan.get("feature")
        if feature is not None and feature not in FEATURE_KINDS:
            self.errors.append(f"scan.feature 必须是以下之一: {', '.join(FEATURE_KINDS)}，当前值: {feature}")

        stratum = scan.get("stratum")
        if stratum is not None and stratum not in STRATUM_NAMES:
            self.errors.append(f"scan.stratum 必须是以下之一: {', '.join(STRATUM_NAMES)}，当前值: {stratum}")

    def _validate_output(self, output: Dict[str, Any]):
        """验证输出配置"""
        fmt = output.get("format")
        if fmt is None:
            self.warnings.append("output.format 未设置，将使用默认值 'csv'")
        elif fmt not in FORMATS:
            self.errors.append(f"output.format 必须是以下之一: {', '.join(FORMATS)}，当前值: {fmt}")

        style = output.get("style")
        if style is not None and style not in RENDER_STYLES:
            self.errors.append(f"output.style 必须是以下之一: {', '.join(RENDER_STYLES)}，当前值: {style}")

        directory = output.get("dir")
        if directory is not None and (not isinstance(directory, str) or not directory.strip()):
            self.errors.append("output.dir 必须是非空字符串")

    def _validate_debug(self, debug: Any):
        """验证调试模式配置"""
        if debug is None:
            self.warnings.append("debug 未设置，将使用默认值 False")
        elif not isinstance(debug, bool):
            self.errors.append(f"debug 必须是布尔值，当前类型: {type(debug).__name__}")


def validate_config(config: Dict[str, Any], logger: Optional[logging.Logger] = None) -> Tuple[bool, List[str], List[str]]:
    """
    验证配置的便捷函数

    参数:
        config: 配置字典
        logger: 日志记录器（可选）

    返回:
        (is_valid, errors, warnings) 元组
    """
    validator = ConfigValidator(logger)
    return validator.validate(config)
