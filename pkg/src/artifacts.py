import csv
import io
import json
import logging
import os
from typing import Any, Dict, Iterable, List, Optional, Sequence

from filelock import FileLock

import numpy as np


def format_number(value: Any) -> str:
    """17 位有效数字，保证浮点数可无损读回"""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if value is None:
        return ""
    return str(value)


def _plain(value: Any) -> Any:
    """numpy 数值与数组转为 JSON 可序列化的 Python 对象"""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        value = float(value)
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def csv_text(columns: Sequence[str], rows: Iterable[Dict[str, Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_number(row.get(col)) for col in columns])
    return buffer.getvalue()


class ArtifactWriter:
    """
    运行产物写入器：CSV / JSON / SVG

    一次运行的所有写入都经过同一个写入器，每个文件在写入时持有文件锁
    """

    def __init__(self, output_dir: str = None, logger: Optional[logging.Logger] = None):
        if output_dir is None:
            base_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
            self.output_dir = os.path.join(base_dir, "output")
        else:
            self.output_dir = output_dir

        self.logger = logger or logging.getLogger(__name__)
        self.written: List[str] = []
        os.makedirs(self.output_dir, exist_ok=True)
        self.logger.debug(f"ArtifactWriter initialized with directory: {self.output_dir}")

    def _write(self, name: str, text: str) -> str:
        path = os.path.join(self.output_dir, name)
        lock = FileLock(path + ".lock", timeout=10)
        try:
            with lock:
                with open(path, "w", encoding="utf-8", newline="") as f:
                    f.write(text)
        except Exception as e:
            self.logger.error(f"Failed to write artifact {path}: {str(e)}", exc_info=True)
            raise OSError(f"cannot write {path}: {e}") from e
        self.written.append(path)
        self.logger.info(f"Artifact written: {path}")
        return path

    def write_csv(self, name: str, columns: Sequence[str], rows: Iterable[Dict[str, Any]]) -> str:
        """
        写入 CSV 表格

        参数:
            name: 文件名
            columns: 列名，同时决定列顺序
            rows: 行字典

        返回:
            写入的文件路径
        """
        return self._write(name, csv_text(columns, rows))

    def write_json(self, name: str, payload: Any) -> str:
        text = json.dumps(_plain(payload), ensure_ascii=False, indent=2, sort_keys=True) + "\n"
        return self._write(name, text)

    def write_svg(self, name: str, svg: str) -> str:
        return self._write(name, svg)


def read_csv(path: str) -> List[Dict[str, Any]]:
    """
    读取本工具写出的 CSV，数值列解析回浮点数

    参数:
        path: 文件路径

    返回:
        行字典列表
    """
    lock = FileLock(path + ".lock", timeout=10)
    with lock:
        with open(path, "r", encoding="utf-8", newline="") as f:
            rows = list(csv.DictReader(f))
    out = []
    for row in rows:
        parsed = {}
        for key, value in row.items():
            try:
                parsed[key] = float(value)
            except (TypeError, ValueError):
                parsed[key] = value
        out.append(parsed)
    return out
