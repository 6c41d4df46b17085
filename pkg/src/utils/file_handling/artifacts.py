"""
产物文件读写工具
规范化JSON、摘要计算以及带配置摘要注释行的CSV写入
"""

import hashlib
import json
import math
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np
import pandas as pd

DIGEST_PREFIX = "# config_digest: "


def _sanitize(obj: Any) -> Any:
    """把numpy标量/数组与非有限浮点数转换为JSON可表示的值"""
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        return _sanitize(obj.item())
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        if math.isnan(obj):
            return "nan"
        return "inf" if obj > 0 else "-inf"
    return obj


def canonical_json(obj: Any) -> str:
    """规范化JSON（键排序、紧凑分隔符），用于摘要"""
    return json.dumps(_sanitize(obj), sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


def sha256_hex(data: Union[str, bytes]) -> str:
    """计算sha256十六进制摘要"""
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: Union[str, Path]) -> str:
    """计算文件的sha256摘要"""
    return sha256_hex(Path(path).read_bytes())


def write_json(path: Union[str, Path], obj: Any) -> Path:
    """写入排版后的JSON文件（键排序，结果字节稳定）"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_sanitize(obj), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False, default=str)
    path.write_text(text + "\n", encoding="utf-8")
    return path


def read_json(path: Union[str, Path]) -> Dict[str, Any]:
    """读取JSON文件"""
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def write_csv(path: Union[str, Path], frame: pd.DataFrame, config_digest: str) -> Path:
    """写入CSV，首行为配置摘要注释

    Args:
        path: 输出路径
        frame: 表格数据
        config_digest: 配置摘要

    Returns:
        输出路径
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        f.write(f"{DIGEST_PREFIX}{config_digest}\n")
        frame.to_csv(f, index=False, lineterminator="\n", float_format=_float_repr)
    return path


def _float_repr(value: float) -> str:
    """浮点数使用最短往返表示（float64无损）"""
    return repr(float(value))


def read_csv(path: Union[str, Path]) -> pd.DataFrame:
    """读取带摘要注释行的CSV"""
    return pd.read_csv(path, comment="#", float_precision="round_trip")


def read_embedded_digest(path: Union[str, Path]) -> str:
    """读取产物文件中嵌入的配置摘要（CSV注释行或JSON字段）"""
    path = Path(path)
    if path.suffix == ".csv":
        with open(path, 'r', encoding='utf-8') as f:
            first = f.readline().rstrip("\n")
        if not first.startswith(DIGEST_PREFIX):
            return ""
        return first[len(DIGEST_PREFIX):]
    data = read_json(path)
    if "config_digest" in data:
        return str(data["config_digest"])
    return str(data.get("meta", {}).get("config_digest", ""))
