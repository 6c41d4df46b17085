"""
CSV 数据集读写
行格式 label,f1,...,fd；逐行严格校验，错误信息带行号
"""

import csv
import math
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from src.core.errors import DatasetFormatError
from src.core.nn.mlp import Dataset
from src.utils.logging_manager import get_data_logger

logger = get_data_logger(__name__)


def _parse_label(field: str, path: str, line: int) -> int:
    try:
        label = int(field.strip())
    except ValueError:
        raise DatasetFormatError(f"标签 '{field}' 不是整数", path, line) from None
    if label < 0:
        raise DatasetFormatError(f"标签 {label} 为负", path, line)
    return label


def _parse_feature(field: str, path: str, line: int) -> float:
    try:
        value = float(field.strip())
    except ValueError:
        raise DatasetFormatError(f"特征 '{field}' 不是数值", path, line) from None
    if not math.isfinite(value):
        raise DatasetFormatError(f"特征 '{field}' 不是有限数值", path, line)
    return value


def load_csv_dataset(path: Union[str, Path], has_header: bool = False,
                     n_classes: Optional[int] = None) -> Dataset:
    """读取 CSV 数据集，保持行序

    Args:
        path: 文件路径
        has_header: 首行是否为表头
        n_classes: 类别数，缺省时由最大标签推断

    Returns:
        数据集
    """
    path = str(path)
    labels: List[int] = []
    rows: List[List[float]] = []
    width = None

    with open(path, 'r', encoding='utf-8', newline='') as f:
        for line, record in enumerate(csv.reader(f), start=1):
            if has_header and line == 1:
                continue
            if not record or all(not field.strip() for field in record):
                continue
            if len(record) < 2:
                raise DatasetFormatError("每行至少需要标签和一个特征", path, line)
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise DatasetFormatError(f"列数 {len(record)} 与首行 {width} 不一致", path, line)

            label = _parse_label(record[0], path, line)
            if n_classes is not None and label >= n_classes:
                raise DatasetFormatError(f"标签 {label} 超出类别数 {n_classes}", path, line)
            labels.append(label)
            rows.append([_parse_feature(field, path, line) for field in record[1:]])

    if not rows:
        raise DatasetFormatError("文件中没有数据行", path)

    logger.info(f"读取数据集 {path}: n={len(rows)}, d={width - 1}")
    return Dataset(np.array(rows, dtype=np.float64), np.array(labels, dtype=np.int64), n_classes or 0)


def save_csv_dataset(dataset: Dataset, path: Union[str, Path], header: bool = False) -> Path:
    """写出 CSV 数据集，浮点数用最短往返表示，读回无损"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator="\n")
        if header:
            writer.writerow(["label"] + [f"f{i + 1}" for i in range(dataset.dim)])
        for label, features in zip(dataset.targets, dataset.inputs):
            writer.writerow([int(label)] + [repr(float(v)) for v in features])
    return path
