"""
桌面规模合成数据集
二维二分类：blobs / moons / xor_grid，标签按 i % 2 交替，类别严格均衡
"""

from typing import Callable, Dict

import numpy as np

from src.core.errors import UnknownDatasetError
from src.core.nn.mlp import Dataset
from src.core.nn.rng import StreamDomain, standard_normal, stream_generator
from src.utils.logging_manager import get_data_logger

logger = get_data_logger(__name__)

BLOB_CENTERS = np.array([[-1.0, -1.0], [1.0, 1.0]])


def _blobs(labels: np.ndarray, gen: np.random.Generator) -> np.ndarray:
    """两个高斯团，中心 (−1,−1) 与 (1,1)"""
    return BLOB_CENTERS[labels].copy()


def _moons(labels: np.ndarray, gen: np.random.Generator) -> np.ndarray:
    """两个交错的半月"""
    t = gen.uniform(0.0, np.pi, size=labels.shape[0])
    upper = np.stack([np.cos(t), np.sin(t)], axis=1)
    lower = np.stack([1.0 - np.cos(t), 0.5 - np.sin(t)], axis=1)
    return np.where(labels[:, None] == 0, upper, lower)


def _xor_grid(labels: np.ndarray, gen: np.random.Generator) -> np.ndarray:
    """异或象限：第一/三象限为类 0，第二/四象限为类 1"""
    n = labels.shape[0]
    magnitude = gen.uniform(0.1, 1.0, size=(n, 2))
    sign_x = np.where(gen.random(n) < 0.5, -1.0, 1.0)
    sign_y = np.where(labels == 0, sign_x, -sign_x)
    return magnitude * np.stack([sign_x, sign_y], axis=1)


GENERATORS: Dict[str, Callable[[np.ndarray, np.random.Generator], np.ndarray]] = {
    "blobs": _blobs,
    "moons": _moons,
    "xor_grid": _xor_grid,
}


def gen_dataset(kind: str, n: int, noise: float, seed: int) -> Dataset:
    """生成合成数据集

    Args:
        kind: 生成器名称
        n: 样本数（≥4）
        noise: 叠加的高斯噪声标准差
        seed: 随机种子

    Returns:
        二维二分类数据集，由种子唯一确定
    """
    if kind not in GENERATORS:
        raise UnknownDatasetError(kind, sorted(GENERATORS))
    if n < 4:
        raise ValueError(f"n必须≥4，实际为 {n}")
    if noise < 0:
        raise ValueError(f"noise不能为负: {noise}")

    gen = stream_generator(seed, StreamDomain.DATASET)
    labels = np.arange(n) % 2
    points = GENERATORS[kind](labels, gen)
    if noise > 0:
        points = points + noise * standard_normal(gen, 2 * n).reshape(n, 2)

    logger.info(f"生成数据集 {kind}: n={n}, noise={noise}, seed={seed}")
    return Dataset(points, labels, n_classes=2)
