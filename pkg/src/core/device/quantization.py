"""
权重量化
按张量最大绝对值确定步长，把权重映射到对称的离散电导等级
"""

from typing import List, Tuple

import numpy as np

from config.experiment_config import QuantizationSpec
from src.core.errors import QuantizationError
from src.core.nn.mlp import Mlp


def quantize(weights: np.ndarray, spec: QuantizationSpec) -> Tuple[np.ndarray, float]:
    """把张量量化到 2^bits 级对称网格

    step = max_abs(weights) / (2^(bits−1) − 1)，输出 = step × round(w / step)，并钳位到可表示范围。
    全零张量的步长定义为 1（恒等行为）。舍入为四舍六入五成双。

    Args:
        weights: 任意形状的张量
        spec: 量化配置

    Returns:
        (量化后的张量, 步长)
    """
    if not 2 <= spec.bits <= 16:
        raise QuantizationError(f"bits必须位于 [2, 16]，实际为 {spec.bits}", bits=spec.bits)
    weights = np.asarray(weights, dtype=np.float64)
    if not np.all(np.isfinite(weights)):
        raise QuantizationError("待量化张量包含 NaN/Inf")
    max_abs = float(np.max(np.abs(weights))) if weights.size else 0.0
    if max_abs == 0.0:
        return weights.copy(), 1.0
    q_max = 2 ** (spec.bits - 1) - 1
    step = max_abs / q_max
    levels = np.clip(np.round(weights / step), -q_max, q_max)
    return levels * step, step


def _layer_tensors(model: Mlp) -> List[np.ndarray]:
    """每层的权重与偏置共同构成一个量化张量"""
    return [np.concatenate([layer.weight.ravel(), layer.bias]) for layer in model.layers]


def parameter_steps(model: Mlp, spec: QuantizationSpec) -> np.ndarray:
    """逐参数的量化步长向量（与展平参数等长）"""
    steps = []
    for tensor in _layer_tensors(model):
        _, step = quantize(tensor, spec)
        steps.append(np.full(tensor.shape[0], step))
    return np.concatenate(steps)


def deploy(model: Mlp, spec: QuantizationSpec) -> Tuple[Mlp, np.ndarray]:
    """把训练好的网络映射到器件：逐层量化

    Returns:
        (量化后的网络, 逐参数步长向量)
    """
    values, steps = [], []
    for tensor in _layer_tensors(model):
        quantized, step = quantize(tensor, spec)
        values.append(quantized)
        steps.append(np.full(tensor.shape[0], step))
    return model.with_parameters(np.concatenate(values)), np.concatenate(steps)
