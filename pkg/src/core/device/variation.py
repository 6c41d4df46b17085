"""
器件变化模型
有界独立高斯权重噪声；写验证通过收紧逐权重上界（th_g → th_wv）来体现
"""

from typing import Optional, Union

import numpy as np

from config.experiment_config import VariationModel
from config.lab_config import LabConfig
from src.core.errors import VariationError
from src.core.nn.mlp import Mlp
from src.core.nn.rng import make_generator, standard_normal
from src.utils.file_handling.artifacts import canonical_json, sha256_hex
from src.utils.logging_manager import get_simulation_logger

logger = get_simulation_logger(__name__)

StepLike = Union[float, np.ndarray]


def empty_mask(param_count: int) -> np.ndarray:
    """全部未验证的掩码"""
    return np.zeros(param_count, dtype=bool)


def full_mask(param_count: int) -> np.ndarray:
    """全部写验证的掩码"""
    return np.ones(param_count, dtype=bool)


def _check_mask(param_count: int, mask: Optional[np.ndarray]) -> np.ndarray:
    if mask is None:
        return empty_mask(param_count)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (param_count,):
        raise VariationError(f"掩码长度 {mask.shape} 与参数量 {param_count} 不一致",
                             expected=param_count, actual=list(mask.shape))
    return mask


def noise_bounds(vm: VariationModel, mask: np.ndarray) -> np.ndarray:
    """逐参数噪声上界（步长单位）：验证过的取 th_wv，否则取 th_g"""
    return np.where(mask, vm.th_wv, vm.th_g).astype(np.float64)


def sample_unit_variation(param_count: int, vm: VariationModel, mask: Optional[np.ndarray],
                          stream_seed: int) -> np.ndarray:
    """在步长单位下采样截断高斯噪声

    ΔW_i ~ N(0, σ²) 经拒绝采样截断到 |ΔW_i| ≤ b_i。被拒绝的坐标在同一随机流上按轮次重采样，
    结果只依赖 (vm, mask, stream_seed)。b_i = 0 的坐标恒为 0。

    Args:
        param_count: 参数量
        vm: 器件变化模型
        mask: 写验证掩码，None 表示全部未验证
        stream_seed: 流种子

    Returns:
        步长单位下的噪声向量
    """
    mask = _check_mask(param_count, mask)
    if vm.sigma == 0.0:
        return np.zeros(param_count, dtype=np.float64)

    bounds = noise_bounds(vm, mask)
    gen = make_generator(stream_seed)
    draws = standard_normal(gen, param_count) * vm.sigma
    pending = np.flatnonzero((np.abs(draws) > bounds) & (bounds > 0))

    rounds = 0
    while pending.size and rounds < LabConfig.MAX_REJECTION_ROUNDS:
        draws[pending] = standard_normal(gen, pending.size) * vm.sigma
        pending = pending[np.abs(draws[pending]) > bounds[pending]]
        rounds += 1

    if pending.size:
        # 上界远小于σ时截断高斯退化为均匀分布
        logger.warning(f"{pending.size} 个坐标在 {rounds} 轮拒绝后仍越界，改为在上界内均匀采样")
        draws[pending] = gen.uniform(-bounds[pending], bounds[pending])

    draws[bounds == 0] = 0.0
    return draws


def sample_variation(param_count: int, vm: VariationModel, mask: Optional[np.ndarray],
                     stream_seed: int, steps: StepLike = 1.0) -> np.ndarray:
    """采样器件变化 ΔW（参数单位）

    Args:
        param_count: 参数量
        vm: 器件变化模型（σ、上界以量化步长为单位）
        mask: 写验证掩码
        stream_seed: 流种子
        steps: 逐参数量化步长或标量

    Returns:
        ΔW 向量，满足 |ΔW_i| ≤ b_i·step_i
    """
    return sample_unit_variation(param_count, vm, mask, stream_seed) * steps


def apply_noise(model: Mlp, delta_w: np.ndarray) -> Mlp:
    """返回参数为 W + ΔW 的新网络，原网络不变"""
    delta_w = np.asarray(delta_w, dtype=np.float64)
    if delta_w.shape != (model.param_count,):
        raise VariationError(f"ΔW 长度 {delta_w.shape} 与参数量 {model.param_count} 不一致",
                             expected=model.param_count, actual=list(delta_w.shape))
    return model.with_parameters(model.flatten() + delta_w)


def variation_digest(vm: VariationModel, mask: Optional[np.ndarray] = None,
                     steps: Optional[StepLike] = None) -> str:
    """器件变化模型与掩码（及步长）的摘要"""
    payload = {"vm": vm.model_dump(), "mask": None, "steps": None}
    if mask is not None:
        payload["mask"] = sha256_hex(np.asarray(mask, dtype=bool).tobytes())
    if steps is not None:
        payload["steps"] = sha256_hex(np.ascontiguousarray(steps, dtype=np.float64).tobytes())
    return sha256_hex(canonical_json(payload))
