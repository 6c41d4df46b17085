"""
角点穷举
只适用于极小网络：枚举 ΔW ∈ {−th_g·step, +th_g·step}^n 的全部符号组合
"""

import itertools
from typing import Optional, Tuple

import numpy as np

from config.experiment_config import QuantizationSpec
from config.lab_config import LabConfig
from src.core.device.quantization import parameter_steps
from src.core.device.variation import StepLike
from src.core.errors import OracleTooLargeError
from src.core.nn.mlp import Dataset, Mlp
from src.core.worst_case.pga import evaluate_perturbation
from src.utils.logging_manager import get_attack_logger

logger = get_attack_logger(__name__)


def corner_oracle(model: Mlp, dataset: Dataset, th_g: float, steps: Optional[StepLike] = None,
                  guard: int = LabConfig.CORNER_ORACLE_GUARD) -> Tuple[np.ndarray, float]:
    """穷举所有角点，返回精度最低者

    符号模式按字典序枚举（−1 在前），平局保留最先出现的模式。上界为 0 的坐标只有一个取值，
    不参与枚举；th_g = 0 时只有零扰动一个角点。

    Args:
        model: 网络
        dataset: 评估数据集
        th_g: 噪声上界（步长单位）
        steps: 逐参数量化步长，缺省按默认位数计算
        guard: 参数量上限

    Returns:
        (最优角点 ΔW, 对应精度)
    """
    if model.param_count > guard:
        raise OracleTooLargeError(model.param_count, guard)
    if steps is None:
        steps = parameter_steps(model, QuantizationSpec())
    bounds = th_g * np.broadcast_to(np.asarray(steps, dtype=np.float64), (model.param_count,))
    active = np.flatnonzero(bounds > 0)

    best_dw = np.zeros(model.param_count)
    best_acc = None
    for signs in itertools.product((-1.0, 1.0), repeat=active.size):
        delta_w = np.zeros(model.param_count)
        delta_w[active] = np.asarray(signs) * bounds[active]
        acc, _ = evaluate_perturbation(model, dataset, delta_w)
        if best_acc is None or acc < best_acc:
            best_dw, best_acc = delta_w, acc

    logger.info(f"角点穷举完成: {2 ** active.size} 个角点，最低精度 {best_acc:.4f}")
    return best_dw, best_acc
