"""
权重敏感度
基于损失的二阶泰勒展开：零均值噪声下一阶项期望为零，
期望损失增量 ≈ ½·Σ σ_i²·H_ii，H 取 Gauss-Newton 对角近似
"""

import math
from dataclasses import dataclass
from typing import Literal, Optional, Tuple

import numpy as np

from config.experiment_config import VariationModel
from src.core.device.quantization import parameter_steps
from src.core.device.variation import StepLike
from src.core.errors import EmptyBatchError, NonFiniteError
from src.core.nn.mlp import Dataset, Mlp, activation_grad, forward_trace, softmax
from src.utils.file_handling.artifacts import sha256_hex
from src.utils.logging_manager import get_simulation_logger

logger = get_simulation_logger(__name__)

Objective = Literal["cross_entropy", "squared_error"]


@dataclass(frozen=True, eq=False)
class SensitivityScores:
    """逐参数敏感度分数"""

    scores: np.ndarray
    method: str
    dataset_digest: str

    def __post_init__(self):
        scores = np.array(self.scores, dtype=np.float64, copy=True)
        if scores.ndim != 1 or not np.all(np.isfinite(scores)) or np.any(scores < 0):
            raise NonFiniteError("敏感度分数必须是有限的非负向量")
        scores.setflags(write=False)
        object.__setattr__(self, "scores", scores)

    @property
    def param_count(self) -> int:
        return self.scores.shape[0]


def dataset_digest(dataset: Dataset) -> str:
    """数据集内容摘要"""
    return sha256_hex(dataset.inputs.tobytes() + dataset.targets.tobytes())


def logit_jacobian(model: Mlp, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """单个样本的 logits 及其对展平参数的雅可比矩阵

    Args:
        model: 网络
        x: 单个样本 [d]

    Returns:
        (logits [C], 雅可比 [C × P])
    """
    pre_activations, activations = forward_trace(model, x.reshape(1, -1))
    n_out = model.n_classes
    jacobian = np.zeros((n_out, model.param_count), dtype=np.float64)
    delta = np.eye(n_out)
    slices = model.layer_slices()
    for index in range(len(model.layers) - 1, -1, -1):
        layer = model.layers[index]
        delta = delta * activation_grad(pre_activations[index][0], layer.activation)
        w_slice, b_slice = slices[index]
        jacobian[:, w_slice] = (delta[:, :, None] * activations[index][0][None, None, :]).reshape(n_out, -1)
        jacobian[:, b_slice] = delta
        if index > 0:
            delta = delta @ layer.weight
    return activations[-1][0], jacobian


def gauss_newton_diagonal(model: Mlp, dataset: Dataset, objective: Objective = "cross_entropy") -> np.ndarray:
    """数据集平均的 Gauss-Newton 对角

    每个样本的贡献为 diag(Jᵀ M J)，交叉熵取 M = diag(p) − ppᵀ，平方误差取 M = 2I。
    逐参数用 math.fsum 精确求和，结果与样本顺序无关。
    """
    if dataset.n < 1:
        raise EmptyBatchError("数据集为空")
    per_sample = np.empty((dataset.n, model.param_count), dtype=np.float64)
    for s in range(dataset.n):
        logits, jacobian = logit_jacobian(model, dataset.inputs[s])
        if objective == "cross_entropy":
            p = softmax(logits.reshape(1, -1))[0]
            curvature = np.diag(p) - np.outer(p, p)
        else:
            curvature = 2.0 * np.eye(model.n_classes)
        per_sample[s] = np.maximum(np.sum((curvature @ jacobian) * jacobian, axis=0), 0.0)

    diagonal = np.array([math.fsum(per_sample[:, i]) for i in range(model.param_count)]) / dataset.n
    if not np.all(np.isfinite(diagonal)):
        raise NonFiniteError("Gauss-Newton 对角包含 NaN/Inf")
    return diagonal


def sensitivity(model: Mlp, dataset: Dataset, vm: VariationModel, steps: Optional[StepLike] = None,
                objective: Objective = "cross_entropy") -> SensitivityScores:
    """逐参数敏感度 score_i = ½·(σ·step_i)²·Ĥ_ii

    Args:
        model: 部署后的网络
        dataset: 非空数据集
        vm: 器件变化模型
        steps: 逐参数量化步长，缺省按 vm.bits 由网络计算
        objective: 损失类型

    Returns:
        敏感度分数
    """
    if steps is None:
        steps = parameter_steps(model, vm.quantization)
    digest = dataset_digest(dataset)
    if vm.sigma == 0.0:
        return SensitivityScores(np.zeros(model.param_count), "gauss_newton_diag", digest)

    sigma_i = vm.sigma * np.broadcast_to(np.asarray(steps, dtype=np.float64), (model.param_count,))
    scores = 0.5 * sigma_i ** 2 * gauss_newton_diagonal(model, dataset, objective)
    logger.info(f"敏感度计算完成: {model.param_count} 个参数，最大分数 {scores.max():.3e}")
    return SensitivityScores(scores, "gauss_newton_diag", digest)


def magnitude_scores(model: Mlp) -> SensitivityScores:
    """按权重绝对值排序的朴素基线"""
    return SensitivityScores(np.abs(model.flatten()), "magnitude", "")
