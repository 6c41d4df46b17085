"""
选择性写验证计划
按敏感度降序选出预算内的参数做写验证，统计归一化写周期，并在预算网格上寻找满足精度目标的最小预算
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from config.experiment_config import VariationModel
from config.lab_config import LabConfig
from src.core.device.quantization import parameter_steps
from src.core.device.variation import StepLike
from src.core.evaluation.kpp import kpp
from src.core.evaluation.monte_carlo import run_monte_carlo
from src.core.nn.mlp import Dataset, Mlp, accuracy
from src.core.swim.sensitivity import SensitivityScores, sensitivity
from src.utils.logging_manager import get_simulation_logger

logger = get_simulation_logger(__name__)

ScoreLike = Union[SensitivityScores, np.ndarray, Sequence[float]]


@dataclass(frozen=True, eq=False)
class WriteVerifyPlan:
    """写验证计划"""

    order: np.ndarray               # 分数降序的参数索引，平局时索引小者在前
    budget_fraction: float
    mask: np.ndarray
    normalized_cycles: float
    method: str = "gauss_newton_diag"
    group_size: int = 1

    @property
    def mask_count(self) -> int:
        return int(np.count_nonzero(self.mask))

    def to_dict(self) -> Dict:
        """计划文件 JSON 内容"""
        return {
            "order": [int(i) for i in self.order],
            "budget": self.budget_fraction,
            "mask_count": self.mask_count,
            "normalized_cycles": self.normalized_cycles,
            "method": self.method,
            "group_size": self.group_size,
        }


def cycles_for_count(n_verified: int, n: int, verify_cost_V: float) -> float:
    """(n_unverified·1 + n_verified·V) / (n·V)"""
    if verify_cost_V < 1:
        raise ValueError(f"verify_cost_V不能小于1，实际为 {verify_cost_V}")
    return ((n - n_verified) + n_verified * float(verify_cost_V)) / (n * float(verify_cost_V))


def normalized_write_cycles(plan: WriteVerifyPlan, vm: VariationModel) -> float:
    """相对全量写验证的写周期，1.0 为全部验证，1/V 为不验证"""
    return cycles_for_count(plan.mask_count, plan.mask.shape[0], vm.verify_cost_V)


def verified_count(budget_fraction: float, n: int) -> int:
    """⌈budget × n⌉，按十进制精确计算"""
    return math.ceil(Fraction(str(budget_fraction)) * n)


def rank_and_select(scores: ScoreLike, budget_fraction: float,
                    verify_cost_V: float = LabConfig.VERIFY_COST_V,
                    group_size: int = LabConfig.VERIFY_GROUP_SIZE) -> WriteVerifyPlan:
    """按分数降序选出前 ⌈budget×n⌉ 个参数做写验证

    Args:
        scores: 敏感度分数
        budget_fraction: 预算比例 [0, 1]
        verify_cost_V: 写验证器件的平均写周期
        group_size: 写验证粒度，>1 时对连续索引分组取并

    Returns:
        写验证计划
    """
    if not 0 <= budget_fraction <= 1:
        raise ValueError(f"budget_fraction必须位于[0, 1]，实际为 {budget_fraction}")
    if group_size < 1:
        raise ValueError(f"group_size必须≥1，实际为 {group_size}")
    method = scores.method if isinstance(scores, SensitivityScores) else "gauss_newton_diag"
    values = scores.scores if isinstance(scores, SensitivityScores) else np.asarray(scores, dtype=np.float64)

    n = values.shape[0]
    order = np.argsort(-values, kind="stable")
    mask = np.zeros(n, dtype=bool)
    mask[order[:verified_count(budget_fraction, n)]] = True
    if group_size > 1 and mask.any():
        groups = np.arange(n) // group_size
        mask = np.isin(groups, np.unique(groups[mask]))

    return WriteVerifyPlan(
        order=order,
        budget_fraction=float(budget_fraction),
        mask=mask,
        normalized_cycles=cycles_for_count(int(mask.sum()), n, verify_cost_V),
        method=method,
        group_size=group_size,
    )


@dataclass
class SwimCurve:
    """预算网格上的精度/写周期曲线"""

    feasible: bool
    selected_budget: Optional[float]
    plan: Optional[WriteVerifyPlan]
    clean_accuracy: float
    target_drop: float
    min_accuracy: Optional[float] = None
    rows: List[Dict] = field(default_factory=list)

    @property
    def threshold(self) -> float:
        """平均精度门限: 给定 min_accuracy 时取它，否则为 clean − ΔAcc"""
        return self.min_accuracy if self.min_accuracy is not None else self.clean_accuracy - self.target_drop

    def to_frame(self) -> pd.DataFrame:
        """曲线表: budget,mean_acc,kpp1,cycles"""
        return pd.DataFrame(self.rows, columns=["budget", "mean_acc", "kpp1", "cycles"])


def meet_accuracy_target(model: Mlp, dataset: Dataset, vm: VariationModel, target_drop: float,
                         budget_grid: Sequence[float] = LabConfig.BUDGET_GRID,
                         n_mc: int = LabConfig.SWIM_MC_RUNS, master_seed: int = 0,
                         scores: Optional[ScoreLike] = None, steps: Optional[StepLike] = None,
                         group_size: int = LabConfig.VERIFY_GROUP_SIZE, jobs: int = 1,
                         min_accuracy: Optional[float] = None) -> SwimCurve:
    """在升序预算网格上寻找 MC 平均精度达到门限的最小预算

    门限为 clean − ΔAcc；给定 min_accuracy 时改用这个绝对精度门限。

    每个预算都用同一个主种子评估（公共随机数），完整曲线始终返回。

    Args:
        model: 部署后的网络
        dataset: 评估数据集
        vm: 器件变化模型
        target_drop: 允许的平均精度下降 ΔAcc
        budget_grid: 升序预算网格
        n_mc: 每个预算的MC次数
        master_seed: MC主种子
        scores: 预先计算的敏感度，缺省时现算
        steps: 逐参数量化步长
        group_size: 写验证粒度
        jobs: 进程数
        min_accuracy: 绝对平均精度门限，给定时取代 target_drop

    Returns:
        曲线与选中的计划；无预算满足时 feasible=False
    """
    if list(budget_grid) != sorted(budget_grid) or any(b < 0 or b > 1 for b in budget_grid):
        raise ValueError("budget_grid必须升序且取值在[0, 1]之间")
    if min_accuracy is not None and not 0 <= min_accuracy <= 1:
        raise ValueError(f"min_accuracy必须位于[0, 1]，实际为 {min_accuracy}")
    if steps is None:
        steps = parameter_steps(model, vm.quantization)
    if scores is None:
        scores = sensitivity(model, dataset, vm, steps)

    clean = accuracy(model, dataset)
    curve = SwimCurve(False, None, None, clean, target_drop, min_accuracy)
    threshold = curve.threshold

    for budget in budget_grid:
        plan = rank_and_select(scores, budget, vm.verify_cost_V, group_size)
        dist = run_monte_carlo(model, dataset, vm, plan.mask, n_mc, master_seed, steps=steps, jobs=jobs)
        mean_acc = float(np.mean(dist.accuracies))
        curve.rows.append({
            "budget": float(budget),
            "mean_acc": mean_acc,
            "kpp1": kpp(dist, 1.0).value,
            "cycles": plan.normalized_cycles,
        })
        if not curve.feasible and mean_acc >= threshold:
            curve.feasible, curve.selected_budget, curve.plan = True, float(budget), plan
            logger.info(f"预算 {budget} 满足目标: 平均精度 {mean_acc:.4f} ≥ {threshold:.4f}")

    if not curve.feasible:
        logger.warning(f"预算网格内没有平均精度达到 {threshold:.4f} 的预算")
    return curve
