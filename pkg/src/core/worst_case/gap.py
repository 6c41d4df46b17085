"""
平均统计与最坏情况的差距
对同一网络与上界同时给出MC分布与最坏情况搜索结果，并做上界扫描
"""

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional

import numpy as np
import pandas as pd

from config.experiment_config import AttackConfig, VariationModel
from config.lab_config import LabConfig
from src.core.device.quantization import parameter_steps
from src.core.device.variation import StepLike, sample_variation
from src.core.errors import DistributionError
from src.core.evaluation.monte_carlo import run_monte_carlo
from src.core.nn.mlp import Dataset, Mlp
from src.core.worst_case.pga import AttackResult, evaluate_perturbation, pga_attack
from src.utils.logging_manager import get_attack_logger

logger = get_attack_logger(__name__)


@dataclass
class GapReport:
    """MC 与最坏情况的差距"""

    clean_acc: float
    mc_mean: float
    mc_min: float
    attack_acc: float
    gap: float
    promoted: bool
    n_mc: int
    sigma: float
    th_g: float
    attack: AttackResult

    def to_dict(self) -> Dict:
        return {
            "clean_acc": self.clean_acc,
            "mc_mean": self.mc_mean,
            "mc_min": self.mc_min,
            "attack_acc": self.attack_acc,
            "gap": self.gap,
            "promoted": self.promoted,
            "n_mc": self.n_mc,
            "sigma": self.sigma,
            "th_g": self.th_g,
            "restarts": self.attack.restarts,
            "steps": self.attack.steps,
        }


def mc_gap_report(model: Mlp, dataset: Dataset, vm: VariationModel, cfg: AttackConfig,
                  n_mc: int, master_seed: int = 0, steps: Optional[StepLike] = None,
                  jobs: int = 1) -> GapReport:
    """MC 最小值与最坏情况搜索的差距 gap = mc_min − attack_acc

    若某次MC试验比搜索结果更差，则用 (master_seed, 试验编号) 重新生成该试验的 ΔW
    并提升为搜索结果，因此 gap ≥ 0 恒成立。

    Args:
        model: 部署后的网络
        dataset: 评估数据集
        vm: 器件变化模型
        cfg: 搜索配置
        n_mc: MC次数（≥100）
        master_seed: MC主种子
        steps: 逐参数量化步长
        jobs: 进程数

    Returns:
        差距报告
    """
    if n_mc < LabConfig.GAP_MIN_MC:
        raise DistributionError(f"n_mc必须≥{LabConfig.GAP_MIN_MC}，实际为 {n_mc}", n_mc=n_mc)
    if steps is None:
        steps = parameter_steps(model, vm.quantization)

    clean_acc, _ = evaluate_perturbation(model, dataset, np.zeros(model.param_count))
    dist = run_monte_carlo(model, dataset, vm, None, n_mc, master_seed, steps=steps, jobs=jobs)
    attack = pga_attack(model, dataset, vm, cfg, steps=steps, jobs=jobs)

    mc_min = float(dist.accuracies[0])
    promoted = mc_min < attack.attacked_accuracy
    if promoted:
        worst = dist.worst_trial
        delta_w = sample_variation(model.param_count, vm, None, int(dist.trial_seeds[worst]), steps)
        acc, loss = evaluate_perturbation(model, dataset, delta_w)
        logger.info(f"MC第 {worst} 次试验 ({acc:.4f}) 低于搜索结果 ({attack.attacked_accuracy:.4f})，提升为最坏情况")
        attack = AttackResult(
            delta_w=delta_w,
            attacked_accuracy=acc,
            attacked_loss=loss,
            loss_trace=[],
            restart_index=-1,
            th_g=vm.th_g,
            steps=attack.steps,
            restarts=attack.restarts,
            restart_accuracies=attack.restart_accuracies,
            promoted=True,
        )

    report = GapReport(
        clean_acc=clean_acc,
        mc_mean=float(np.mean(dist.accuracies)),
        mc_min=mc_min,
        attack_acc=attack.attacked_accuracy,
        gap=mc_min - attack.attacked_accuracy,
        promoted=promoted,
        n_mc=n_mc,
        sigma=vm.sigma,
        th_g=vm.th_g,
        attack=attack,
    )
    logger.info(f"差距报告: MC均值 {report.mc_mean:.4f}, MC最小 {mc_min:.4f}, 最坏情况 {report.attack_acc:.4f}")
    return report


def attack_bound_sweep(model: Mlp, dataset: Dataset, vm: VariationModel, cfg: AttackConfig,
                       th_grid: Iterable[float], steps: Optional[StepLike] = None,
                       jobs: int = 1) -> pd.DataFrame:
    """在上界网格上做最坏情况搜索

    网格按升序处理；上一个上界的扰动在更大的盒内仍然可行，作为候选参与比较，
    因此报告的精度随上界单调不增。

    Returns:
        表格 th_g,attack_acc,restart_index
    """
    if steps is None:
        steps = parameter_steps(model, vm.quantization)

    rows: List[Dict] = []
    previous: Optional[AttackResult] = None
    for th_g in sorted(float(t) for t in th_grid):
        bounded = VariationModel(**{**vm.model_dump(), "th_g": th_g, "th_wv": min(vm.th_wv, th_g)})
        result = pga_attack(model, dataset, bounded, cfg, steps=steps, jobs=jobs)
        if previous is not None and previous.attacked_accuracy < result.attacked_accuracy:
            result = previous
        rows.append({"th_g": th_g, "attack_acc": result.attacked_accuracy, "restart_index": result.restart_index})
        previous = result

    return pd.DataFrame(rows, columns=["th_g", "attack_acc", "restart_index"])
