"""
SWIM 与朴素写验证策略的配对对比
同一个种子下各掩码共用MC随机流，差异只来自掩码本身
"""

from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
import pandas as pd
from scipy import stats

from config.experiment_config import VariationModel
from config.lab_config import LabConfig
from src.core.device.quantization import parameter_steps
from src.core.device.variation import StepLike
from src.core.evaluation.monte_carlo import run_monte_carlo
from src.core.nn.mlp import Dataset, Mlp
from src.core.nn.rng import StreamDomain, derive_stream_seed, stream_generator
from src.core.swim.planner import ScoreLike, rank_and_select, verified_count
from src.core.swim.sensitivity import magnitude_scores, sensitivity
from src.utils.logging_manager import get_simulation_logger

logger = get_simulation_logger(__name__)

# 与 SWIM 对比的朴素掩码
BASELINES = ("random", "magnitude", "layer_order")


def random_mask(param_count: int, budget_fraction: float, master_seed: int, seed_index: int) -> np.ndarray:
    """与预算等大的均匀随机掩码"""
    gen = stream_generator(master_seed, StreamDomain.RANDOM_MASK, seed_index, 0)
    mask = np.zeros(param_count, dtype=bool)
    mask[gen.permutation(param_count)[:verified_count(budget_fraction, param_count)]] = True
    return mask


def layer_order_mask(param_count: int, budget_fraction: float) -> np.ndarray:
    """按层序验证: 展平顺序（逐层，先权重后偏置）的前 ⌈budget×n⌉ 个参数"""
    mask = np.zeros(param_count, dtype=bool)
    mask[:verified_count(budget_fraction, param_count)] = True
    return mask


def sign_test(wins: int, losses: int) -> float:
    """单侧配对符号检验 p 值，平局不计"""
    if wins + losses == 0:
        return 1.0
    return float(stats.binomtest(wins, wins + losses, 0.5, alternative="greater").pvalue)


@dataclass
class SwimComparison:
    """配对对比报告"""

    budget: float
    rows: pd.DataFrame              # seed,swim_mean,random_mean,magnitude_mean,layer_order_mean

    @property
    def n_seeds(self) -> int:
        return len(self.rows)

    def wins(self, baseline: str) -> int:
        """SWIM 平均精度不低于基线的种子数"""
        return int((self.rows["swim_mean"] >= self.rows[f"{baseline}_mean"]).sum())

    def p_value(self, baseline: str) -> float:
        diff = self.rows["swim_mean"] - self.rows[f"{baseline}_mean"]
        return sign_test(int((diff > 0).sum()), int((diff < 0).sum()))

    def to_dict(self) -> Dict:
        summary = {"budget": self.budget, "n_seeds": self.n_seeds}
        for name in ("swim",) + BASELINES:
            summary[f"{name}_mean"] = float(self.rows[f"{name}_mean"].mean())
        for baseline in BASELINES:
            summary[f"wins_vs_{baseline}"] = self.wins(baseline)
            summary[f"p_value_vs_{baseline}"] = self.p_value(baseline)
        return summary


def swim_vs_random(model: Mlp, dataset: Dataset, vm: VariationModel, budget: float,
                   n_seeds: int = LabConfig.SWIM_COMPARE_SEEDS, n_mc: int = LabConfig.SWIM_MC_RUNS,
                   master_seed: int = 0, scores: Optional[ScoreLike] = None,
                   steps: Optional[StepLike] = None, jobs: int = 1) -> SwimComparison:
    """SWIM 掩码对比等大的随机掩码、幅值排序掩码与层序掩码

    Args:
        model: 部署后的网络
        dataset: 评估数据集
        vm: 器件变化模型
        budget: 写验证预算
        n_seeds: 配对种子数（≥20）
        n_mc: 每个种子每种掩码的MC次数
        master_seed: 主种子
        scores: 预先计算的敏感度
        steps: 逐参数量化步长
        jobs: 进程数

    Returns:
        配对对比报告
    """
    if n_seeds < LabConfig.SWIM_COMPARE_SEEDS:
        raise ValueError(f"n_seeds必须≥{LabConfig.SWIM_COMPARE_SEEDS}，实际为 {n_seeds}")
    if steps is None:
        steps = parameter_steps(model, vm.quantization)
    if scores is None:
        scores = sensitivity(model, dataset, vm, steps)

    swim_mask = rank_and_select(scores, budget, vm.verify_cost_V).mask
    magnitude_mask = rank_and_select(magnitude_scores(model), budget, vm.verify_cost_V).mask
    layer_mask = layer_order_mask(model.param_count, budget)

    rows = []
    for s in range(n_seeds):
        mc_seed = derive_stream_seed(master_seed, StreamDomain.RANDOM_MASK, s, 1)
        masks = {
            "swim": swim_mask,
            "random": random_mask(model.param_count, budget, master_seed, s),
            "magnitude": magnitude_mask,
            "layer_order": layer_mask,
        }
        row = {"seed": s}
        for name, mask in masks.items():
            dist = run_monte_carlo(model, dataset, vm, mask, n_mc, mc_seed, steps=steps, jobs=jobs)
            row[f"{name}_mean"] = float(np.mean(dist.accuracies))
        rows.append(row)

    columns = ["seed", "swim_mean"] + [f"{name}_mean" for name in BASELINES]
    comparison = SwimComparison(budget, pd.DataFrame(rows, columns=columns))
    logger.info(f"预算 {budget}: SWIM 不低于随机掩码的种子数 {comparison.wins('random')}/{n_seeds}")
    return comparison
