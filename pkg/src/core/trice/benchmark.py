"""
配对 KPP 基准
所有模型使用同一主种子：每次试验的步长单位噪声对所有模型逐位相同
"""

from dataclasses import dataclass
from typing import Dict, Mapping, Sequence

import numpy as np
import pandas as pd

from config.experiment_config import VariationModel
from config.lab_config import LabConfig
from src.core.evaluation.kpp import kpp
from src.core.evaluation.monte_carlo import AccuracyDistribution, run_monte_carlo
from src.core.nn.mlp import Dataset, Mlp, accuracy
from src.utils.logging_manager import get_simulation_logger

logger = get_simulation_logger(__name__)

BENCHMARK_COLUMNS = ["model", "k", "kpp", "mean_acc", "n_runs", "sigma", "th_g"]


@dataclass
class KppBenchmark:
    """基准结果"""

    table: pd.DataFrame
    distributions: Dict[str, AccuracyDistribution]
    clean_accuracy: Dict[str, float]

    def paired_differences(self, reference: str) -> pd.DataFrame:
        """各模型相对参考模型的逐试验配对差

        Returns:
            表格 model,reference,mean_diff,wins,losses,clean_diff
        """
        base = self.distributions[reference].trial_accuracies
        rows = []
        for name, dist in self.distributions.items():
            if name == reference:
                continue
            diff = dist.trial_accuracies - base
            rows.append({
                "model": name,
                "reference": reference,
                "mean_diff": float(np.mean(diff)),
                "wins": int(np.sum(diff > 0)),
                "losses": int(np.sum(diff < 0)),
                "clean_diff": self.clean_accuracy[name] - self.clean_accuracy[reference],
            })
        return pd.DataFrame(rows, columns=["model", "reference", "mean_diff", "wins", "losses", "clean_diff"])

    def kpp_value(self, model: str, k: float) -> float:
        selected = self.table[(self.table["model"] == model) & (self.table["k"] == k)]
        return float(selected["kpp"].iloc[0])


def kpp_benchmark(models: Mapping[str, Mlp], dataset: Dataset, vm: VariationModel, n_runs: int,
                  k_list: Sequence[float] = LabConfig.KPP_K_LIST, master_seed: int = 0,
                  jobs: int = 1) -> KppBenchmark:
    """同一组噪声流下比较多个模型的均值与 KPP

    Args:
        models: 名称 -> 部署后的网络（保持插入顺序）
        dataset: 评估数据集
        vm: 共享的器件变化模型
        n_runs: MC次数
        k_list: 百分位列表
        master_seed: 共享主种子
        jobs: 进程数

    Returns:
        基准结果，表格列为 model,k,kpp,mean_acc,n_runs,sigma,th_g
    """
    rows = []
    distributions: Dict[str, AccuracyDistribution] = {}
    clean: Dict[str, float] = {}
    for name, model in models.items():
        dist = run_monte_carlo(model, dataset, vm, None, n_runs, master_seed, jobs=jobs)
        distributions[name] = dist
        clean[name] = accuracy(model, dataset)
        mean_acc = float(np.mean(dist.accuracies))
        for k in k_list:
            rows.append({
                "model": name,
                "k": float(k),
                "kpp": kpp(dist, k).value,
                "mean_acc": mean_acc,
                "n_runs": n_runs,
                "sigma": vm.sigma,
                "th_g": vm.th_g,
            })
        logger.info(f"基准 {name}: 均值 {mean_acc:.4f}, 无噪声精度 {clean[name]:.4f}")

    return KppBenchmark(pd.DataFrame(rows, columns=BENCHMARK_COLUMNS), distributions, clean)
