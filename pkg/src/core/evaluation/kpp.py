"""
第 k 百分位性能（KPP）与分布摘要
KPP 是升序精度分布的下侧次序统计量，秩按上取整，不做插值
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Tuple

import numpy as np
from scipy import stats

from config.lab_config import LabConfig
from src.core.errors import DistributionError
from src.core.evaluation.monte_carlo import AccuracyDistribution
from src.utils.logging_manager import get_simulation_logger

logger = get_simulation_logger(__name__)


@dataclass(frozen=True)
class KppEstimate:
    """KPP 估计"""

    k: float
    value: float
    rank_index: int


def k_label(k: float) -> str:
    """百分位的报告键，如 1.0 -> "1"，0.1 -> "0.1" """
    return format(k, "g")


def kpp_rank_index(k: float, n_runs: int) -> int:
    """0 基秩 ceil(k/100 × n) − 1，按十进制精确计算"""
    if not 0 < k <= 100:
        raise DistributionError(f"k必须位于 (0, 100]，实际为 {k}", k=k)
    if n_runs < 1:
        raise DistributionError("精度分布为空")
    return max(math.ceil(Fraction(str(k)) * n_runs / 100) - 1, 0)


def kpp(dist: AccuracyDistribution, k: float) -> KppEstimate:
    """第 k 百分位性能：只有最差的 k% 试验低于该值

    Args:
        dist: 精度分布
        k: 百分位，取值 (0, 100]

    Returns:
        KPP 估计
    """
    rank = kpp_rank_index(k, dist.n_runs)
    if dist.n_runs < math.ceil(100 / k):
        logger.warning(f"n_runs={dist.n_runs} 小于 ceil(100/k)={math.ceil(100 / k)}，KPP(k={k}) 退化为最小值附近")
    return KppEstimate(k=k, value=float(dist.accuracies[rank]), rank_index=rank)


def kpp_confidence_interval(dist: AccuracyDistribution, k: float,
                            level: float = LabConfig.CONFIDENCE_LEVEL) -> Tuple[float, float]:
    """k 分位数的无分布二项次序统计量置信区间（仅作参考列）

    Returns:
        (下界, 上界)，均为分布中的观测值
    """
    if dist.n_runs < 1:
        raise DistributionError("精度分布为空")
    p = k / 100.0
    alpha = 1.0 - level
    lower = int(stats.binom.ppf(alpha / 2, dist.n_runs, p))
    upper = int(stats.binom.ppf(1 - alpha / 2, dist.n_runs, p)) + 1
    lower = min(max(lower, 1), dist.n_runs)
    upper = min(max(upper, 1), dist.n_runs)
    return float(dist.accuracies[lower - 1]), float(dist.accuracies[upper - 1])


def summarize(dist: AccuracyDistribution, k_list: Iterable[float] = LabConfig.KPP_K_LIST) -> Dict[str, float]:
    """分布摘要: 均值、总体标准差、极值与各 k 的 KPP

    Returns:
        {"mean", "std", "min", "max", "kpp_1", "kpp_5", ...}
    """
    if dist.n_runs < 1:
        raise DistributionError("精度分布为空")
    summary = {
        "mean": float(np.mean(dist.accuracies)),
        "std": float(np.std(dist.accuracies)),
        "min": float(dist.accuracies[0]),
        "max": float(dist.accuracies[-1]),
    }
    for k in sorted(set(k_list) | {1.0, 5.0}):
        summary[f"kpp_{k_label(k)}"] = kpp(dist, k).value
    return summary


def summary_report(dist: AccuracyDistribution, k_list: Iterable[float] = LabConfig.KPP_K_LIST) -> Dict:
    """MC 摘要 JSON 内容（含参考置信区间）"""
    k_list = sorted(set(k_list) | {1.0, 5.0})
    summary = summarize(dist, k_list)
    return {
        "mean": summary["mean"],
        "std": summary["std"],
        "min": summary["min"],
        "max": summary["max"],
        "kpp": {k_label(k): summary[f"kpp_{k_label(k)}"] for k in k_list},
        "kpp_ci": {k_label(k): list(kpp_confidence_interval(dist, k)) for k in k_list},
        "n_runs": dist.n_runs,
        "master_seed": dist.master_seed,
        "vm_digest": dist.vm_digest,
    }
