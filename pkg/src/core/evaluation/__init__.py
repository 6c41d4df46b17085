"""
蒙特卡洛评估模块
精度分布、KPP 与摘要统计
"""

from .monte_carlo import (
    AccuracyDistribution,
    evaluate_seeds,
    perturbed_accuracy,
    run_monte_carlo,
    trial_seed,
)
from .kpp import KppEstimate, k_label, kpp, kpp_confidence_interval, kpp_rank_index, summarize, summary_report

__all__ = [
    "AccuracyDistribution",
    "evaluate_seeds",
    "perturbed_accuracy",
    "run_monte_carlo",
    "trial_seed",
    "KppEstimate",
    "k_label",
    "kpp",
    "kpp_confidence_interval",
    "kpp_rank_index",
    "summarize",
    "summary_report",
]
