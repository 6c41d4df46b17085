"""
选择性写验证（SWIM）模块
敏感度评分、预算内写验证计划与朴素基线对比
"""

from .sensitivity import SensitivityScores, gauss_newton_diagonal, logit_jacobian, magnitude_scores, sensitivity
from .planner import (
    SwimCurve,
    WriteVerifyPlan,
    cycles_for_count,
    meet_accuracy_target,
    normalized_write_cycles,
    rank_and_select,
    verified_count,
)
from .comparison import BASELINES, SwimComparison, layer_order_mask, random_mask, sign_test, swim_vs_random

__all__ = [
    "SensitivityScores",
    "gauss_newton_diagonal",
    "logit_jacobian",
    "magnitude_scores",
    "sensitivity",
    "SwimCurve",
    "WriteVerifyPlan",
    "cycles_for_count",
    "meet_accuracy_target",
    "normalized_write_cycles",
    "rank_and_select",
    "verified_count",
    "BASELINES",
    "SwimComparison",
    "layer_order_mask",
    "random_mask",
    "sign_test",
    "swim_vs_random",
]
