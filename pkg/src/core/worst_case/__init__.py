"""
最坏情况分析模块
投影梯度上升搜索、角点穷举与MC差距报告
"""

from .pga import AttackResult, evaluate_perturbation, pga_attack, polish_corner, snap_to_corner
from .corner_oracle import corner_oracle
from .gap import GapReport, attack_bound_sweep, mc_gap_report

__all__ = [
    "AttackResult",
    "evaluate_perturbation",
    "pga_attack",
    "polish_corner",
    "snap_to_corner",
    "corner_oracle",
    "GapReport",
    "attack_bound_sweep",
    "mc_gap_report",
]
