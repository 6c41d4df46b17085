"""
实验室默认参数配置
集中声明各模块使用的默认常数
"""

from typing import Dict, Any, Tuple


class LabConfig:
    """默认参数配置类"""

    # 量化与器件
    QUANT_BITS = 8                 # 每个器件存储的量化位数
    VERIFY_COST_V = 10.0           # 写验证器件的平均写周期（普通写入为1）

    # 训练
    EPOCHS = 50
    LEARNING_RATE = 0.1
    MOMENTUM = 0.9
    BATCH_SIZE = 32

    # 蒙特卡洛与KPP
    MC_RUNS = 1000
    KPP_K_LIST: Tuple[float, ...] = (1.0, 5.0)
    CONFIDENCE_LEVEL = 0.95

    # 最坏情况搜索
    ATTACK_STEPS = 200
    ATTACK_RESTARTS = 8
    ATTACK_STEP_DIVISOR = 10.0     # 默认步长 = th_g * step / 10
    ATTACK_POLISH_PASSES = 1
    CORNER_ORACLE_GUARD = 20       # 2^n 穷举上限
    GAP_MIN_MC = 100

    # SWIM
    BUDGET_GRID: Tuple[float, ...] = (0.0, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0)
    SWIM_MC_RUNS = 200
    SWIM_COMPARE_SEEDS = 20
    VERIFY_GROUP_SIZE = 1

    # TRICE
    CENSOR_T = 1.0
    CENSOR_GRID: Tuple[float, ...] = (0.5, 1.0, 2.0)

    # 截断采样的最大拒绝轮数
    MAX_REJECTION_ROUNDS = 1000

    @classmethod
    def get_config(cls) -> Dict[str, Any]:
        """获取完整的配置字典"""
        return {
            "quant_bits": cls.QUANT_BITS,
            "verify_cost_V": cls.VERIFY_COST_V,
            "epochs": cls.EPOCHS,
            "learning_rate": cls.LEARNING_RATE,
            "momentum": cls.MOMENTUM,
            "batch_size": cls.BATCH_SIZE,
            "mc_runs": cls.MC_RUNS,
            "kpp_k_list": list(cls.KPP_K_LIST),
            "attack_steps": cls.ATTACK_STEPS,
            "attack_restarts": cls.ATTACK_RESTARTS,
            "corner_oracle_guard": cls.CORNER_ORACLE_GUARD,
            "budget_grid": list(cls.BUDGET_GRID),
            "swim_mc_runs": cls.SWIM_MC_RUNS,
            "censor_T": cls.CENSOR_T,
            "censor_grid": list(cls.CENSOR_GRID),
        }

    @classmethod
    def validate_config(cls) -> bool:
        """验证默认配置是否有效"""
        if not 2 <= cls.QUANT_BITS <= 16:
            raise ValueError("QUANT_BITS必须在[2, 16]之间")
        if cls.VERIFY_COST_V < 1:
            raise ValueError("VERIFY_COST_V不能小于1")
        if not 0 <= cls.MOMENTUM < 1:
            raise ValueError("MOMENTUM必须在[0, 1)之间")
        if list(cls.BUDGET_GRID) != sorted(cls.BUDGET_GRID):
            raise ValueError("BUDGET_GRID必须升序")
        if any(b < 0 or b > 1 for b in cls.BUDGET_GRID):
            raise ValueError("BUDGET_GRID取值必须在[0, 1]之间")
        if cls.CORNER_ORACLE_GUARD > 24:
            raise ValueError("CORNER_ORACLE_GUARD过大")
        return True


# 验证配置
LabConfig.validate_config()
