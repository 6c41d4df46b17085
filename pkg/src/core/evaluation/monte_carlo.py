"""
器件变化下的蒙特卡洛评估
第 i 次试验使用 (master_seed, i) 派生的独立随机流，排序后的结果与执行顺序、进程数无关
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config.experiment_config import VariationModel
from src.core.device.quantization import parameter_steps
from src.core.device.variation import StepLike, apply_noise, sample_variation, variation_digest
from src.core.errors import DistributionError
from src.core.nn.mlp import Dataset, Mlp, accuracy
from src.core.nn.rng import StreamDomain, derive_stream_seed
from src.utils.logging_manager import get_simulation_logger, log_execution_time

logger = get_simulation_logger(__name__)


@dataclass(frozen=True, eq=False)
class AccuracyDistribution:
    """N 次带种子试验的精度分布"""

    accuracies: np.ndarray          # 升序
    n_runs: int
    master_seed: int
    vm_digest: str
    trial_accuracies: np.ndarray    # 按试验编号
    trial_seeds: np.ndarray         # 按试验编号的流种子

    def __post_init__(self):
        accuracies = np.asarray(self.accuracies, dtype=np.float64)
        if accuracies.shape != (self.n_runs,):
            raise DistributionError(f"分布长度 {accuracies.shape} 与 n_runs={self.n_runs} 不一致")
        if self.n_runs and (np.any(np.diff(accuracies) < 0) or accuracies[0] < 0 or accuracies[-1] > 1):
            raise DistributionError("精度分布必须升序且位于 [0, 1]")

    @classmethod
    def from_trials(cls, trial_accuracies: Sequence[float], trial_seeds: Sequence[int],
                    master_seed: int, vm_digest: str) -> "AccuracyDistribution":
        """由按试验编号排列的结果构造分布"""
        trial_accuracies = np.asarray(trial_accuracies, dtype=np.float64)
        return cls(
            accuracies=np.sort(trial_accuracies, kind="stable"),
            n_runs=int(trial_accuracies.shape[0]),
            master_seed=master_seed,
            vm_digest=vm_digest,
            trial_accuracies=trial_accuracies,
            trial_seeds=np.asarray(trial_seeds, dtype=np.uint64),
        )

    @property
    def worst_trial(self) -> int:
        """精度最低的试验编号（并列取最小编号）"""
        return int(np.argmin(self.trial_accuracies))

    def to_frame(self) -> pd.DataFrame:
        """报告表: trial,seed,accuracy"""
        return pd.DataFrame({
            "trial": np.arange(self.n_runs, dtype=np.int64),
            "seed": self.trial_seeds,
            "accuracy": self.trial_accuracies,
        })


def trial_seed(master_seed: int, trial: int) -> int:
    """第 trial 次MC试验的流种子"""
    return derive_stream_seed(master_seed, StreamDomain.MC_TRIAL, trial)


def perturbed_accuracy(model: Mlp, dataset: Dataset, vm: VariationModel, mask: Optional[np.ndarray],
                       steps: StepLike, stream_seed: int) -> float:
    """一次加噪后的精度"""
    delta_w = sample_variation(model.param_count, vm, mask, stream_seed, steps)
    return accuracy(apply_noise(model, delta_w), dataset)


def _evaluate_chunk(args: Tuple) -> List[float]:
    """工作进程入口（模块级函数以便序列化）"""
    model, dataset, vm, mask, steps, seeds = args
    return [perturbed_accuracy(model, dataset, vm, mask, steps, int(seed)) for seed in seeds]


def evaluate_seeds(model: Mlp, dataset: Dataset, vm: VariationModel, mask: Optional[np.ndarray],
                   steps: StepLike, seeds: Sequence[int], jobs: int = 1) -> np.ndarray:
    """按给定流种子逐次评估，结果顺序与 seeds 一致

    Args:
        jobs: 工作进程数，1 表示在当前进程内顺序执行
    """
    seeds = [int(s) for s in seeds]
    if jobs <= 1 or len(seeds) < 2:
        return np.asarray(_evaluate_chunk((model, dataset, vm, mask, steps, seeds)), dtype=np.float64)

    n_chunks = min(len(seeds), jobs * 4)
    bounds = np.linspace(0, len(seeds), n_chunks + 1).astype(int)
    chunks = [(model, dataset, vm, mask, steps, seeds[lo:hi]) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    with ProcessPoolExecutor(max_workers=jobs) as executor:
        results = list(executor.map(_evaluate_chunk, chunks))
    return np.asarray([acc for chunk in results for acc in chunk], dtype=np.float64)


@log_execution_time()
def run_monte_carlo(model: Mlp, dataset: Dataset, vm: VariationModel, mask: Optional[np.ndarray],
                    n_runs: int, master_seed: int, steps: Optional[StepLike] = None,
                    jobs: int = 1) -> AccuracyDistribution:
    """带种子的蒙特卡洛精度评估

    Args:
        model: 部署后的网络
        dataset: 评估数据集
        vm: 器件变化模型
        mask: 写验证掩码，None 表示全部未验证
        n_runs: 试验次数（≥1）
        master_seed: 主种子
        steps: 逐参数量化步长，缺省按 vm.bits 由网络计算
        jobs: 工作进程数

    Returns:
        精度分布
    """
    if n_runs < 1:
        raise DistributionError(f"n_runs必须≥1，实际为 {n_runs}")
    if steps is None:
        steps = parameter_steps(model, vm.quantization)

    seeds = [trial_seed(master_seed, i) for i in range(n_runs)]
    trial_accuracies = evaluate_seeds(model, dataset, vm, mask, steps, seeds, jobs)
    dist = AccuracyDistribution.from_trials(trial_accuracies, seeds, master_seed, variation_digest(vm, mask, steps))
    logger.info(
        f"MC完成: n_runs={n_runs}, σ={vm.sigma}, th_g={vm.th_g}, "
        f"均值={dist.accuracies.mean():.4f}, 最小={dist.accuracies[0]:.4f}"
    )
    return dist
