"""
TRICE 模块
右删失高斯噪声训练与配对 KPP 基准
"""

from .noise import censored_fraction, censored_mean, censored_variance, sample_censored_noise
from .trainer import TRAINING_MODES, CensoredNoiseSampler, censor_sweep, mode_config, train_modes, trice_train
from .benchmark import BENCHMARK_COLUMNS, KppBenchmark, kpp_benchmark

__all__ = [
    "censored_fraction",
    "censored_mean",
    "censored_variance",
    "sample_censored_noise",
    "TRAINING_MODES",
    "CensoredNoiseSampler",
    "censor_sweep",
    "mode_config",
    "train_modes",
    "trice_train",
    "BENCHMARK_COLUMNS",
    "KppBenchmark",
    "kpp_benchmark",
]
