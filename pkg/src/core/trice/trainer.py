"""
右删失高斯噪声训练
每个批次为全部参数抽取新的删失噪声，在 W + noise 处求梯度，更新作用在干净的 W 上
"""

from typing import Dict, Iterable, Literal, Optional

import numpy as np

from config.experiment_config import QuantizationSpec, TriceConfig
from src.core.device.quantization import parameter_steps
from src.core.nn.mlp import Dataset, Mlp
from src.core.nn.rng import StreamDomain, derive_stream_seed
from src.core.nn.trainer import NoiseSampler, TrainResult, train
from src.core.trice.noise import sample_censored_noise
from src.utils.logging_manager import get_training_logger, log_execution_time

logger = get_training_logger(__name__)

TrainingMode = Literal["vanilla", "gaussian", "trice"]
TRAINING_MODES = ("vanilla", "gaussian", "trice")


class CensoredNoiseSampler:
    """按批次采样删失噪声，标准差以当前权重的量化步长为单位"""

    def __init__(self, cfg: TriceConfig):
        self.sigma = cfg.sigma_train
        self.censor_T = cfg.censor_T
        self.seed = cfg.seed
        self.spec = QuantizationSpec(bits=cfg.bits)

    def __call__(self, model: Mlp, batch_index: int) -> Optional[np.ndarray]:
        stream_seed = derive_stream_seed(self.seed, StreamDomain.TRICE_NOISE, batch_index)
        unit = sample_censored_noise(model.param_count, self.sigma, self.censor_T, stream_seed)
        return unit * parameter_steps(model, self.spec)


def mode_config(cfg: TriceConfig, mode: TrainingMode) -> TriceConfig:
    """训练基线模式: vanilla 不加噪，gaussian 不删失，trice 原样"""
    if mode == "vanilla":
        return cfg.model_copy(update={"sigma_train": 0.0})
    if mode == "gaussian":
        return cfg.model_copy(update={"censor_T": float("inf")})
    if mode == "trice":
        return cfg
    raise ValueError(f"未知训练模式 '{mode}'，可用: {TRAINING_MODES}")


@log_execution_time()
def trice_train(model: Mlp, train_set: Dataset, cfg: TriceConfig) -> TrainResult:
    """右删失高斯噪声训练

    sigma_train = 0 时不采样噪声，轨迹与同种子的普通训练逐位一致；
    censor_T = inf 即普通高斯噪声注入。

    Args:
        model: 初始网络
        train_set: 训练集
        cfg: 训练配置

    Returns:
        训练结果
    """
    sampler: Optional[NoiseSampler] = None
    if cfg.sigma_train > 0:
        sampler = CensoredNoiseSampler(cfg)
    logger.info(f"TRICE训练: sigma_train={cfg.sigma_train}, censor_T={cfg.censor_T}, seed={cfg.seed}")
    return train(model, train_set, cfg.epochs, cfg.lr, cfg.momentum, cfg.seed,
                 batch_size=cfg.batch_size, noise_sampler=sampler)


def train_modes(model: Mlp, train_set: Dataset, cfg: TriceConfig,
                modes: Iterable[TrainingMode] = TRAINING_MODES) -> Dict[str, TrainResult]:
    """从同一初始网络训练各基线模式"""
    return {mode: trice_train(model, train_set, mode_config(cfg, mode)) for mode in modes}


def censor_sweep(model: Mlp, train_set: Dataset, cfg: TriceConfig,
                 grid: Optional[Iterable[float]] = None) -> Dict[float, TrainResult]:
    """在删失阈值网格上分别训练"""
    grid = cfg.censor_grid if grid is None else grid
    return {float(t): trice_train(model, train_set, cfg.model_copy(update={"censor_T": float(t)})) for t in grid}
