"""
SGD/动量训练器
单线程、可复现：打乱顺序与加噪都来自派生随机流
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from src.core.errors import NonFiniteError, TrainingDivergedError
from src.core.nn.mlp import Dataset, Mlp, accuracy, loss_and_grads
from src.core.nn.rng import StreamDomain, stream_generator
from src.utils.logging_manager import get_training_logger

logger = get_training_logger(__name__)

# 噪声采样回调: (当前干净网络, 全局批次编号) -> 加到权重上的噪声向量，None 表示不加噪
NoiseSampler = Callable[[Mlp, int], Optional[np.ndarray]]


@dataclass
class SgdState:
    """动量缓冲"""

    velocity: Optional[np.ndarray] = None


@dataclass
class TrainResult:
    """训练结果"""

    model: Mlp
    loss_history: List[float] = field(default_factory=list)
    train_accuracy: float = 0.0


def sgd_update(params: np.ndarray, grads: np.ndarray, lr: float, momentum: float,
               state: SgdState) -> Tuple[np.ndarray, SgdState]:
    """动量SGD更新: v ← μ·v + g，w ← w − lr·v

    Args:
        params: 参数向量
        grads: 梯度向量
        lr: 学习率（≥0）
        momentum: 动量系数，取值 [0, 1)
        state: 动量状态

    Returns:
        (新参数, 新状态)，输入不被修改
    """
    if lr < 0:
        raise ValueError(f"学习率不能为负: {lr}")
    if not 0 <= momentum < 1:
        raise ValueError(f"动量必须位于 [0, 1): {momentum}")
    grads = np.asarray(grads, dtype=np.float64)
    if not np.all(np.isfinite(grads)):
        raise NonFiniteError("梯度包含 NaN/Inf")
    if state.velocity is None:
        velocity = grads.copy()
    else:
        velocity = momentum * state.velocity + grads
    return params - lr * velocity, SgdState(velocity)


def sgd_step(model: Mlp, grads: np.ndarray, lr: float, momentum: float,
             state: SgdState) -> Tuple[Mlp, SgdState]:
    """对网络执行一步动量SGD"""
    params, state = sgd_update(model.flatten(), grads, lr, momentum, state)
    return model.with_parameters(params), state


def train(model: Mlp, train_set: Dataset, epochs: int, lr: float, momentum: float, seed: int,
          batch_size: int = 32, noise_sampler: Optional[NoiseSampler] = None) -> TrainResult:
    """小批量训练

    每轮的打乱顺序取自 (seed, SHUFFLE, epoch) 派生的随机流。给定 noise_sampler 时，
    梯度在 W + noise 处计算，更新作用在干净的 W 上（噪声视为常量）。

    Args:
        model: 初始网络
        train_set: 训练集
        epochs: 训练轮数（≥1）
        lr: 学习率
        momentum: 动量
        seed: 随机种子
        batch_size: 批大小
        noise_sampler: 可选的权重噪声回调

    Returns:
        训练结果（最终网络与逐轮平均损失）
    """
    if epochs < 1:
        raise ValueError(f"epochs必须≥1，实际为 {epochs}")
    if batch_size < 1:
        raise ValueError(f"batch_size必须≥1，实际为 {batch_size}")

    params = model.flatten()
    state = SgdState()
    history: List[float] = []
    batch_index = 0

    for epoch in range(epochs):
        order = stream_generator(seed, StreamDomain.SHUFFLE, epoch).permutation(train_set.n)
        weighted_loss = 0.0
        for start in range(0, train_set.n, batch_size):
            batch = train_set.subset(order[start:start + batch_size])
            current = model.with_parameters(params)
            noise = noise_sampler(current, batch_index) if noise_sampler is not None else None
            evaluated = current if noise is None else model.with_parameters(params + noise)
            try:
                loss, grads = loss_and_grads(evaluated, batch)
                params, state = sgd_update(params, grads, lr, momentum, state)
            except NonFiniteError as e:
                raise TrainingDivergedError(epoch, float("nan")) from e
            if not np.all(np.isfinite(params)):
                raise TrainingDivergedError(epoch, loss)
            weighted_loss += loss * batch.n
            batch_index += 1

        epoch_loss = weighted_loss / train_set.n
        if not np.isfinite(epoch_loss):
            raise TrainingDivergedError(epoch, epoch_loss)
        history.append(epoch_loss)
        logger.debug(f"epoch {epoch + 1}/{epochs} 平均损失: {epoch_loss:.6f}")

    trained = model.with_parameters(params)
    train_acc = accuracy(trained, train_set)
    logger.info(f"训练完成: {epochs} 轮，最终损失 {history[-1]:.6f}，训练精度 {train_acc:.4f}")
    return TrainResult(trained, history, train_acc)
