"""
最小神经网络核心
包含网络结构、解析梯度、SGD训练器、检查点与可复现随机流
"""

from .rng import StreamDomain, derive_stream_seed, make_generator, standard_normal, stream_generator
from .mlp import (
    Dataset,
    DenseLayer,
    Mlp,
    accuracy,
    cross_entropy,
    forward,
    forward_trace,
    init_mlp,
    log_softmax,
    loss_and_grads,
    predict,
    softmax,
)
from .trainer import SgdState, TrainResult, sgd_step, sgd_update, train
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    # 随机流
    "StreamDomain",
    "derive_stream_seed",
    "make_generator",
    "standard_normal",
    "stream_generator",

    # 网络
    "Dataset",
    "DenseLayer",
    "Mlp",
    "accuracy",
    "cross_entropy",
    "forward",
    "forward_trace",
    "init_mlp",
    "log_softmax",
    "loss_and_grads",
    "predict",
    "softmax",

    # 训练
    "SgdState",
    "TrainResult",
    "sgd_step",
    "sgd_update",
    "train",

    # 检查点
    "load_checkpoint",
    "save_checkpoint",
]
