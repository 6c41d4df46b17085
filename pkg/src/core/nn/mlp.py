"""
最小前馈网络
提供全连接层、参数展平/还原、前向传播、解析梯度与精度计算
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.core.errors import EmptyBatchError, NonFiniteError, ShapeMismatchError
from src.core.nn.rng import StreamDomain, stream_generator

ACTIVATIONS = ("relu", "identity")


def _frozen_copy(values, ndim: int, name: str) -> np.ndarray:
    """复制为只读 float64 数组并检查维度"""
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != ndim:
        raise ValueError(f"{name} 需要 {ndim} 维数组，实际为 {arr.ndim} 维")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DenseLayer:
    """全连接层: weight [out×in], bias [out]"""

    weight: np.ndarray
    bias: np.ndarray
    activation: str = "relu"

    def __post_init__(self):
        object.__setattr__(self, "weight", _frozen_copy(self.weight, 2, "weight"))
        object.__setattr__(self, "bias", _frozen_copy(self.bias, 1, "bias"))
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"未知激活 '{self.activation}'，可用: {ACTIVATIONS}")
        if self.bias.shape[0] != self.weight.shape[0]:
            raise ShapeMismatchError(-1, self.weight.shape[0], self.bias.shape[0], what="偏置长度")

    @property
    def in_dim(self) -> int:
        return self.weight.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weight.shape[0]

    @property
    def param_count(self) -> int:
        return self.weight.size + self.bias.size


@dataclass(frozen=True, eq=False)
class Mlp:
    """多层感知机，构造后不可变

    参数展平顺序: 逐层，层内先按行优先展开权重，再接偏置。
    """

    layers: Tuple[DenseLayer, ...]

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if not self.layers:
            raise ValueError("Mlp至少需要一层")
        for index in range(1, len(self.layers)):
            expected = self.layers[index - 1].out_dim
            actual = self.layers[index].in_dim
            if expected != actual:
                raise ShapeMismatchError(index, expected, actual)
        for layer in self.layers:
            if not (np.all(np.isfinite(layer.weight)) and np.all(np.isfinite(layer.bias))):
                raise NonFiniteError("网络参数包含 NaN/Inf")

    @classmethod
    def from_arrays(cls, weights: Sequence, biases: Sequence, activations: Sequence[str]) -> "Mlp":
        """由逐层数组构造网络"""
        if not len(weights) == len(biases) == len(activations):
            raise ValueError("weights、biases、activations 层数不一致")
        return cls(tuple(DenseLayer(w, b, a) for w, b, a in zip(weights, biases, activations)))

    @property
    def dims(self) -> List[int]:
        """各层宽度（含输入维度）"""
        return [self.layers[0].in_dim] + [layer.out_dim for layer in self.layers]

    @property
    def activations(self) -> List[str]:
        return [layer.activation for layer in self.layers]

    @property
    def n_classes(self) -> int:
        return self.layers[-1].out_dim

    @property
    def param_count(self) -> int:
        return sum(layer.param_count for layer in self.layers)

    def layer_slices(self) -> List[Tuple[slice, slice]]:
        """每层权重与偏置在展平参数向量中的位置"""
        slices = []
        offset = 0
        for layer in self.layers:
            w_end = offset + layer.weight.size
            b_end = w_end + layer.bias.size
            slices.append((slice(offset, w_end), slice(w_end, b_end)))
            offset = b_end
        return slices

    def flatten(self) -> np.ndarray:
        """展平为单一参数向量"""
        parts = []
        for layer in self.layers:
            parts.append(layer.weight.ravel())
            parts.append(layer.bias)
        return np.concatenate(parts)

    def with_parameters(self, flat: np.ndarray) -> "Mlp":
        """用展平参数向量构造同结构的新网络"""
        flat = np.asarray(flat, dtype=np.float64)
        if flat.ndim != 1 or flat.shape[0] != self.param_count:
            raise ShapeMismatchError(-1, self.param_count, flat.shape, what="参数向量长度")
        layers = []
        for layer, (w_slice, b_slice) in zip(self.layers, self.layer_slices()):
            layers.append(DenseLayer(
                flat[w_slice].reshape(layer.weight.shape),
                flat[b_slice],
                layer.activation,
            ))
        return Mlp(tuple(layers))


@dataclass(frozen=True, eq=False)
class Dataset:
    """分类数据集: inputs [n×d], targets 为 [0, C) 内的类别索引"""

    inputs: np.ndarray
    targets: np.ndarray
    n_classes: int = field(default=0)

    def __post_init__(self):
        inputs = _frozen_copy(self.inputs, 2, "inputs")
        targets = np.array(self.targets, dtype=np.int64, copy=True)
        if targets.ndim != 1 or targets.shape[0] != inputs.shape[0]:
            raise ShapeMismatchError(0, inputs.shape[0], targets.shape, what="标签数量")
        if inputs.shape[0] < 1:
            raise EmptyBatchError("数据集至少需要一个样本")
        if not np.all(np.isfinite(inputs)):
            raise NonFiniteError("数据集输入包含 NaN/Inf")
        n_classes = self.n_classes or int(targets.max()) + 1
        if targets.min() < 0 or targets.max() >= n_classes:
            raise ValueError(f"标签必须位于 [0, {n_classes})")
        targets.setflags(write=False)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "n_classes", n_classes)

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    @property
    def dim(self) -> int:
        return self.inputs.shape[1]

    def subset(self, indices: np.ndarray) -> "Dataset":
        """按索引取子集（保持类别数）"""
        return Dataset(self.inputs[indices], self.targets[indices], self.n_classes)


def init_mlp(dims: Sequence[int], activations: Optional[Sequence[str]] = None, seed: int = 0) -> Mlp:
    """Glorot 均匀初始化

    权重取自 U[-√(6/(in+out)), +√(6/(in+out))]，偏置为零。

    Args:
        dims: 各层宽度（含输入维度）
        activations: 逐层激活，缺省为隐藏层 relu、输出层 identity
        seed: 随机种子

    Returns:
        初始化后的网络
    """
    n_layers = len(dims) - 1
    if n_layers < 1:
        raise ValueError("dims至少包含输入维度与输出维度")
    if activations is None:
        activations = ["relu"] * (n_layers - 1) + ["identity"]
    gen = stream_generator(seed, StreamDomain.INIT)
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(gen.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return Mlp.from_arrays(weights, biases, activations)


def _activate(z: np.ndarray, activation: str) -> np.ndarray:
    if activation == "relu":
        return np.maximum(z, 0.0)
    return z


def activation_grad(z: np.ndarray, activation: str) -> np.ndarray:
    """激活函数对预激活的逐元素导数"""
    if activation == "relu":
        return (z > 0).astype(np.float64)
    return np.ones_like(z)


def _check_inputs(model: Mlp, inputs: np.ndarray) -> np.ndarray:
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim != 2:
        raise ShapeMismatchError(0, "[n×d]", inputs.shape, what="输入形状")
    if inputs.shape[1] != model.layers[0].in_dim:
        raise ShapeMismatchError(0, model.layers[0].in_dim, inputs.shape[1])
    return inputs


def forward_trace(model: Mlp, inputs: np.ndarray) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """前向传播并保留中间量

    Returns:
        (pre_activations, activations)，activations[0] 为输入，activations[-1] 为 logits
    """
    a = _check_inputs(model, inputs)
    pre_activations, activations = [], [a]
    for layer in model.layers:
        z = a @ layer.weight.T + layer.bias
        a = _activate(z, layer.activation)
        pre_activations.append(z)
        activations.append(a)
    return pre_activations, activations


def forward(model: Mlp, inputs: np.ndarray) -> np.ndarray:
    """前向传播

    Args:
        model: 网络
        inputs: 输入 [n×d]

    Returns:
        logits [n×C]
    """
    _, activations = forward_trace(model, inputs)
    logits = activations[-1]
    if not np.all(np.isfinite(logits)):
        raise NonFiniteError("前向传播产生 NaN/Inf")
    return logits


def log_softmax(logits: np.ndarray) -> np.ndarray:
    """数值稳定的 log-softmax"""
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def softmax(logits: np.ndarray) -> np.ndarray:
    """数值稳定的 softmax"""
    return np.exp(log_softmax(logits))


def cross_entropy(model: Mlp, batch: Dataset) -> float:
    """平均 softmax 交叉熵（仅损失）"""
    logits = forward(model, batch.inputs)
    log_probs = log_softmax(logits)
    return float(-log_probs[np.arange(batch.n), batch.targets].mean())


def loss_and_grads(model: Mlp, batch: Dataset) -> Tuple[float, np.ndarray]:
    """平均交叉熵及其对展平参数的解析梯度

    Args:
        model: 网络
        batch: 非空批次

    Returns:
        (loss, grads)，grads 与 model.flatten() 等长
    """
    if batch.n < 1:
        raise EmptyBatchError("批次为空")
    pre_activations, activations = forward_trace(model, batch.inputs)
    logits = activations[-1]
    log_probs = log_softmax(logits)
    rows = np.arange(batch.n)
    loss = float(-log_probs[rows, batch.targets].mean())

    delta = np.exp(log_probs)
    delta[rows, batch.targets] -= 1.0
    delta /= batch.n

    grads = np.empty(model.param_count, dtype=np.float64)
    slices = model.layer_slices()
    for index in range(len(model.layers) - 1, -1, -1):
        layer = model.layers[index]
        delta = delta * activation_grad(pre_activations[index], layer.activation)
        w_slice, b_slice = slices[index]
        grads[w_slice] = (delta.T @ activations[index]).ravel()
        grads[b_slice] = delta.sum(axis=0)
        if index > 0:
            delta = delta @ layer.weight

    if not (np.isfinite(loss) and np.all(np.isfinite(grads))):
        raise NonFiniteError("损失或梯度包含 NaN/Inf", loss=loss)
    return loss, grads


def predict(model: Mlp, inputs: np.ndarray) -> np.ndarray:
    """argmax 预测，平局取最小类别索引"""
    return np.argmax(forward(model, inputs), axis=1)


def accuracy(model: Mlp, dataset: Dataset) -> float:
    """分类精度，取值 [0, 1]"""
    return float(np.mean(predict(model, dataset.inputs) == dataset.targets))
