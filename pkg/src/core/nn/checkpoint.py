"""
检查点读写
JSON格式: {"arch", "activations", "weights", "biases", "meta"}，浮点数按最短往返表示写出
"""

from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from src.core.nn.mlp import Mlp
from src.utils.file_handling.artifacts import read_json, write_json


def checkpoint_dict(model: Mlp, meta: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """网络转换为检查点字典"""
    return {
        "arch": model.dims,
        "activations": model.activations,
        "weights": [layer.weight.tolist() for layer in model.layers],
        "biases": [layer.bias.tolist() for layer in model.layers],
        "meta": dict(meta or {}),
    }


def save_checkpoint(model: Mlp, path: Union[str, Path], meta: Optional[Dict[str, Any]] = None) -> Path:
    """保存检查点

    Args:
        model: 网络（ΔW 也可按网络结构保存）
        path: 输出路径
        meta: 元数据，如 seed/epochs/lr/config_digest

    Returns:
        输出路径
    """
    return write_json(path, checkpoint_dict(model, meta))


def load_checkpoint(path: Union[str, Path]) -> Tuple[Mlp, Dict[str, Any]]:
    """加载检查点

    Returns:
        (网络, 元数据)
    """
    data = read_json(path)
    model = Mlp.from_arrays(
        [np.array(w, dtype=np.float64).reshape(out_dim, in_dim)
         for w, in_dim, out_dim in zip(data["weights"], data["arch"][:-1], data["arch"][1:])],
        [np.array(b, dtype=np.float64) for b in data["biases"]],
        data["activations"],
    )
    if model.dims != list(data["arch"]):
        raise ValueError(f"检查点结构不一致: {data['arch']} vs {model.dims}")
    return model, data.get("meta", {})
