"""
测试工具模块，提供共享的测试网络、数据集和工具函数
"""

import json
import sys
from functools import lru_cache
from pathlib import Path

import numpy as np

# 添加项目根目录到路径
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from config.experiment_config import VariationModel
from src.core.nn.mlp import Dataset, Mlp, cross_entropy, init_mlp
from src.core.nn.trainer import train
from src.services.datasets.generators import gen_dataset

# 基线夹具参数：blobs n=400 seed=7，网络 [2, 16, 2]
BLOBS_DIMS = [2, 16, 2]

# 手算数值夹具目录
FIXTURES_DIR = Path(__file__).parent / "fixtures"


def load_fixture(name: str) -> dict:
    """读取 tests/fixtures 下的 JSON 夹具"""
    with open(FIXTURES_DIR / name, 'r', encoding='utf-8') as f:
        return json.load(f)


@lru_cache(maxsize=None)
def get_blobs_dataset(n: int = 400, noise: float = 0.5, seed: int = 7) -> Dataset:
    """获取 blobs 测试数据集"""
    return gen_dataset("blobs", n, noise, seed)


@lru_cache(maxsize=None)
def get_trained_blobs_model(epochs: int = 50, seed: int = 0) -> Mlp:
    """获取在 blobs 上训练好的基线网络（同一进程内只训练一次）"""
    model = init_mlp(BLOBS_DIMS, seed=seed)
    return train(model, get_blobs_dataset(), epochs, lr=0.1, momentum=0.9, seed=seed).model


def make_linear_unit(w: float, b: float = 0.0) -> Mlp:
    """单输入单输出的线性单元 y = w·x + b"""
    return Mlp.from_arrays([np.array([[w]])], [np.array([b])], ["identity"])


def make_threshold_unit() -> Mlp:
    """一维二分类阈值单元: logits = [0, x + b1]，x + b1 > 0 时判为类 1

    参数顺序 [w0, w1, b0, b1]，只让 b1 可扰动时就是单参数问题。
    """
    return Mlp.from_arrays([np.array([[0.0], [1.0]])], [np.array([0.0, 0.0])], ["identity"])


def get_threshold_dataset() -> Dataset:
    """阈值单元的数据：b1 = −1 时 x = 0.5 的样本翻转，b1 = +1 时没有样本翻转"""
    return Dataset(np.array([[0.5], [2.0], [-1.0]]), np.array([1, 1, 0]), 2)


def random_small_model(rng: np.random.Generator, max_layers: int = 3, max_width: int = 5,
                       seed: int = 0) -> Mlp:
    """随机结构的小网络（≤3 层）"""
    n_layers = int(rng.integers(1, max_layers + 1))
    dims = [int(rng.integers(1, max_width + 1)) for _ in range(n_layers)] + [int(rng.integers(2, 5))]
    model = init_mlp(dims, seed=seed)
    # 非零偏置，避免所有预激活同时落在原点附近
    return model.with_parameters(model.flatten() + rng.normal(0.0, 0.1, size=model.param_count))


def random_batch(rng: np.random.Generator, model: Mlp, max_batch: int = 16) -> Dataset:
    """与网络匹配的随机批次"""
    n = int(rng.integers(1, max_batch + 1))
    inputs = rng.normal(size=(n, model.dims[0]))
    targets = rng.integers(0, model.n_classes, size=n)
    return Dataset(inputs, targets, model.n_classes)


def finite_difference_grads(model: Mlp, batch: Dataset, eps: float = 1e-6) -> np.ndarray:
    """交叉熵对展平参数的中心差分梯度"""
    params = model.flatten()
    grads = np.empty_like(params)
    for i in range(params.shape[0]):
        shift = np.zeros_like(params)
        shift[i] = eps
        upper = cross_entropy(model.with_parameters(params + shift), batch)
        lower = cross_entropy(model.with_parameters(params - shift), batch)
        grads[i] = (upper - lower) / (2 * eps)
    return grads


def make_vm(**kwargs) -> VariationModel:
    """构造器件变化模型，未指定的字段取默认值"""
    return VariationModel(**kwargs)


def small_experiment(output_dir: Path, **sections) -> dict:
    """小规模的完整实验配置，便于在集成测试中快速跑完全部阶段"""
    config = {
        "name": "pipeline-fixture",
        "stages": ["train", "mc", "worst_case", "swim", "trice", "benchmark"],
        "model": {"dims": [2, 4, 2], "init_seed": 1},
        "dataset": {"kind": "blobs", "n": 40, "noise": 0.5, "seed": 7},
        "training": {"epochs": 5, "lr": 0.1, "momentum": 0.9, "batch_size": 8, "seed": 0},
        "variation": {"sigma": 2.0, "th_g": 6.0, "th_wv": 1.0, "verify_cost_V": 10.0, "bits": 4},
        "mc": {"n_runs": 100, "k_list": [1.0, 5.0]},
        "attack": {"steps": 5, "restarts": 2, "seed": 0, "polish_passes": 1, "n_mc": 100},
        "swim": {"budget_grid": [0.0, 0.5, 1.0], "target_drop": 0.02, "n_mc": 10,
                 "compare_budget": 0.25, "n_seeds": 20},
        "trice": {"sigma_train": 1.0, "censor_T": 1.0, "epochs": 3, "batch_size": 8, "seed": 0, "bits": 4},
        "benchmark": {"n_runs": 50, "k_list": [1.0, 5.0]},
        "output_dir": str(output_dir),
        "master_seed": 0,
    }
    for key, value in sections.items():
        if isinstance(value, dict) and isinstance(config.get(key), dict):
            config[key] = {**config[key], **value}
        else:
            config[key] = value
    return config


def write_config(path: Path, config: dict) -> Path:
    """写出实验配置JSON"""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(config, f, ensure_ascii=False, indent=2)
    return path


def artifact_bytes(out_dir: Path) -> dict:
    """输出目录下除运行清单外所有文件的字节内容"""
    return {
        p.relative_to(out_dir).as_posix(): p.read_bytes()
        for p in sorted(out_dir.rglob("*"))
        if p.is_file() and p.name != "manifest.json"
    }
