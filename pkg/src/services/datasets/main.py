"""
数据集服务的主入口文件
按实验配置中的数据集段得到数据集
"""

from config.experiment_config import DatasetSpec
from src.core.nn.mlp import Dataset
from src.services.datasets.csv_io import load_csv_dataset
from src.services.datasets.generators import gen_dataset


def dataset_from_spec(spec: DatasetSpec) -> Dataset:
    """生成器优先，否则读取 CSV

    Args:
        spec: 数据集配置（csv_path 应已解析为绝对路径）

    Returns:
        数据集
    """
    if spec.kind is not None:
        return gen_dataset(spec.kind, spec.n, spec.noise, spec.seed)
    return load_csv_dataset(spec.csv_path, has_header=spec.has_header, n_classes=spec.n_classes)
