"""
数据集服务
合成数据集生成与 CSV 读写
"""

from .generators import GENERATORS, gen_dataset
from .csv_io import load_csv_dataset, save_csv_dataset
from .main import dataset_from_spec

__all__ = ["GENERATORS", "gen_dataset", "load_csv_dataset", "save_csv_dataset", "dataset_from_spec"]
