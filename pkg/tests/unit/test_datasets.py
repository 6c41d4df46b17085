"""
数据集服务测试
测试合成数据生成器与CSV读写
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# 添加项目根目录到路径
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from config.experiment_config import DatasetSpec
from src.core.errors import DatasetFormatError, UnknownDatasetError
from src.services.datasets import GENERATORS, dataset_from_spec, gen_dataset, load_csv_dataset, save_csv_dataset


class TestGenerators:
    """合成数据生成器测试类"""

    @pytest.mark.parametrize("kind", sorted(GENERATORS))
    def test_shape_and_balance(self, kind):
        """二维输入，标签交替且类别均衡"""
        dataset = gen_dataset(kind, 10, 0.1, 3)
        assert dataset.inputs.shape == (10, 2)
        assert dataset.targets.tolist() == [0, 1] * 5
        assert dataset.n_classes == 2

    @pytest.mark.parametrize("kind", sorted(GENERATORS))
    def test_seed_determines_data(self, kind):
        """相同种子逐位相同，不同种子不同"""
        first = gen_dataset(kind, 50, 0.2, 7)
        np.testing.assert_array_equal(first.inputs, gen_dataset(kind, 50, 0.2, 7).inputs)
        assert not np.array_equal(first.inputs, gen_dataset(kind, 50, 0.2, 8).inputs)

    def test_noiseless_blobs_at_centers(self):
        """无噪声的 blobs 正好落在两个中心"""
        dataset = gen_dataset("blobs", 6, 0.0, 0)
        np.testing.assert_array_equal(dataset.inputs[0], [-1.0, -1.0])
        np.testing.assert_array_equal(dataset.inputs[1], [1.0, 1.0])

    def test_noiseless_xor_quadrants(self):
        """无噪声的 xor_grid: 类 0 在一/三象限，类 1 在二/四象限"""
        dataset = gen_dataset("xor_grid", 200, 0.0, 1)
        same_sign = np.sign(dataset.inputs[:, 0]) == np.sign(dataset.inputs[:, 1])
        np.testing.assert_array_equal(same_sign, dataset.targets == 0)

    def test_unknown_kind(self):
        """未知生成器报错并列出可用类型"""
        with pytest.raises(UnknownDatasetError) as excinfo:
            gen_dataset("spirals", 10, 0.1, 0)
        assert excinfo.value.details["available"] == ["blobs", "moons", "xor_grid"]

    def test_invalid_size_and_noise(self):
        """样本数过少或噪声为负时报错"""
        with pytest.raises(ValueError):
            gen_dataset("blobs", 3, 0.1, 0)
        with pytest.raises(ValueError):
            gen_dataset("blobs", 10, -0.1, 0)


class TestCsvDataset:
    """CSV数据集读写测试类"""

    def test_save_then_load_is_lossless(self, tmp_path):
        """写出后读回逐位一致"""
        dataset = gen_dataset("moons", 30, 0.1, 2)
        path = save_csv_dataset(dataset, tmp_path / "moons.csv", header=True)
        loaded = load_csv_dataset(path, has_header=True)
        np.testing.assert_array_equal(loaded.inputs, dataset.inputs)
        np.testing.assert_array_equal(loaded.targets, dataset.targets)

    def test_blank_lines_skipped(self, tmp_path):
        """空行被跳过，行序保持"""
        path = tmp_path / "data.csv"
        path.write_text("1,0.5,2\n\n0,-1,3.25\n", encoding="utf-8")
        dataset = load_csv_dataset(path)
        assert dataset.targets.tolist() == [1, 0]
        np.testing.assert_array_equal(dataset.inputs, [[0.5, 2.0], [-1.0, 3.25]])

    @pytest.mark.parametrize("content, line", [
        ("0,1.0\n1\n", 2),
        ("0,1.0,2.0\n1,3.0\n", 2),
        ("0,1.0\nx,2.0\n", 2),
        ("-1,1.0\n", 1),
        ("0,abc\n", 1),
        ("0,nan\n", 1),
        ("0,inf\n", 1),
    ])
    def test_malformed_rows_report_line(self, tmp_path, content, line):
        """格式错误的行报告行号"""
        path = tmp_path / "bad.csv"
        path.write_text(content, encoding="utf-8")
        with pytest.raises(DatasetFormatError) as excinfo:
            load_csv_dataset(path)
        assert excinfo.value.details["line"] == line

    def test_label_outside_class_count(self, tmp_path):
        """标签超出声明的类别数时报错"""
        path = tmp_path / "labels.csv"
        path.write_text("0,1.0\n2,2.0\n", encoding="utf-8")
        with pytest.raises(DatasetFormatError) as excinfo:
            load_csv_dataset(path, n_classes=2)
        assert excinfo.value.details["line"] == 2

    def test_empty_file(self, tmp_path):
        """没有数据行时报错"""
        path = tmp_path / "empty.csv"
        path.write_text("label,f1\n", encoding="utf-8")
        with pytest.raises(DatasetFormatError):
            load_csv_dataset(path, has_header=True)

    def test_dataset_from_spec(self, tmp_path):
        """按数据集配置生成或读取"""
        generated = dataset_from_spec(DatasetSpec(kind="blobs", n=20, noise=0.3, seed=4))
        np.testing.assert_array_equal(generated.inputs, gen_dataset("blobs", 20, 0.3, 4).inputs)

        path = save_csv_dataset(generated, tmp_path / "blobs.csv")
        loaded = dataset_from_spec(DatasetSpec(kind=None, csv_path=str(path), n_classes=2))
        np.testing.assert_array_equal(loaded.inputs, generated.inputs)
        assert loaded.n_classes == 2
