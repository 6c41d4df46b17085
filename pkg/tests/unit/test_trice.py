"""
右删失噪声训练测试
测试删失噪声采样、训练模式与配对KPP基准
"""

import sys
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

# 添加项目根目录到路径
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from config.experiment_config import QuantizationSpec, TriceConfig
from src.core.device.quantization import deploy, parameter_steps
from src.core.errors import VariationError
from src.core.nn.mlp import accuracy, init_mlp
from src.core.nn.trainer import train
from src.core.trice import (
    BENCHMARK_COLUMNS,
    CensoredNoiseSampler,
    censor_sweep,
    censored_fraction,
    censored_mean,
    censored_variance,
    kpp_benchmark,
    mode_config,
    sample_censored_noise,
    train_modes,
    trice_train,
)

from tests.test_utils import BLOBS_DIMS, get_blobs_dataset, get_trained_blobs_model, make_vm

N_DRAWS = 100_000


class TestCensoredNoise:
    """删失噪声采样测试类"""

    @pytest.mark.parametrize("censor_T", [0.0, 1.0, 2.0])
    def test_bounded_and_censored_fraction(self, censor_T):
        """样本不超过 T·σ，取到删失点的比例为 1 − Φ(T)"""
        noise = sample_censored_noise(N_DRAWS, 1.0, censor_T, 11)
        assert np.all(noise <= censor_T)
        expected = censored_fraction(censor_T)
        observed = float(np.mean(noise == censor_T))
        tolerance = 4 * np.sqrt(expected * (1 - expected) / N_DRAWS)
        assert abs(observed - expected) <= tolerance, "删失比例与理论值不符"

    @pytest.mark.parametrize("censor_T", [0.5, 1.0, 2.0])
    def test_mean_matches_closed_form(self, censor_T):
        """样本均值为负且与闭式期望一致"""
        sigma = 0.7
        noise = sample_censored_noise(N_DRAWS, sigma, censor_T, 5)
        standard_error = noise.std(ddof=1) / np.sqrt(N_DRAWS)
        expected = censored_mean(sigma, censor_T)
        assert expected < 0, "删去上尾后期望应为负"
        assert abs(noise.mean() - expected) <= 3 * standard_error
        if censor_T <= 1.0:
            assert noise.mean() < -3 * standard_error, "删失噪声均值应显著为负"

    def test_variance_matches_closed_form(self):
        """样本方差与闭式方差一致"""
        noise = sample_censored_noise(N_DRAWS, 2.0, 1.0, 3)
        assert noise.var() == pytest.approx(censored_variance(2.0, 1.0), rel=0.02)

    def test_closed_form_values(self):
        """闭式结果的特殊值"""
        assert censored_fraction(0.0) == pytest.approx(0.5)
        assert censored_mean(1.0, 0.0) == pytest.approx(-stats.norm.pdf(0.0))
        assert censored_mean(3.0, float("inf")) == 0.0
        assert censored_variance(3.0, float("inf")) == 9.0

    def test_uncensored_is_plain_gaussian(self):
        """T = inf 时与未删失高斯一致"""
        noise = sample_censored_noise(N_DRAWS, 1.0, float("inf"), 21)
        assert noise.max() > 3.0
        assert abs(noise.mean()) < 4 / np.sqrt(N_DRAWS)

    def test_zero_sigma(self):
        """σ = 0 时噪声为零"""
        np.testing.assert_array_equal(sample_censored_noise(8, 0.0, 1.0, 0), np.zeros(8))

    def test_invalid_parameters(self):
        """负 σ 或 NaN 阈值报错"""
        with pytest.raises(VariationError):
            sample_censored_noise(4, -1.0, 1.0, 0)
        with pytest.raises(VariationError):
            sample_censored_noise(4, 1.0, float("nan"), 0)
        with pytest.raises(ValueError):
            TriceConfig(censor_T=float("nan"))


class TestTriceTraining:
    """删失噪声训练测试类"""

    @pytest.fixture
    def cfg(self):
        """短训练配置"""
        return TriceConfig(sigma_train=1.0, censor_T=1.0, epochs=3, batch_size=16, seed=2, bits=8)

    def test_zero_sigma_matches_plain_training(self, cfg):
        """sigma_train = 0 与同种子的普通训练逐位一致"""
        model, dataset = init_mlp(BLOBS_DIMS, seed=1), get_blobs_dataset()
        noiseless = trice_train(model, dataset, cfg.model_copy(update={"sigma_train": 0.0}))
        plain = train(model, dataset, cfg.epochs, cfg.lr, cfg.momentum, cfg.seed, batch_size=cfg.batch_size)
        np.testing.assert_array_equal(noiseless.model.flatten(), plain.model.flatten())
        assert noiseless.loss_history == plain.loss_history

    def test_deterministic(self, cfg):
        """相同配置训练结果逐位一致"""
        model, dataset = init_mlp(BLOBS_DIMS, seed=1), get_blobs_dataset()
        first = trice_train(model, dataset, cfg)
        second = trice_train(model, dataset, cfg)
        np.testing.assert_array_equal(first.model.flatten(), second.model.flatten())

    def test_modes(self, cfg):
        """vanilla 不加噪，gaussian 不删失，三种模式结果不同"""
        assert mode_config(cfg, "vanilla").sigma_train == 0.0
        assert mode_config(cfg, "gaussian").censor_T == float("inf")
        assert mode_config(cfg, "trice") == cfg
        with pytest.raises(ValueError):
            mode_config(cfg, "dropout")

        results = train_modes(init_mlp(BLOBS_DIMS, seed=1), get_blobs_dataset(), cfg)
        assert list(results) == ["vanilla", "gaussian", "trice"]
        params = [r.model.flatten() for r in results.values()]
        assert not np.array_equal(params[0], params[1])
        assert not np.array_equal(params[1], params[2])

    def test_sampler_respects_censor_point(self, cfg):
        """采样噪声不超过 T·σ·step"""
        model = get_trained_blobs_model()
        steps = parameter_steps(model, QuantizationSpec(bits=cfg.bits))
        sampler = CensoredNoiseSampler(cfg)
        for batch_index in range(5):
            noise = sampler(model, batch_index)
            assert np.all(noise <= cfg.censor_T * cfg.sigma_train * steps + 1e-15)
        np.testing.assert_array_equal(sampler(model, 3), sampler(model, 3))

    def test_censor_sweep_keys(self, cfg):
        """删失阈值扫描按网格返回结果"""
        results = censor_sweep(init_mlp(BLOBS_DIMS, seed=1), get_blobs_dataset(),
                               cfg.model_copy(update={"epochs": 1}), grid=[0.5, 2])
        assert list(results) == [0.5, 2.0]


class TestKppBenchmark:
    """配对KPP基准测试类"""

    @pytest.fixture
    def deployed(self):
        """部署后的基线网络"""
        model, _ = deploy(get_trained_blobs_model(), make_vm().quantization)
        return model

    def test_identical_models_identical_rows(self, deployed):
        """同一网络在共享噪声下得到相同的行与零配对差"""
        bench = kpp_benchmark({"a": deployed, "b": deployed}, get_blobs_dataset(), make_vm(sigma=1.0, th_g=3.0),
                              n_runs=50, k_list=[1.0, 5.0])
        table = bench.table
        assert list(table.columns) == BENCHMARK_COLUMNS
        assert len(table) == 4
        a_rows = table[table["model"] == "a"].drop(columns="model").reset_index(drop=True)
        b_rows = table[table["model"] == "b"].drop(columns="model").reset_index(drop=True)
        assert a_rows.equals(b_rows)
        paired = bench.paired_differences("a")
        assert paired["mean_diff"].tolist() == [0.0]
        assert paired["wins"].tolist() == [0] and paired["losses"].tolist() == [0]

    def test_zero_sigma_kpp_is_clean(self, deployed):
        """σ = 0 时 KPP 等于无噪声精度"""
        dataset = get_blobs_dataset()
        bench = kpp_benchmark({"vanilla": deployed}, dataset, make_vm(sigma=0.0), n_runs=20, k_list=[1.0])
        assert bench.kpp_value("vanilla", 1.0) == accuracy(deployed, dataset)
        assert bench.clean_accuracy["vanilla"] == accuracy(deployed, dataset)

    def test_models_share_noise_streams(self, deployed):
        """所有模型的试验种子一致"""
        other, _ = deploy(init_mlp(BLOBS_DIMS, seed=9), make_vm().quantization)
        bench = kpp_benchmark({"trained": deployed, "untrained": other}, get_blobs_dataset(),
                              make_vm(sigma=1.0, th_g=3.0), n_runs=10, k_list=[5.0])
        np.testing.assert_array_equal(bench.distributions["trained"].trial_seeds,
                                      bench.distributions["untrained"].trial_seeds)
