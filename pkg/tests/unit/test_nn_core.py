"""
最小神经网络核心测试
测试随机流、网络结构、解析梯度、SGD训练器与检查点
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# 添加项目根目录到路径
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.core.errors import EmptyBatchError, ShapeMismatchError, TrainingDivergedError
from src.core.nn.checkpoint import load_checkpoint, save_checkpoint
from src.core.nn.mlp import (
    Dataset,
    DenseLayer,
    Mlp,
    accuracy,
    cross_entropy,
    forward,
    forward_trace,
    init_mlp,
    loss_and_grads,
    predict,
)
from src.core.nn.rng import StreamDomain, derive_stream_seed, make_generator, standard_normal
from src.core.nn.trainer import SgdState, sgd_update, train

from tests.test_utils import (
    BLOBS_DIMS,
    finite_difference_grads,
    get_blobs_dataset,
    get_trained_blobs_model,
    load_fixture,
    random_batch,
    random_small_model,
)


class TestRandomStreams:
    """可复现随机流测试类"""

    def test_derivation_is_deterministic(self):
        """相同输入派生相同种子"""
        assert derive_stream_seed(3, StreamDomain.MC_TRIAL, 5) == derive_stream_seed(3, StreamDomain.MC_TRIAL, 5)

    def test_domains_and_indices_are_separated(self):
        """不同领域或索引得到不同种子"""
        seeds = {
            derive_stream_seed(0, StreamDomain.MC_TRIAL, 0),
            derive_stream_seed(0, StreamDomain.MC_TRIAL, 1),
            derive_stream_seed(0, StreamDomain.ATTACK_RESTART, 0),
            derive_stream_seed(1, StreamDomain.MC_TRIAL, 0),
        }
        assert len(seeds) == 4, "派生种子不应碰撞"

    def test_negative_master_seed_rejected(self):
        """负主种子报错"""
        with pytest.raises(ValueError):
            derive_stream_seed(-1, StreamDomain.INIT)

    def test_box_muller_odd_size_is_prefix(self):
        """奇数个样本是偶数个样本的前缀"""
        odd = standard_normal(make_generator(11), 5)
        even = standard_normal(make_generator(11), 6)
        np.testing.assert_array_equal(odd, even[:5])

    def test_box_muller_moments(self):
        """Box-Muller 样本的均值与方差"""
        draws = standard_normal(make_generator(2024), 200_000)
        assert abs(draws.mean()) < 3 / np.sqrt(draws.size), "样本均值应接近 0"
        assert abs(draws.var() - 1.0) < 0.02, "样本方差应接近 1"


class TestMlp:
    """网络结构测试类"""

    def test_flatten_round_trip(self):
        """展平后还原得到相同参数"""
        model = init_mlp([3, 4, 2], seed=1)
        restored = model.with_parameters(model.flatten())
        np.testing.assert_array_equal(restored.flatten(), model.flatten())
        assert restored.dims == [3, 4, 2]
        assert model.param_count == 3 * 4 + 4 + 4 * 2 + 2

    def test_layer_chain_mismatch(self):
        """相邻层宽度不一致时报错"""
        with pytest.raises(ShapeMismatchError):
            Mlp((DenseLayer(np.zeros((4, 3)), np.zeros(4)), DenseLayer(np.zeros((2, 5)), np.zeros(2))))

    def test_input_width_mismatch(self):
        """输入宽度不一致时报错"""
        model = init_mlp([3, 2])
        with pytest.raises(ShapeMismatchError):
            forward(model, np.zeros((2, 4)))

    def test_parameters_are_immutable(self):
        """网络参数只读"""
        model = init_mlp([2, 2])
        with pytest.raises(ValueError):
            model.layers[0].weight[0, 0] = 1.0

    def test_predict_ties_take_lowest_class(self):
        """logits 相同时取最小类别"""
        model = Mlp.from_arrays([np.zeros((3, 2))], [np.zeros(3)], ["identity"])
        np.testing.assert_array_equal(predict(model, np.ones((4, 2))), np.zeros(4, dtype=int))

    def test_empty_dataset_rejected(self):
        """空数据集报错"""
        with pytest.raises(EmptyBatchError):
            Dataset(np.zeros((0, 2)), np.zeros(0, dtype=int))

    def test_glorot_limits(self):
        """初始化权重落在 Glorot 区间内，偏置为零"""
        model = init_mlp([4, 6, 3], seed=5)
        for layer in model.layers:
            limit = np.sqrt(6.0 / (layer.in_dim + layer.out_dim))
            assert np.all(np.abs(layer.weight) <= limit)
            assert np.all(layer.bias == 0.0)
        assert model.activations == ["relu", "identity"]


    def test_identity_layer_returns_inputs(self):
        """单位矩阵、零偏置的 identity 层原样输出输入"""
        model = Mlp.from_arrays([np.eye(3)], [np.zeros(3)], ["identity"])
        inputs = np.array([[1.5, -2.0, 0.25], [0.0, 3.0, -7.5]])
        np.testing.assert_array_equal(forward(model, inputs), inputs)

    def test_hand_computed_two_layer_logits(self):
        """2-2-2 网络的 logits 与手算结果一致"""
        case = load_fixture("hand_2_2_2.json")
        model = Mlp.from_arrays(case["weights"], case["biases"], case["activations"])
        inputs = np.array([case["input"]])
        pre_activations, _ = forward_trace(model, inputs)
        np.testing.assert_allclose(pre_activations[0][0], case["hidden_pre_activation"], rtol=0, atol=1e-12)
        np.testing.assert_allclose(forward(model, inputs)[0], case["logits"], rtol=0, atol=1e-12)

class TestGradients:
    """解析梯度测试类"""

    def test_gradients_match_finite_differences(self):
        """100 个随机小网络上解析梯度与中心差分一致"""
        rng = np.random.default_rng(1234)
        checked = 0
        while checked < 100:
            model = random_small_model(rng, seed=checked)
            batch = random_batch(rng, model)
            pre_activations, _ = forward_trace(model, batch.inputs)
            # 跳过预激活贴近 relu 折点的样本
            if any(np.any(np.abs(z) < 1e-3) for z, a in zip(pre_activations, model.activations) if a == "relu"):
                continue
            _, analytic = loss_and_grads(model, batch)
            numeric = finite_difference_grads(model, batch)
            tolerance = np.maximum(1e-4 * np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
            assert np.all(np.abs(analytic - numeric) <= tolerance), f"第 {checked} 个用例梯度不一致"
            checked += 1

    def test_zero_model_loss_is_log_class_count(self):
        """全零网络在两类问题上的损失为 ln 2"""
        model = Mlp.from_arrays([np.zeros((2, 3))], [np.zeros(2)], ["identity"])
        batch = random_batch(np.random.default_rng(5), model)
        assert cross_entropy(model, batch) == pytest.approx(np.log(2.0), rel=1e-12)
        loss, _ = loss_and_grads(model, batch)
        assert loss == pytest.approx(np.log(2.0), rel=1e-12)

    def test_loss_matches_manual_cross_entropy(self):
        """单层网络的损失与手算一致"""
        model = Mlp.from_arrays([np.array([[1.0, 0.0], [0.0, 1.0]])], [np.zeros(2)], ["identity"])
        batch = Dataset(np.array([[2.0, 0.0]]), np.array([1]), 2)
        loss, _ = loss_and_grads(model, batch)
        expected = -np.log(np.exp(0.0) / (np.exp(2.0) + np.exp(0.0)))
        assert loss == pytest.approx(expected, rel=1e-12)


class TestSgd:
    """SGD更新测试类"""

    def test_first_step_is_plain_gradient(self):
        """首步动量缓冲等于梯度"""
        params, state = sgd_update(np.array([1.0, 2.0]), np.array([0.5, -1.0]), 0.1, 0.9, SgdState())
        np.testing.assert_allclose(params, [0.95, 2.1])
        np.testing.assert_array_equal(state.velocity, [0.5, -1.0])

    def test_converges_on_quadratic(self):
        """二次函数上收敛到极小点"""
        target = np.array([3.0, -2.0, 0.5])
        params, state = np.zeros(3), SgdState()
        for _ in range(500):
            params, state = sgd_update(params, params - target, 0.1, 0.9, state)
        np.testing.assert_allclose(params, target, atol=1e-6)

    def test_single_step_on_square_loss(self):
        """L = w² 从 w = 1 出发，lr = 0.1、无动量一步后 w = 0.8"""
        w = np.array([1.0])
        updated, _ = sgd_update(w, 2 * w, 0.1, 0.0, SgdState())
        assert updated[0] == pytest.approx(0.8, rel=1e-12)

    def test_two_momentum_steps_follow_recurrence(self):
        """动量 0.9 的两步与手写标量递推一致"""
        lr, mu = 0.1, 0.9
        w0 = 1.0
        v1 = 2 * w0
        w1 = w0 - lr * v1
        v2 = mu * v1 + 2 * w1
        w2 = w1 - lr * v2

        params, state = np.array([w0]), SgdState()
        params, state = sgd_update(params, 2 * params, lr, mu, state)
        assert params[0] == pytest.approx(w1, rel=1e-12)
        params, state = sgd_update(params, 2 * params, lr, mu, state)
        assert params[0] == pytest.approx(w2, rel=1e-12)
        assert state.velocity[0] == pytest.approx(v2, rel=1e-12)
        assert w2 == pytest.approx(0.46, rel=1e-12)

    @pytest.mark.parametrize("lr, momentum", [(-0.1, 0.0), (0.1, 1.0), (0.1, -0.5)])
    def test_invalid_hyperparameters(self, lr, momentum):
        """非法学习率或动量报错"""
        with pytest.raises(ValueError):
            sgd_update(np.zeros(2), np.zeros(2), lr, momentum, SgdState())


class TestTraining:
    """训练器测试类"""

    @pytest.fixture
    def dataset(self):
        """blobs 数据集夹具"""
        return get_blobs_dataset()

    def test_baseline_reaches_target_accuracy(self, dataset):
        """blobs 基线在 50 轮内训练精度 ≥ 95%"""
        model = get_trained_blobs_model()
        assert accuracy(model, dataset) >= 0.95, "基线训练精度未达到 95%"

    def test_training_is_deterministic(self, dataset):
        """相同种子训练结果逐位一致"""
        first = train(init_mlp(BLOBS_DIMS, seed=3), dataset, 3, 0.1, 0.9, seed=3)
        second = train(init_mlp(BLOBS_DIMS, seed=3), dataset, 3, 0.1, 0.9, seed=3)
        np.testing.assert_array_equal(first.model.flatten(), second.model.flatten())
        assert first.loss_history == second.loss_history

    def test_different_seed_changes_trajectory(self, dataset):
        """不同的打乱种子得到不同结果"""
        first = train(init_mlp(BLOBS_DIMS, seed=3), dataset, 2, 0.1, 0.9, seed=3)
        second = train(init_mlp(BLOBS_DIMS, seed=3), dataset, 2, 0.1, 0.9, seed=4)
        assert not np.array_equal(first.model.flatten(), second.model.flatten())

    def test_loss_decreases(self, dataset):
        """训练损失整体下降"""
        result = train(init_mlp(BLOBS_DIMS, seed=0), dataset, 10, 0.1, 0.9, seed=0)
        assert len(result.loss_history) == 10
        assert result.loss_history[-1] < result.loss_history[0]

    def test_first_epoch_lowers_loss_across_seeds(self, dataset):
        """至少 9 / 10 个种子上第一轮训练后全数据损失下降"""
        lowered = 0
        for seed in range(10):
            model = init_mlp(BLOBS_DIMS, seed=seed)
            before = cross_entropy(model, dataset)
            after = cross_entropy(train(model, dataset, 1, 0.1, 0.9, seed=seed).model, dataset)
            lowered += after < before
        assert lowered >= 9, f"只有 {lowered} / 10 个种子损失下降"

    def test_zero_learning_rate_keeps_weights(self, dataset):
        """lr = 0 时训练不改变参数"""
        model = init_mlp(BLOBS_DIMS, seed=1)
        result = train(model, dataset, 2, 0.0, 0.9, seed=1)
        np.testing.assert_array_equal(result.model.flatten(), model.flatten())

    def test_divergence_reported(self, dataset):
        """学习率过大时报告发散"""
        with pytest.raises(TrainingDivergedError):
            train(init_mlp(BLOBS_DIMS, seed=0), dataset, 5, 1e250, 0.0, seed=0)

    def test_noise_sampler_returning_none_is_plain_training(self, dataset):
        """噪声回调返回 None 时与普通训练一致"""
        plain = train(init_mlp(BLOBS_DIMS, seed=2), dataset, 2, 0.1, 0.9, seed=2)
        hooked = train(init_mlp(BLOBS_DIMS, seed=2), dataset, 2, 0.1, 0.9, seed=2,
                       noise_sampler=lambda model, index: None)
        np.testing.assert_array_equal(plain.model.flatten(), hooked.model.flatten())


class TestAccuracy:
    """分类精度测试类"""

    @pytest.mark.parametrize("targets, expected", [
        ([0, 1], 1.0),
        ([1, 0], 0.0),
        ([0, 0], 0.5),
    ])
    def test_hand_cases(self, targets, expected):
        """两个样本全对、全错与一对一错"""
        model = Mlp.from_arrays([np.eye(2)], [np.zeros(2)], ["identity"])
        dataset = Dataset(np.array([[1.0, 0.0], [0.0, 1.0]]), np.array(targets), 2)
        assert accuracy(model, dataset) == expected

class TestCheckpoint:
    """检查点测试类"""

    def test_round_trip_is_lossless(self, tmp_path):
        """保存后读回参数逐位一致"""
        model = get_trained_blobs_model()
        path = save_checkpoint(model, tmp_path / "model.json", {"seed": 0, "config_digest": "abc"})
        loaded, meta = load_checkpoint(path)
        np.testing.assert_array_equal(loaded.flatten(), model.flatten())
        assert loaded.activations == model.activations
        assert meta == {"seed": 0, "config_digest": "abc"}

    def test_floats_written_in_shortest_form(self, tmp_path):
        """检查点中的浮点数按最短往返表示写出，读回逐位一致"""
        weight = np.array([[0.1, 1.0 / 3.0], [2.0 ** -1074, -1e300]])
        bias = np.array([0.2, np.nextafter(1.0, 2.0)])
        model = Mlp.from_arrays([weight], [bias], ["identity"])
        path = save_checkpoint(model, tmp_path / "floats.json")
        text = path.read_text(encoding="utf-8")
        assert "0.10000000000000001" not in text
        for value in (0.1, 1.0 / 3.0, 2.0 ** -1074, -1e300, 0.2, float(np.nextafter(1.0, 2.0))):
            assert repr(value) in text, f"{value!r} 未按最短表示写出"
        loaded, _ = load_checkpoint(path)
        np.testing.assert_array_equal(loaded.flatten(), model.flatten())
