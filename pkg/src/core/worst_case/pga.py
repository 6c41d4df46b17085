"""
最坏情况权重扰动搜索
在 |ΔW_i| ≤ b_i·step_i 的盒约束内，以交叉熵上升为替代目标做多重启投影梯度上升，
寻找使精度最低的扰动组合
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from config.experiment_config import AttackConfig, VariationModel
from config.lab_config import LabConfig
from src.core.device.quantization import parameter_steps
from src.core.device.variation import StepLike, apply_noise, noise_bounds
from src.core.errors import AttackFailedError, NonFiniteError
from src.core.nn.mlp import Dataset, Mlp, forward, log_softmax, loss_and_grads
from src.core.nn.rng import StreamDomain, stream_generator
from src.utils.logging_manager import get_attack_logger, log_execution_time

logger = get_attack_logger(__name__)


@dataclass
class AttackResult:
    """最坏情况搜索结果"""

    delta_w: np.ndarray
    attacked_accuracy: float
    attacked_loss: float
    loss_trace: List[float] = field(default_factory=list)
    restart_index: int = 0
    th_g: float = 0.0
    steps: int = 0
    restarts: int = 0
    restart_accuracies: List[Optional[float]] = field(default_factory=list)
    promoted: bool = False

    def to_dict(self, delta_w_file: Optional[str] = None) -> dict:
        """AttackResult JSON 内容（ΔW 另存为检查点）"""
        return {
            "attacked_accuracy": self.attacked_accuracy,
            "attacked_loss": self.attacked_loss,
            "th_g": self.th_g,
            "steps": self.steps,
            "restarts": self.restarts,
            "restart_index": self.restart_index,
            "restart_accuracies": self.restart_accuracies,
            "promoted": self.promoted,
            "delta_w_file": delta_w_file,
        }


def evaluate_perturbation(model: Mlp, dataset: Dataset, delta_w: np.ndarray) -> Tuple[float, float]:
    """一次前向同时得到加扰后的精度与平均交叉熵

    Returns:
        (accuracy, loss)
    """
    logits = forward(apply_noise(model, delta_w), dataset.inputs)
    log_probs = log_softmax(logits)
    rows = np.arange(dataset.n)
    acc = float(np.mean(np.argmax(logits, axis=1) == dataset.targets))
    loss = float(-log_probs[rows, dataset.targets].mean())
    return acc, loss


def _better(candidate: Tuple[float, float], incumbent: Tuple[float, float]) -> bool:
    """精度更低者更优，精度相同时损失更高者更优"""
    return candidate[0] < incumbent[0] or (candidate[0] == incumbent[0] and candidate[1] > incumbent[1])


def snap_to_corner(delta_w: np.ndarray, bounds: np.ndarray) -> np.ndarray:
    """把盒内扰动按符号吸附到角点，0 吸附到正角"""
    return np.where(delta_w < 0, -bounds, bounds)


def polish_corner(model: Mlp, dataset: Dataset, corner: np.ndarray, score: Tuple[float, float],
                  passes: int) -> Tuple[np.ndarray, Tuple[float, float]]:
    """贪心单坐标翻转：逐个翻转角点坐标，变好则保留

    Args:
        corner: 起始角点
        score: 起始角点的 (accuracy, loss)
        passes: 扫描轮数

    Returns:
        (打磨后的角点, 其 (accuracy, loss))
    """
    corner = corner.copy()
    for _ in range(passes):
        improved = False
        for i in np.flatnonzero(corner != 0):
            corner[i] = -corner[i]
            trial = evaluate_perturbation(model, dataset, corner)
            if _better(trial, score):
                score = trial
                improved = True
            else:
                corner[i] = -corner[i]
        if not improved:
            break
    return corner, score


def _run_restart(args: Tuple) -> Tuple[Optional[np.ndarray], Optional[Tuple[float, float]], List[float], str]:
    """单次重启（模块级函数以便在进程池中执行）

    Returns:
        (最优扰动, (accuracy, loss), 损失轨迹, 中止原因)；中止时前两项为 None
    """
    model, dataset, bounds, eta, cfg, restart = args
    gen = stream_generator(cfg.seed, StreamDomain.ATTACK_RESTART, restart)
    delta_w = gen.uniform(-1.0, 1.0, size=bounds.shape[0]) * bounds
    params = model.flatten()

    trace: List[float] = []

    try:
        best_dw = delta_w.copy()
        best_score = evaluate_perturbation(model, dataset, delta_w)
        for _ in range(cfg.steps):
            loss, grads = loss_and_grads(model.with_parameters(params + delta_w), dataset)
            trace.append(loss)
            delta_w = np.clip(delta_w + eta * np.sign(grads), -bounds, bounds)
            for candidate in (delta_w, snap_to_corner(delta_w, bounds)):
                score = evaluate_perturbation(model, dataset, candidate)
                if _better(score, best_score):
                    best_dw, best_score = candidate.copy(), score

        if cfg.polish_passes > 0:
            corner = snap_to_corner(best_dw, bounds)
            corner, corner_score = polish_corner(
                model, dataset, corner, evaluate_perturbation(model, dataset, corner), cfg.polish_passes)
            if _better(corner_score, best_score):
                best_dw, best_score = corner, corner_score
    except NonFiniteError as e:
        return None, None, trace, f"重启 {restart}: {e.message}"

    return best_dw, best_score, trace, ""


@log_execution_time()
def pga_attack(model: Mlp, dataset: Dataset, vm: VariationModel, cfg: AttackConfig,
               steps: Optional[StepLike] = None, mask: Optional[np.ndarray] = None,
               jobs: int = 1) -> AttackResult:
    """多重启投影梯度上升的最坏情况扰动搜索

    每次重启从 (cfg.seed, 重启编号) 派生的流在盒内均匀初始化，迭代
    ΔW ← clip(ΔW + η·sign(∂L/∂W |_{W+ΔW}), ±b·step)。每次重启保留所见精度最低
    （其次损失最高）的迭代点或其符号角点，结束后对角点做单坐标翻转打磨。

    Args:
        model: 部署后的网络
        dataset: 评估数据集
        vm: 器件变化模型（上界 th_g / th_wv 为步长单位）
        cfg: 搜索配置，step_size 缺省为 th_g/10
        steps: 逐参数量化步长，缺省按 vm.bits 由网络计算
        mask: 写验证掩码，验证过的坐标上界为 th_wv
        jobs: 并行重启的进程数

    Returns:
        精度最低的重启结果，平局取最小重启编号
    """
    if steps is None:
        steps = parameter_steps(model, vm.quantization)
    mask = np.zeros(model.param_count, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    bounds = noise_bounds(vm, mask) * steps
    step_size = cfg.step_size if cfg.step_size is not None else vm.th_g / LabConfig.ATTACK_STEP_DIVISOR
    eta = step_size * np.broadcast_to(np.asarray(steps, dtype=np.float64), bounds.shape)

    if not np.any(bounds > 0):
        acc, loss = evaluate_perturbation(model, dataset, np.zeros(model.param_count))
        logger.info("噪声上界为 0，最坏情况即无扰动精度")
        return AttackResult(np.zeros(model.param_count), acc, loss, [loss], 0, vm.th_g,
                            cfg.steps, cfg.restarts, [acc] * cfg.restarts)

    tasks = [(model, dataset, bounds, eta, cfg, r) for r in range(cfg.restarts)]
    if jobs > 1 and cfg.restarts > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            outcomes = list(executor.map(_run_restart, tasks))
    else:
        outcomes = [_run_restart(task) for task in tasks]

    winner: Optional[int] = None
    reasons = []
    for restart, (delta_w, score, _, reason) in enumerate(outcomes):
        if delta_w is None:
            logger.warning(f"重启中止: {reason}")
            reasons.append(reason)
            continue
        logger.debug(f"重启 {restart}: 精度 {score[0]:.4f}, 损失 {score[1]:.4f}")
        if winner is None or score[0] < outcomes[winner][1][0]:
            winner = restart

    if winner is None:
        raise AttackFailedError(reasons)

    delta_w, (acc, loss), trace, _ = outcomes[winner]
    if np.any(np.abs(delta_w) > bounds):
        raise AttackFailedError([f"重启 {winner} 的扰动越出盒约束"])

    logger.info(f"最坏情况搜索完成: th_g={vm.th_g}, 重启 {winner} 精度最低 {acc:.4f}")
    return AttackResult(
        delta_w=delta_w,
        attacked_accuracy=acc,
        attacked_loss=loss,
        loss_trace=trace,
        restart_index=winner,
        th_g=vm.th_g,
        steps=cfg.steps,
        restarts=cfg.restarts,
        restart_accuracies=[None if o[1] is None else o[1][0] for o in outcomes],
    )
