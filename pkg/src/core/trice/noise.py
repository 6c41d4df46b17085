"""
右删失高斯噪声
g ~ N(0, σ²)，输出 min(g, T·σ)：上尾整体塌缩到删失点
"""

import math

import numpy as np
from scipy import stats

from src.core.errors import VariationError
from src.core.nn.rng import make_generator, standard_normal


def sample_censored_noise(param_count: int, sigma: float, censor_T: float, stream_seed: int) -> np.ndarray:
    """采样右删失高斯噪声

    Args:
        param_count: 参数量
        sigma: 标准差（≥0）
        censor_T: 删失阈值（σ 的倍数），inf 表示不删失
        stream_seed: 流种子

    Returns:
        噪声向量，每个分量 ≤ censor_T·sigma
    """
    if sigma < 0 or math.isnan(sigma):
        raise VariationError(f"sigma必须≥0，实际为 {sigma}", sigma=sigma)
    if math.isnan(censor_T):
        raise VariationError("censor_T不能为NaN")
    if sigma == 0.0:
        return np.zeros(param_count, dtype=np.float64)
    noise = standard_normal(make_generator(stream_seed), param_count) * sigma
    if math.isfinite(censor_T):
        noise = np.minimum(noise, censor_T * sigma)
    return noise


def censored_fraction(censor_T: float) -> float:
    """被删失（取值恰为 T·σ）的理论比例 1 − Φ(T)"""
    return float(stats.norm.sf(censor_T))


def censored_mean(sigma: float, censor_T: float) -> float:
    """E[min(g, Tσ)] = σ·(T·(1 − Φ(T)) − φ(T))"""
    if not math.isfinite(censor_T):
        return 0.0
    return sigma * (censor_T * stats.norm.sf(censor_T) - stats.norm.pdf(censor_T))


def censored_variance(sigma: float, censor_T: float) -> float:
    """Var[min(g, Tσ)]，二阶矩为 σ²·(Φ(T) − T·φ(T) + T²·(1 − Φ(T)))"""
    if not math.isfinite(censor_T):
        return sigma ** 2
    second = sigma ** 2 * (stats.norm.cdf(censor_T) - censor_T * stats.norm.pdf(censor_T)
                           + censor_T ** 2 * stats.norm.sf(censor_T))
    return second - censored_mean(sigma, censor_T) ** 2
