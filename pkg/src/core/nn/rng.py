"""
可复现随机数流
所有随机过程都从 (master_seed, 领域, 索引...) 派生独立的 PCG64 流，
高斯样本由 Box-Muller 变换在均匀流上生成，保证跨平台一致
"""

from enum import IntEnum
from typing import Union

import numpy as np


class StreamDomain(IntEnum):
    """随机流领域标签，保证不同用途的流互不重叠"""
    INIT = 0
    SHUFFLE = 1
    DATASET = 2
    MC_TRIAL = 3
    ATTACK_RESTART = 4
    TRICE_NOISE = 5
    RANDOM_MASK = 6


def derive_stream_seed(master_seed: int, domain: Union[StreamDomain, int], *indices: int) -> int:
    """从主种子派生64位流种子

    嵌套派生只依赖 (master_seed, domain, indices)，因此增加试验次数不会改变已有试验的流。

    Args:
        master_seed: 非负主种子
        domain: 流领域
        *indices: 领域内索引（如试验编号、重启编号）

    Returns:
        64位无符号整数种子
    """
    if master_seed < 0:
        raise ValueError(f"master_seed必须为非负整数，实际为 {master_seed}")
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(domain), *(int(i) for i in indices)))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def make_generator(stream_seed: int) -> np.random.Generator:
    """由流种子构造 PCG64 生成器"""
    return np.random.Generator(np.random.PCG64(int(stream_seed)))


def stream_generator(master_seed: int, domain: Union[StreamDomain, int], *indices: int) -> np.random.Generator:
    """派生并构造生成器的便捷函数"""
    return make_generator(derive_stream_seed(master_seed, domain, *indices))


def standard_normal(gen: np.random.Generator, size: int) -> np.ndarray:
    """Box-Muller 标准正态采样

    每对均匀数 (u1, u2) 产生两个正态数，按 z1, z2 交错排列；奇数个时丢弃最后一个。

    Args:
        gen: 随机生成器
        size: 样本数

    Returns:
        形状为 (size,) 的 float64 数组
    """
    if size <= 0:
        return np.zeros(0, dtype=np.float64)
    pairs = (size + 1) // 2
    u1 = 1.0 - gen.random(pairs)  # (0, 1]，避免 log(0)
    u2 = gen.random(pairs)
    radius = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    out = np.empty(2 * pairs, dtype=np.float64)
    out[0::2] = radius * np.cos(theta)
    out[1::2] = radius * np.sin(theta)
    return out[:size]
