"""
器件变化模型
量化映射、有界高斯写入噪声与写验证掩码
"""

from .quantization import deploy, parameter_steps, quantize
from .variation import (
    apply_noise,
    empty_mask,
    full_mask,
    noise_bounds,
    sample_unit_variation,
    sample_variation,
    variation_digest,
)

__all__ = [
    "deploy",
    "parameter_steps",
    "quantize",
    "apply_noise",
    "empty_mask",
    "full_mask",
    "noise_bounds",
    "sample_unit_variation",
    "sample_variation",
    "variation_digest",
]
