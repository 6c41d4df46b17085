"""
实验室统一异常定义
所有异常都携带结构化的 details 字典，便于流水线写入运行清单
"""

from typing import Any, Dict, List, Optional, Sequence


class CimLabError(Exception):
    """CimLab 异常基类"""

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = details

    def to_dict(self) -> Dict[str, Any]:
        """转换为可序列化的字典"""
        return {"type": self.__class__.__name__, "message": self.message, "details": self.details}


class ShapeMismatchError(CimLabError, ValueError):
    """张量形状不匹配"""

    def __init__(self, layer: int, expected: Any, actual: Any, what: str = "输入宽度"):
        super().__init__(
            f"第 {layer} 层{what}不匹配: 期望 {expected}，实际 {actual}",
            layer=layer, expected=expected, actual=actual,
        )


class EmptyBatchError(CimLabError, ValueError):
    """空批次或空数据集"""


class NonFiniteError(CimLabError, ArithmeticError):
    """出现 NaN/Inf"""


class TrainingDivergedError(CimLabError, ArithmeticError):
    """训练发散（损失为 NaN/Inf）"""

    def __init__(self, epoch: int, loss: float):
        super().__init__(f"训练在第 {epoch} 轮发散，损失为 {loss}", epoch=epoch, loss=loss)


class QuantizationError(CimLabError, ValueError):
    """量化参数非法"""


class VariationError(CimLabError, ValueError):
    """器件变化采样或加噪参数非法"""


class DistributionError(CimLabError, ValueError):
    """精度分布为空或百分位参数非法"""


class AttackFailedError(CimLabError, RuntimeError):
    """所有重启均因数值问题中止"""

    def __init__(self, reasons: Sequence[str]):
        super().__init__(f"全部 {len(reasons)} 次重启均已中止", reasons=list(reasons))


class OracleTooLargeError(CimLabError, ValueError):
    """参数量超过角点穷举上限"""

    def __init__(self, param_count: int, guard: int):
        super().__init__(
            f"参数量 {param_count} 超过角点穷举上限 {guard}，请改用 pga_attack",
            param_count=param_count, guard=guard,
        )


class UnknownDatasetError(CimLabError, ValueError):
    """未知的数据集生成器"""

    def __init__(self, kind: str, available: List[str]):
        super().__init__(
            f"未知的数据集类型 '{kind}'，可用类型: {', '.join(available)}",
            kind=kind, available=available,
        )


class DatasetFormatError(CimLabError, ValueError):
    """数据集文件格式错误"""

    def __init__(self, message: str, path: str, line: Optional[int] = None):
        location = f"{path}:{line}" if line is not None else path
        super().__init__(f"{location}: {message}", path=path, line=line)


class ConfigError(CimLabError, ValueError):
    """实验配置非法"""
