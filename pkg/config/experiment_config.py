"""
实验配置文件
提供统一的实验配置模型：一个JSON文档 = 一个可复现的实验
"""

import json
import math
from pathlib import Path
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from config.lab_config import LabConfig
from src.core.errors import ConfigError

STAGES = ("train", "mc", "worst_case", "swim", "trice", "benchmark")

# 阶段依赖关系，run_pipeline 按此顺序补齐并执行
STAGE_DEPENDENCIES = {
    "train": (),
    "mc": ("train",),
    "worst_case": ("train",),
    "swim": ("train",),
    "trice": (),
    "benchmark": ("trice",),
}


class _Section(BaseModel):
    """配置段基类"""

    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class ModelSpec(_Section):
    """网络结构配置"""

    dims: List[int] = Field(default=[2, 16, 2], description="各层宽度，首项为输入维度，末项为类别数")
    hidden_activation: Literal["relu", "identity"] = Field(default="relu", description="隐藏层激活")
    output_activation: Literal["relu", "identity"] = Field(default="identity", description="输出层激活")
    init_seed: int = Field(default=0, description="初始化随机种子")

    @field_validator("dims")
    @classmethod
    def validate_dims(cls, v):
        """验证层宽度"""
        if len(v) < 2:
            raise ValueError("dims至少包含输入维度与类别数")
        if any(d < 1 for d in v):
            raise ValueError("dims中每一项都必须为正整数")
        return v

    @property
    def activations(self) -> List[str]:
        """逐层激活标签"""
        n_layers = len(self.dims) - 1
        return [self.hidden_activation] * (n_layers - 1) + [self.output_activation]


class DatasetSpec(_Section):
    """数据集配置：生成器或CSV文件二选一"""

    kind: Optional[str] = Field(default="blobs", description="生成器名称: blobs / moons / xor_grid")
    n: int = Field(default=400, ge=4, description="样本数")
    noise: float = Field(default=0.5, ge=0, description="高斯噪声标准差")
    seed: int = Field(default=7, description="生成随机种子")
    csv_path: Optional[str] = Field(default=None, description="CSV数据集路径（label,f1,...,fd）")
    has_header: bool = Field(default=False, description="CSV是否含表头")
    n_classes: Optional[int] = Field(default=None, ge=1, description="类别数，缺省时由标签推断")

    @model_validator(mode="after")
    def validate_source(self):
        """生成器与CSV必须且只能指定一个"""
        if (self.kind is None) == (self.csv_path is None):
            raise ValueError("kind与csv_path必须且只能指定一个")
        return self


class TrainingConfig(_Section):
    """基线训练配置"""

    epochs: int = Field(default=LabConfig.EPOCHS, ge=1, description="训练轮数")
    lr: float = Field(default=LabConfig.LEARNING_RATE, ge=0, description="学习率")
    momentum: float = Field(default=LabConfig.MOMENTUM, ge=0, lt=1, description="动量")
    batch_size: int = Field(default=LabConfig.BATCH_SIZE, ge=1, description="批大小")
    seed: int = Field(default=0, description="打乱顺序的随机种子")


class QuantizationSpec(_Section):
    """权重量化配置"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    bits: int = Field(default=LabConfig.QUANT_BITS, ge=1, le=16, description="量化位数")
    range_mode: Literal["per_tensor_max_abs"] = Field(default="per_tensor_max_abs", description="量化范围模式")

    @property
    def levels(self) -> int:
        """量化级数"""
        return 2 ** self.bits


class VariationModel(_Section):
    """器件变化模型，噪声参数均以量化步长为单位"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    sigma: float = Field(default=1.0, ge=0, allow_inf_nan=False, description="高斯权重噪声标准差（步长单位）")
    th_g: float = Field(default=3.0, ge=0, allow_inf_nan=False, description="未写验证器件的噪声上界")
    th_wv: float = Field(default=1.0, ge=0, allow_inf_nan=False, description="写验证后的噪声上界")
    verify_cost_V: float = Field(default=LabConfig.VERIFY_COST_V, ge=1, allow_inf_nan=False,
                                 description="写验证器件的平均写周期")
    bits: int = Field(default=LabConfig.QUANT_BITS, ge=1, le=16, description="部署量化位数")

    @model_validator(mode="after")
    def validate_bounds(self):
        """写验证上界不得超过未验证上界"""
        if self.th_wv > self.th_g:
            raise ValueError(f"th_wv ({self.th_wv}) 不能大于 th_g ({self.th_g})")
        return self

    @property
    def quantization(self) -> QuantizationSpec:
        """对应的量化配置"""
        return QuantizationSpec(bits=self.bits)


class McConfig(_Section):
    """蒙特卡洛评估配置"""

    n_runs: int = Field(default=LabConfig.MC_RUNS, ge=1, description="MC次数")
    k_list: List[float] = Field(default=list(LabConfig.KPP_K_LIST), description="KPP百分位列表")

    @field_validator("k_list")
    @classmethod
    def validate_k(cls, v):
        """k 取值范围 (0, 100]"""
        if any(not 0 < k <= 100 for k in v):
            raise ValueError("k必须在(0, 100]之间")
        return v


class AttackConfig(_Section):
    """最坏情况搜索配置，噪声上界取自 VariationModel.th_g"""

    steps: int = Field(default=LabConfig.ATTACK_STEPS, ge=1, description="每次重启的迭代步数")
    step_size: Optional[float] = Field(default=None, gt=0, description="步长（步长单位），缺省为 th_g/10")
    restarts: int = Field(default=LabConfig.ATTACK_RESTARTS, ge=1, description="重启次数")
    seed: int = Field(default=0, description="重启随机初始化的主种子")
    surrogate: Literal["cross_entropy"] = Field(default="cross_entropy", description="可微替代目标")
    polish_passes: int = Field(default=LabConfig.ATTACK_POLISH_PASSES, ge=0, description="角点单坐标翻转打磨轮数")
    n_mc: int = Field(default=LabConfig.MC_RUNS, ge=LabConfig.GAP_MIN_MC, description="差距报告的MC次数")
    th_grid: List[float] = Field(default_factory=list, description="上界扫描网格（可选）")


class SwimConfig(_Section):
    """选择性写验证配置"""

    budget_grid: List[float] = Field(default=list(LabConfig.BUDGET_GRID), description="预算网格（升序）")
    target_drop: float = Field(default=0.02, ge=0, le=1, description="允许的平均精度下降 ΔAcc")
    min_accuracy: Optional[float] = Field(default=None, ge=0, le=1, description="绝对平均精度门限，给定时取代 target_drop")
    n_mc: int = Field(default=LabConfig.SWIM_MC_RUNS, ge=1, description="每个预算的MC次数")
    compare_budget: float = Field(default=0.1, ge=0, le=1, description="与随机/幅值基线对比的预算")
    n_seeds: int = Field(default=LabConfig.SWIM_COMPARE_SEEDS, ge=20, description="配对对比的种子数")
    group_size: int = Field(default=LabConfig.VERIFY_GROUP_SIZE, ge=1, description="写验证粒度（连续索引分组）")
    objective: Literal["cross_entropy", "squared_error"] = Field(default="cross_entropy", description="敏感度目标")

    @field_validator("budget_grid")
    @classmethod
    def validate_grid(cls, v):
        """预算网格必须升序且位于[0, 1]"""
        if not v:
            raise ValueError("budget_grid不能为空")
        if list(v) != sorted(v) or any(b < 0 or b > 1 for b in v):
            raise ValueError("budget_grid必须升序且取值在[0, 1]之间")
        return v


class TriceConfig(_Section):
    """右删失高斯噪声训练配置"""

    sigma_train: float = Field(default=1.0, ge=0, allow_inf_nan=False, description="训练噪声标准差（步长单位）")
    censor_T: float = Field(default=LabConfig.CENSOR_T, description="右删失阈值（sigma_train的倍数），inf表示不删失")
    epochs: int = Field(default=LabConfig.EPOCHS, ge=1, description="训练轮数")
    lr: float = Field(default=LabConfig.LEARNING_RATE, ge=0, description="学习率")
    momentum: float = Field(default=LabConfig.MOMENTUM, ge=0, lt=1, description="动量")
    batch_size: int = Field(default=LabConfig.BATCH_SIZE, ge=1, description="批大小")
    seed: int = Field(default=0, description="训练随机种子")
    bits: int = Field(default=LabConfig.QUANT_BITS, ge=2, le=16, description="计算噪声步长所用的量化位数")
    resample: Literal["per_batch"] = Field(default="per_batch", description="噪声重采样粒度")
    censor_grid: List[float] = Field(default=list(LabConfig.CENSOR_GRID), description="CLI扫描的删失阈值网格")

    @field_validator("censor_T")
    @classmethod
    def validate_censor(cls, v):
        """删失阈值不能是NaN"""
        if math.isnan(v):
            raise ValueError("censor_T不能为NaN")
        return v

    @property
    def censored(self) -> bool:
        """是否启用右删失"""
        return math.isfinite(self.censor_T)


class BenchmarkConfig(_Section):
    """KPP对比基准配置"""

    n_runs: int = Field(default=2000, ge=1, description="配对MC次数")
    k_list: List[float] = Field(default=list(LabConfig.KPP_K_LIST), description="KPP百分位列表")
    baselines: List[Literal["vanilla", "gaussian", "trice"]] = Field(
        default=["vanilla", "gaussian", "trice"], description="参与对比的模型")


class ExperimentConfig(_Section):
    """实验配置"""

    name: str = Field(default="experiment", description="实验名称")
    stages: List[Literal["train", "mc", "worst_case", "swim", "trice", "benchmark"]] = Field(
        default=list(STAGES), description="要执行的阶段")
    model: ModelSpec = Field(default_factory=ModelSpec)
    dataset: DatasetSpec = Field(default_factory=DatasetSpec)
    training: TrainingConfig = Field(default_factory=TrainingConfig)
    variation: VariationModel = Field(default_factory=VariationModel)
    mc: McConfig = Field(default_factory=McConfig)
    attack: AttackConfig = Field(default_factory=AttackConfig)
    swim: SwimConfig = Field(default_factory=SwimConfig)
    trice: TriceConfig = Field(default_factory=TriceConfig)
    benchmark: BenchmarkConfig = Field(default_factory=BenchmarkConfig)
    output_dir: str = Field(default="data/output", description="输出目录")
    master_seed: int = Field(default=0, description="实验主种子")

    @model_validator(mode="after")
    def validate_shapes(self):
        """数据集维度需要与网络结构一致（仅生成器可在加载前检查）"""
        if self.dataset.kind is not None and self.dims_input != 2:
            raise ValueError(f"生成器数据集为二维输入，但 model.dims[0] = {self.dims_input}")
        return self

    @property
    def dims_input(self) -> int:
        """输入维度"""
        return self.model.dims[0]

    def resolved_stages(self) -> List[str]:
        """补齐依赖后的阶段列表（按执行顺序）"""
        requested = set()
        pending = list(self.stages)
        while pending:
            stage = pending.pop()
            if stage not in requested:
                requested.add(stage)
                pending.extend(STAGE_DEPENDENCIES[stage])
        return [s for s in STAGES if s in requested]


def load_experiment_config(path: Union[str, Path]) -> ExperimentConfig:
    """从JSON文件加载实验配置

    Args:
        path: 配置文件路径

    Returns:
        验证后的实验配置，CSV路径已解析为绝对路径
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"配置文件不存在: {path}", path=str(path))

    try:
        with open(path, 'r', encoding='utf-8') as f:
            raw = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"配置文件不是合法JSON: {e}", path=str(path)) from e

    try:
        config = ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"配置验证失败: {e}", path=str(path), errors=e.errors(include_url=False)) from e

    if config.dataset.csv_path is not None:
        csv_path = Path(config.dataset.csv_path)
        if not csv_path.is_absolute():
            csv_path = (path.parent / csv_path).resolve()
        if not csv_path.exists():
            raise ConfigError(f"数据集文件不存在: {csv_path}", path=str(csv_path))
        config.dataset.csv_path = str(csv_path)

    return config


def config_digest(config: ExperimentConfig) -> str:
    """计算实验配置摘要

    输出目录与阶段选择不影响结果，不计入摘要；CSV数据集按文件内容计入。

    Args:
        config: 实验配置

    Returns:
        sha256 十六进制摘要
    """
    from src.utils.file_handling.artifacts import canonical_json, sha256_file, sha256_hex

    payload = config.model_dump(mode="python", exclude={"output_dir", "stages"})
    if config.dataset.csv_path is not None:
        payload["dataset"]["csv_path"] = sha256_file(config.dataset.csv_path)
    return sha256_hex(canonical_json(payload))
