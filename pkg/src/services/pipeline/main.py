"""
实验流水线的主入口文件
按依赖顺序执行 train / mc / worst_case / swim / trice / benchmark 阶段，
每个产物都嵌入配置摘要，相同配置的重复运行命中缓存
"""

from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from config.experiment_config import STAGE_DEPENDENCIES, ExperimentConfig, config_digest, load_experiment_config
from src.core.device.quantization import deploy
from src.core.errors import CimLabError, ShapeMismatchError
from src.core.evaluation.kpp import summary_report
from src.core.evaluation.monte_carlo import run_monte_carlo
from src.core.nn.checkpoint import load_checkpoint, save_checkpoint
from src.core.nn.mlp import Dataset, Mlp, accuracy, init_mlp
from src.core.nn.trainer import train
from src.core.swim.comparison import swim_vs_random
from src.core.swim.planner import meet_accuracy_target
from src.core.swim.sensitivity import sensitivity
from src.core.trice.benchmark import kpp_benchmark
from src.core.trice.trainer import censor_sweep, mode_config, trice_train
from src.core.worst_case.gap import attack_bound_sweep, mc_gap_report
from src.core.worst_case.pga import pga_attack
from src.services.datasets.main import dataset_from_spec
from src.services.pipeline.manifest import RunManifest
from src.utils.file_handling.artifacts import read_embedded_digest, write_csv, write_json
from src.utils.logging_manager import get_error_logger, get_pipeline_logger, log_stage

logger = get_pipeline_logger(__name__)
error_logger = get_error_logger(__name__)

# 各阶段产生的模型文件
BASELINE_CHECKPOINT = "checkpoints/baseline.json"
# 三种训练模式共用 config.trice 的训练日程，vanilla 即 sigma_train = 0 的退化情形
TRICE_CHECKPOINTS = {
    "vanilla": "checkpoints/trice_vanilla.json",
    "gaussian": "checkpoints/trice_gaussian.json",
    "trice": "checkpoints/trice.json",
}


class ExperimentRunner:
    """实验阶段执行器

    阶段方法返回本阶段写出的文件列表；训练类阶段同时把模型留在内存中供下游阶段使用。
    """

    def __init__(self, config: ExperimentConfig, jobs: int = 1):
        self.config = config
        self.jobs = jobs
        self.digest = config_digest(config)
        self.out_dir = Path(config.output_dir)
        self.timings: Dict[str, float] = {}
        self.dataset: Optional[Dataset] = None
        self.baseline: Optional[Mlp] = None
        self.trice_models: Dict[str, Mlp] = {}

    # ---------- 公共工具 ----------

    def path(self, relative: str) -> Path:
        return self.out_dir / relative

    def load_dataset(self) -> Dataset:
        """按配置得到数据集并检查与网络结构一致"""
        if self.dataset is None:
            dataset = dataset_from_spec(self.config.dataset)
            dims = self.config.model.dims
            if dataset.dim != dims[0]:
                raise ShapeMismatchError(0, dims[0], dataset.dim, what="数据集特征维度")
            if dataset.n_classes > dims[-1]:
                raise ShapeMismatchError(len(dims) - 2, dims[-1], dataset.n_classes, what="类别数")
            self.dataset = dataset
        return self.dataset

    def initial_model(self) -> Mlp:
        spec = self.config.model
        return init_mlp(spec.dims, spec.activations, spec.init_seed)

    def deployed(self, model: Mlp):
        return deploy(model, self.config.variation.quantization)

    def stage_outputs(self, stage: str) -> List[str]:
        """阶段的预期产物（相对路径）"""
        outputs = {
            "train": [BASELINE_CHECKPOINT],
            "mc": ["reports/mc_distribution.csv", "reports/mc_summary.json"],
            "worst_case": ["reports/gap_report.json", "reports/attack_result.json",
                           "checkpoints/worst_case_delta_w.json"],
            "swim": ["reports/swim_curve.csv", "reports/swim_plan.json",
                     "reports/swim_comparison.csv", "reports/swim_comparison.json"],
            "trice": list(TRICE_CHECKPOINTS.values()),
            "benchmark": ["reports/benchmark.csv", "reports/benchmark_paired.csv"],
        }[stage]
        if stage == "worst_case" and self.config.attack.th_grid:
            outputs.append("reports/attack_sweep.csv")
        return outputs

    def is_cached(self, stage: str) -> bool:
        """预期产物齐全且嵌入的配置摘要一致"""
        for relative in self.stage_outputs(stage):
            path = self.path(relative)
            if not path.exists():
                return False
            try:
                if read_embedded_digest(path) != self.digest:
                    return False
            except (OSError, ValueError):
                return False
        return True

    def restore(self, stage: str) -> None:
        """命中缓存时恢复下游阶段需要的模型"""
        if stage == "train":
            self.baseline, _ = load_checkpoint(self.path(BASELINE_CHECKPOINT))
        elif stage == "trice":
            for mode, relative in TRICE_CHECKPOINTS.items():
                self.trice_models[mode], _ = load_checkpoint(self.path(relative))

    def _meta(self, **extra) -> Dict:
        return {"config_digest": self.digest, **extra}

    # ---------- 阶段 ----------

    @log_stage
    def train(self) -> List[Path]:
        """基线训练"""
        cfg = self.config.training
        dataset = self.load_dataset()
        result = train(self.initial_model(), dataset, cfg.epochs, cfg.lr, cfg.momentum, cfg.seed,
                       batch_size=cfg.batch_size)
        self.baseline = result.model
        meta = self._meta(seed=cfg.seed, epochs=cfg.epochs, lr=cfg.lr, momentum=cfg.momentum,
                          train_accuracy=result.train_accuracy, loss_history=result.loss_history)
        return [save_checkpoint(result.model, self.path(BASELINE_CHECKPOINT), meta)]

    @log_stage
    def mc(self) -> List[Path]:
        """部署后网络的蒙特卡洛精度分布"""
        dataset = self.load_dataset()
        model, steps = self.deployed(self.baseline)
        dist = run_monte_carlo(model, dataset, self.config.variation, None, self.config.mc.n_runs,
                               self.config.master_seed, steps=steps, jobs=self.jobs)
        summary = summary_report(dist, self.config.mc.k_list)
        summary.update(clean_accuracy=accuracy(model, dataset), config_digest=self.digest)
        return [
            write_csv(self.path("reports/mc_distribution.csv"), dist.to_frame(), self.digest),
            write_json(self.path("reports/mc_summary.json"), summary),
        ]

    @log_stage
    def worst_case(self) -> List[Path]:
        """最坏情况搜索与MC差距报告"""
        dataset = self.load_dataset()
        model, steps = self.deployed(self.baseline)
        cfg = self.config.attack
        report = mc_gap_report(model, dataset, self.config.variation, cfg, cfg.n_mc,
                               master_seed=self.config.master_seed, steps=steps, jobs=self.jobs)
        delta_file = "checkpoints/worst_case_delta_w.json"
        outputs = [
            write_json(self.path("reports/gap_report.json"), {**report.to_dict(), "config_digest": self.digest}),
            write_json(self.path("reports/attack_result.json"),
                       {**report.attack.to_dict(delta_file), "config_digest": self.digest}),
            save_checkpoint(model.with_parameters(report.attack.delta_w), self.path(delta_file),
                            self._meta(kind="delta_w", th_g=self.config.variation.th_g)),
        ]
        if cfg.th_grid:
            sweep = attack_bound_sweep(model, dataset, self.config.variation, cfg, cfg.th_grid,
                                       steps=steps, jobs=self.jobs)
            outputs.append(write_csv(self.path("reports/attack_sweep.csv"), sweep, self.digest))
        return outputs

    @log_stage
    def swim(self) -> List[Path]:
        """选择性写验证：预算曲线、计划与基线对比"""
        dataset = self.load_dataset()
        model, steps = self.deployed(self.baseline)
        vm = self.config.variation
        cfg = self.config.swim
        scores = sensitivity(model, dataset, vm, steps, objective=cfg.objective)
        curve = meet_accuracy_target(model, dataset, vm, cfg.target_drop, cfg.budget_grid, n_mc=cfg.n_mc,
                                     master_seed=self.config.master_seed, scores=scores, steps=steps,
                                     group_size=cfg.group_size, jobs=self.jobs, min_accuracy=cfg.min_accuracy)

        plan_doc = {
            "feasible": curve.feasible,
            "selected_budget": curve.selected_budget,
            "clean_accuracy": curve.clean_accuracy,
            "target_drop": cfg.target_drop,
            "min_accuracy": cfg.min_accuracy,
            "threshold": curve.threshold,
            "config_digest": self.digest,
        }
        if curve.plan is not None:
            plan_doc.update(curve.plan.to_dict())
            attack = pga_attack(model, dataset, vm, self.config.attack, steps=steps, mask=curve.plan.mask,
                                jobs=self.jobs)
            plan_doc["worst_case_accuracy"] = attack.attacked_accuracy

        comparison = swim_vs_random(model, dataset, vm, cfg.compare_budget, n_seeds=cfg.n_seeds, n_mc=cfg.n_mc,
                                    master_seed=self.config.master_seed, scores=scores, steps=steps,
                                    jobs=self.jobs)
        return [
            write_csv(self.path("reports/swim_curve.csv"), curve.to_frame(), self.digest),
            write_json(self.path("reports/swim_plan.json"), plan_doc),
            write_csv(self.path("reports/swim_comparison.csv"), comparison.rows, self.digest),
            write_json(self.path("reports/swim_comparison.json"),
                       {**comparison.to_dict(), "config_digest": self.digest}),
        ]

    @log_stage
    def trice(self) -> List[Path]:
        """删失噪声训练，以及同一训练日程下的不加噪与不删失基线"""
        dataset = self.load_dataset()
        cfg = self.config.trice
        outputs = []
        for mode, relative in TRICE_CHECKPOINTS.items():
            mode_cfg = mode_config(cfg, mode)
            result = trice_train(self.initial_model(), dataset, mode_cfg)
            self.trice_models[mode] = result.model
            meta = self._meta(mode=mode, seed=cfg.seed, sigma_train=mode_cfg.sigma_train,
                              censor_T=mode_cfg.censor_T, train_accuracy=result.train_accuracy,
                              loss_history=result.loss_history)
            outputs.append(save_checkpoint(result.model, self.path(relative), meta))
        return outputs

    @log_stage
    def benchmark(self) -> List[Path]:
        """vanilla / gaussian / trice 的配对 KPP 基准"""
        dataset = self.load_dataset()
        cfg = self.config.benchmark
        models = {name: self.deployed(self.trice_models[name])[0] for name in cfg.baselines}
        result = kpp_benchmark(models, dataset, self.config.variation, cfg.n_runs, cfg.k_list,
                               master_seed=self.config.master_seed, jobs=self.jobs)
        reference = "vanilla" if "vanilla" in models else next(iter(models))
        return [
            write_csv(self.path("reports/benchmark.csv"), result.table, self.digest),
            write_csv(self.path("reports/benchmark_paired.csv"), result.paired_differences(reference), self.digest),
        ]

    def censor_sweep(self, grid: Sequence[float]) -> Path:
        """删失阈值网格扫描：逐个阈值训练并做配对 KPP 基准"""
        dataset = self.load_dataset()
        cfg = self.config.trice
        models = {}
        for censor_T, trained in censor_sweep(self.initial_model(), dataset, cfg, grid).items():
            models[f"T={censor_T:g}"] = self.deployed(trained.model)[0]
        bench = self.config.benchmark
        result = kpp_benchmark(models, dataset, self.config.variation, bench.n_runs, bench.k_list,
                               master_seed=self.config.master_seed, jobs=self.jobs)
        return write_csv(self.path("reports/censor_sweep.csv"), result.table, self.digest)

    # ---------- 编排 ----------

    def run(self, force: bool = False) -> RunManifest:
        """按依赖顺序执行全部请求的阶段

        Args:
            force: 忽略缓存重新计算

        Returns:
            运行清单
        """
        manifest = RunManifest(config_digest=self.digest)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        stages = self.config.resolved_stages()
        logger.info(f"实验 {self.config.name}: 阶段 {stages}, 配置摘要 {self.digest[:12]}")

        for stage in stages:
            blocked = [dep for dep in STAGE_DEPENDENCIES[stage] if manifest.stages.get(dep) not in ("succeeded", "cached")]
            if blocked:
                manifest.stages[stage] = "skipped"
                logger.warning(f"阶段 {stage} 跳过: 依赖 {blocked} 未成功")
                continue

            if not force and self.is_cached(stage):
                try:
                    self.restore(stage)
                    paths = [self.path(p) for p in self.stage_outputs(stage)]
                    manifest.stages[stage] = "cached"
                    logger.info(f"阶段 {stage} 命中缓存")
                except (CimLabError, OSError, KeyError, ValueError) as e:
                    logger.warning(f"阶段 {stage} 缓存不可用，重新计算: {e}")
                    paths = None
                if paths is not None:
                    for path in paths:
                        manifest.add_file(self.out_dir, path, stage)
                    continue

            try:
                paths = getattr(self, stage)()
            except Exception as e:
                manifest.stages[stage] = "failed"
                manifest.errors[stage] = e.to_dict() if isinstance(e, CimLabError) else {
                    "type": e.__class__.__name__, "message": str(e)}
                error_logger.error(f"实验 {self.config.name} 阶段 {stage} 失败 "
                                   f"(配置摘要 {self.digest[:12]}): {manifest.errors[stage]}")
                continue

            manifest.stages[stage] = "succeeded"
            for path in paths:
                manifest.add_file(self.out_dir, Path(path), stage)

        manifest.timings = {stage: self.timings[stage] for stage in stages if stage in self.timings}
        manifest.save(self.out_dir)
        logger.info(f"实验完成: {manifest.stages}")
        return manifest


def run_pipeline(config_path: Union[str, Path], out: Optional[str] = None, seed: Optional[int] = None,
                 force: bool = False, jobs: int = 1, stages: Optional[Sequence[str]] = None) -> RunManifest:
    """加载配置并执行流水线

    Args:
        config_path: 实验配置JSON路径
        out: 覆盖输出目录
        seed: 覆盖主种子
        force: 忽略缓存
        jobs: MC试验与搜索重启的进程数
        stages: 覆盖要执行的阶段

    Returns:
        运行清单
    """
    config = load_experiment_config(config_path)
    if out is not None:
        config.output_dir = out
    if seed is not None:
        config.master_seed = seed
    if stages is not None:
        config.stages = list(stages)
    return ExperimentRunner(config, jobs=jobs).run(force=force)


def run_censor_sweep(config_path: Union[str, Path], grid: Sequence[float], out: Optional[str] = None,
                     seed: Optional[int] = None, jobs: int = 1) -> Path:
    """按配置执行删失阈值扫描，返回扫描表路径"""
    config = load_experiment_config(config_path)
    if out is not None:
        config.output_dir = out
    if seed is not None:
        config.master_seed = seed
    return ExperimentRunner(config, jobs=jobs).censor_sweep(grid)
