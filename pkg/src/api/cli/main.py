"""
CimLab 命令行接口
每个子命令执行流水线中的对应阶段（自动补齐依赖），退出码 0 当且仅当所有请求的阶段成功
"""

import argparse
import logging
import os
import sys
from typing import List, Optional

# 添加项目根目录到Python路径
sys.path.append(os.path.dirname(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))))

from src.core.errors import CimLabError
from src.services.datasets import GENERATORS, gen_dataset, save_csv_dataset
from src.services.pipeline import RunManifest, run_censor_sweep, run_pipeline
from src.utils.logging_manager import log_manager

# 子命令 -> 流水线阶段
COMMAND_STAGES = {
    "train": ["train"],
    "eval-mc": ["mc"],
    "attack": ["worst_case"],
    "swim": ["swim"],
    "trice": ["trice"],
    "bench": ["benchmark"],
    "run": None,
}


def report_manifest(manifest: RunManifest) -> int:
    """打印阶段状态并给出退出码"""
    for stage, status in manifest.stages.items():
        mark = "✅" if status in ("succeeded", "cached") else "❌"
        print(f"{mark} {stage}: {status}")
        if stage in manifest.errors:
            print(f"   {manifest.errors[stage]['message']}")
    print(f"配置摘要: {manifest.config_digest}")
    return 0 if manifest.succeeded else 1


def pipeline_command(args) -> int:
    """处理流水线子命令"""
    if not args.config:
        print("❌ 请通过 --config 指定实验配置文件")
        return 1
    try:
        manifest = run_pipeline(args.config, out=args.out, seed=args.seed, force=args.force,
                                jobs=args.jobs, stages=COMMAND_STAGES[args.command])
    except CimLabError as e:
        print(f"❌ {e.message}")
        return 1

    code = report_manifest(manifest)

    if args.command == "trice" and args.censor_grid and code == 0:
        try:
            path = run_censor_sweep(args.config, args.censor_grid, out=args.out, seed=args.seed, jobs=args.jobs)
            print(f"✅ 删失阈值扫描完成: {path}")
        except CimLabError as e:
            print(f"❌ 删失阈值扫描失败: {e.message}")
            return 1
    return code


def gen_data_command(args) -> int:
    """处理数据集生成命令"""
    try:
        dataset = gen_dataset(args.kind, args.n, args.noise, args.data_seed)
    except (CimLabError, ValueError) as e:
        print(f"❌ 生成失败: {e}")
        return 1
    path = save_csv_dataset(dataset, args.output, header=args.header)
    print(f"✅ 数据集已保存到: {path} (n={dataset.n}, d={dataset.dim})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    """构造参数解析器"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('-c', '--config', help='实验配置JSON文件')
    common.add_argument('-o', '--out', help='输出目录（覆盖配置）')
    common.add_argument('--seed', type=int, help='主种子（覆盖配置）')
    common.add_argument('--force', action='store_true', help='忽略缓存重新计算')
    common.add_argument('-j', '--jobs', type=int, default=1, help='MC试验与搜索重启的进程数')
    common.add_argument('-v', '--verbose', action='store_true', help='输出DEBUG级别日志')

    parser = argparse.ArgumentParser(description="CimLab - 存内计算权重变化可靠性实验室")
    subparsers = parser.add_subparsers(dest='command', help='可用命令')

    subparsers.add_parser('train', parents=[common], help='训练基线网络')
    subparsers.add_parser('eval-mc', parents=[common], help='蒙特卡洛精度分布与KPP')
    subparsers.add_parser('attack', parents=[common], help='最坏情况扰动搜索与MC差距报告')
    subparsers.add_parser('swim', parents=[common], help='选择性写验证预算曲线')
    trice_parser = subparsers.add_parser('trice', parents=[common], help='右删失高斯噪声训练')
    trice_parser.add_argument('--censor-grid', type=float, nargs='+', help='删失阈值扫描网格，如 0.5 1 2')
    subparsers.add_parser('bench', parents=[common], help='vanilla / gaussian / trice 配对KPP基准')
    subparsers.add_parser('run', parents=[common], help='执行配置中的全部阶段')

    gen_parser = subparsers.add_parser('gen-data', help='生成合成数据集CSV')
    gen_parser.add_argument('--kind', choices=sorted(GENERATORS), default='blobs', help='生成器名称')
    gen_parser.add_argument('--n', type=int, default=400, help='样本数')
    gen_parser.add_argument('--noise', type=float, default=0.5, help='高斯噪声标准差')
    gen_parser.add_argument('--data-seed', type=int, default=7, help='生成随机种子')
    gen_parser.add_argument('--header', action='store_true', help='写出表头')
    gen_parser.add_argument('-o', '--output', required=True, help='输出CSV路径')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """主函数，处理命令行参数"""
    parser = build_parser()
    args = parser.parse_args(argv)

    if getattr(args, 'verbose', False):
        log_manager.set_level(logging.DEBUG)
    if args.command in COMMAND_STAGES:
        return pipeline_command(args)
    if args.command == 'gen-data':
        return gen_data_command(args)
    parser.print_help()
    return 1


if __name__ == "__main__":
    sys.exit(main())
