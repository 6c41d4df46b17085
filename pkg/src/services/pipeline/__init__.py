"""
实验流水线服务
阶段编排、产物缓存与运行清单
"""

from .manifest import MANIFEST_NAME, RunManifest, tool_versions, validate_manifest
from .main import ExperimentRunner, run_censor_sweep, run_pipeline

__all__ = ["MANIFEST_NAME", "RunManifest", "tool_versions", "validate_manifest", "ExperimentRunner", "run_censor_sweep", "run_pipeline"]
