"""
运行清单
记录配置摘要、产物文件及其sha256、工具版本与各阶段耗时
"""

import platform
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
import pandas as pd
import pydantic
import scipy

from src import __version__
from src.utils.file_handling.artifacts import read_embedded_digest, read_json, sha256_file, write_json

MANIFEST_NAME = "manifest.json"


def tool_versions() -> Dict[str, str]:
    """工具与依赖版本"""
    return {
        "cimlab": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
        "pydantic": pydantic.VERSION,
    }


@dataclass
class RunManifest:
    """运行清单，文件路径相对输出目录"""

    config_digest: str
    files: List[Dict[str, str]] = field(default_factory=list)
    stages: Dict[str, str] = field(default_factory=dict)
    errors: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    versions: Dict[str, str] = field(default_factory=tool_versions)
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def succeeded(self) -> bool:
        """所有请求的阶段都成功（含命中缓存）"""
        return all(status in ("succeeded", "cached") for status in self.stages.values())

    def add_file(self, out_dir: Path, path: Path, stage: str) -> None:
        self.files.append({
            "path": path.relative_to(out_dir).as_posix(),
            "sha256": sha256_file(path),
            "stage": stage,
        })

    def to_dict(self) -> Dict[str, Any]:
        return {
            "config_digest": self.config_digest,
            "files": self.files,
            "stages": self.stages,
            "errors": self.errors,
            "versions": self.versions,
            "timings": self.timings,
        }

    def save(self, out_dir: Union[str, Path]) -> Path:
        return write_json(Path(out_dir) / MANIFEST_NAME, self.to_dict())

    @classmethod
    def load(cls, path: Union[str, Path]) -> "RunManifest":
        data = read_json(path)
        return cls(
            config_digest=data["config_digest"],
            files=data.get("files", []),
            stages=data.get("stages", {}),
            errors=data.get("errors", {}),
            versions=data.get("versions", {}),
            timings=data.get("timings", {}),
        )


def validate_manifest(path: Union[str, Path]) -> List[str]:
    """单遍校验清单：文件存在、sha256 一致且嵌入了相同的配置摘要

    Args:
        path: 清单文件路径

    Returns:
        问题列表，为空表示通过
    """
    path = Path(path)
    manifest = RunManifest.load(path)
    problems = []
    for entry in manifest.files:
        artifact = path.parent / entry["path"]
        if not artifact.exists():
            problems.append(f"文件不存在: {entry['path']}")
            continue
        if sha256_file(artifact) != entry["sha256"]:
            problems.append(f"sha256不一致: {entry['path']}")
        if read_embedded_digest(artifact) != manifest.config_digest:
            problems.append(f"配置摘要不一致: {entry['path']}")
    return problems
