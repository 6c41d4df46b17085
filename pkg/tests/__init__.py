"""
测试模块初始化文件
提供便捷的测试运行接口
"""

import sys
from pathlib import Path

import pytest

# 添加项目根目录到路径
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))


def _run(paths, include_slow: bool = False) -> bool:
    args = [str(project_root / p) for p in paths]
    if not include_slow:
        args += ["-m", "not slow"]
    return pytest.main(args) == 0


def run_unit_tests() -> bool:
    """仅运行单元测试"""
    return _run(["tests/unit"])


def run_integration_tests(include_slow: bool = False) -> bool:
    """运行集成测试，include_slow=True 时包含统计验收测试"""
    return _run(["tests/integration"], include_slow)


def run_all_tests(include_slow: bool = False) -> bool:
    """运行所有测试"""
    print("=" * 50)
    print("开始运行所有测试...")
    print("=" * 50)

    unit_success = run_unit_tests()
    integration_success = run_integration_tests(include_slow)

    # 汇总结果
    print("\n" + "=" * 50)
    print("测试结果汇总:")
    print(f"单元测试: {'通过' if unit_success else '失败'}")
    print(f"集成测试: {'通过' if integration_success else '失败'}")

    if unit_success and integration_success:
        print("\n✅ 所有测试通过!")
        return True
    print("\n❌ 部分测试失败!")
    return False


if __name__ == "__main__":
    success = run_all_tests(include_slow="--slow" in sys.argv)
    sys.exit(0 if success else 1)
