"""
基准测试包
在 Wright-Fisher 系谱上测量各算法的耗时并拟合标度指数
"""

from .harness import BenchmarkHarness, BenchRecord, BenchReport, ScalingFit
from .runners import BaseRunner, CutRunner, ExactRunner, SampleRunner, create_runner

__all__ = [
    "BaseRunner",
    "ExactRunner",
    "CutRunner",
    "SampleRunner",
    "create_runner",
    "BenchmarkHarness",
    "BenchRecord",
    "BenchReport",
    "ScalingFit",
]
