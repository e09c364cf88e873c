"""
用户界面包
提供命令行的诊断输出与表格展示
"""

from .display import ui

__all__ = ["ui"]
