"""
pedkin - 系谱亲缘系数工具
精确、递归切割与蒙特卡洛三种亲缘系数算法，附带系谱模拟与穷举检验
"""

__version__ = "0.1.0"
__description__ = "系谱亲缘系数与身份状态计算工具"

from .cli import main

__all__ = ["main"]
