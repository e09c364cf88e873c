"""
系谱包
个体记录、经过验证的系谱图以及 PED 文件读写
"""

from .model import IndividualRecord, Pedigree, Sex, TopologicalOrder, topological_order
from .io import ParseOptions, parse_pedigree, write_pedigree

__all__ = [
    "IndividualRecord",
    "Pedigree",
    "Sex",
    "TopologicalOrder",
    "topological_order",
    "ParseOptions",
    "parse_pedigree",
    "write_pedigree",
]
