"""
合成系谱生成
"""

from .generators import WrightFisherParams, random_pedigree, wright_fisher_pedigree

__all__ = ["WrightFisherParams", "wright_fisher_pedigree", "random_pedigree"]
