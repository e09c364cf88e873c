"""
亲缘计算包
"""

from .ancestors import AncestorSets, compute_ancestor_sets, is_ancestor
from .exact import exact_kinship
from .matrix import DiagonalConvention, FounderKinship, KinshipMatrix, PsiMode
from .oracle import brute_force_kinship, compare_matrices
from .recursive_cut import CutPlan, Segment, assign_generations, plan_cuts, recursive_cut_kinship
from .sampler import MergeRule, SamplerConfig, estimate_kinship

__all__ = [
    "AncestorSets",
    "compute_ancestor_sets",
    "is_ancestor",
    "exact_kinship",
    "DiagonalConvention",
    "FounderKinship",
    "KinshipMatrix",
    "PsiMode",
    "brute_force_kinship",
    "compare_matrices",
    "CutPlan",
    "Segment",
    "assign_generations",
    "plan_cuts",
    "recursive_cut_kinship",
    "MergeRule",
    "SamplerConfig",
    "estimate_kinship",
]
