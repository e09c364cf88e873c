"""
穷举预言机
对小系谱枚举全部 4^k 条遗传路径，独立于精确算法和抽样器给出真值
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from ..errors import MatrixMismatchError, OracleBudgetError
from ..pedigree.model import Pedigree
from .matrix import TOLERANCE, DiagonalConvention, KinshipMatrix

logger = logging.getLogger(__name__)

MAX_NON_FOUNDERS = 12
CHUNK = 1 << 14


@dataclass(frozen=True, eq=False)
class OracleResult:
    """穷举结果：精确亲缘矩阵（近交对角线）与枚举的路径数"""

    matrix: KinshipMatrix
    enumerations: int


@dataclass
class ComparisonReport:
    """两个矩阵的比较结果"""

    max_abs_diff: float
    tolerance: float
    offending: List[Tuple[str, str, float, float]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.offending


def _count_chunk(
    pedigree: Pedigree, order: np.ndarray, start: int, stop: int
) -> np.ndarray:
    n = pedigree.n
    codes = np.arange(start, stop, dtype=np.uint64)
    alleles = np.zeros((codes.size, n, 2), dtype=np.int64)
    for k, f in enumerate(pedigree.founders):
        alleles[:, f, 0] = 2 * k
        alleles[:, f, 1] = 2 * k + 1
    # 第 t 个非奠基者占用第 2t、2t+1 位：母源、父源各取亲本的哪一份
    for t, i in enumerate(order):
        mother, father = pedigree.parents(int(i))
        from_mother = ((codes >> np.uint64(2 * t)) & np.uint64(1)).astype(np.int64)
        from_father = ((codes >> np.uint64(2 * t + 1)) & np.uint64(1)).astype(np.int64)
        alleles[:, i, 0] = np.take_along_axis(alleles[:, mother, :], from_mother[:, None], axis=1)[:, 0]
        alleles[:, i, 1] = np.take_along_axis(alleles[:, father, :], from_father[:, None], axis=1)[:, 0]

    same = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            shared = 0
            for x in (0, 1):
                for y in (0, 1):
                    shared = shared + np.count_nonzero(alleles[:, i, x] == alleles[:, j, y])
            same[i, j] = same[j, i] = shared
        same[i, i] = np.count_nonzero(alleles[:, i, 0] == alleles[:, i, 1])
    return same


def brute_force_kinship(
    pedigree: Pedigree, max_non_founders: int = MAX_NON_FOUNDERS, threads: int = 1
) -> OracleResult:
    """
    枚举所有分离向量计算精确亲缘（Ψ = 0）。

    每个奠基者等位基因获得唯一标签，按拓扑顺序向下传递；
    对每条路径累加跨个体同标签对数 e(ab)/4 与个体内 c_m = c_f 指示，最后除以 4^k。
    """
    order = np.asarray([i for i in pedigree.topo if not pedigree.is_founder(i)], dtype=np.int64)
    k = order.size
    if k > max_non_founders:
        raise OracleBudgetError(f"非奠基者 {k} 个，超出穷举上限 {max_non_founders}")
    total = 1 << (2 * k)
    bounds = [(s, min(s + CHUNK, total)) for s in range(0, total, CHUNK)]
    logger.info(f"穷举 {total} 条遗传路径 ({len(bounds)} 个分块)")

    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            parts = list(executor.map(lambda b: _count_chunk(pedigree, order, *b), bounds))
    else:
        parts = [_count_chunk(pedigree, order, *b) for b in bounds]

    counts = sum(parts)
    values = counts / (4.0 * total)
    np.fill_diagonal(values, np.diag(counts) / float(total))
    matrix = KinshipMatrix(pedigree.ids, values, DiagonalConvention.INBREEDING)
    return OracleResult(matrix=matrix, enumerations=total)


def compare_matrices(a: KinshipMatrix, b: KinshipMatrix, tol: float = TOLERANCE) -> ComparisonReport:
    """按 ID 对齐比较两个矩阵，列出差值超过 tol 的条目"""
    if set(a.ids) != set(b.ids):
        raise MatrixMismatchError("两个矩阵的个体集合不同")
    if a.convention is not b.convention:
        raise MatrixMismatchError(f"对角线约定不同: {a.convention.value} vs {b.convention.value}")
    aligned = b.submatrix(a.ids).values
    diff = np.abs(a.values - aligned)
    report = ComparisonReport(max_abs_diff=float(diff.max()) if diff.size else 0.0, tolerance=tol)
    for i, j in zip(*np.nonzero(np.triu(diff > tol))):
        report.offending.append((a.ids[i], a.ids[j], float(a.values[i, j]), float(aligned[i, j])))
    return report
