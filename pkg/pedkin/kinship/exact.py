"""
O(n²) 精确亲缘算法
按拓扑顺序逐行递推，奠基者由 Ψ 初始化，输出以近交系数为对角线
"""

import logging
import math
from typing import Optional

import numpy as np

from ..pedigree.model import Pedigree
from .ancestors import compute_ancestor_sets
from .matrix import (
    TOLERANCE,
    DiagonalConvention,
    FounderKinship,
    KinshipMatrix,
    convert_diagonal,
)

logger = logging.getLogger(__name__)

__all__ = ["exact_kinship", "convert_diagonal", "outbred_kinship_from_ibd_fractions"]


def _founder_positions(pedigree: Pedigree, psi: FounderKinship) -> np.ndarray:
    psi.require_founders(pedigree.founder_ids())
    return pedigree.topo.position[pedigree.indices(psi.founders)]


def exact_kinship(
    pedigree: Pedigree,
    psi: Optional[FounderKinship] = None,
    *,
    check_ancestry: bool = False,
) -> KinshipMatrix:
    """
    计算整个系谱的精确亲缘矩阵。

    所有奠基者位于拓扑顺序的前缀，先由 Ψ 填入 φ_ff = (1+Ψ_ff)/2 与 φ_fg = Ψ_fg；
    随后每个非奠基者 i 与此前处理过的所有 j 满足
    φ_ij = (φ_母,j + φ_父,j)/2，φ_ii = (1 + φ_母父)/2。
    因为 j 都先于 i 处理，"i 不是 j 的祖先" 自动成立；check_ancestry=True 时用祖先集合逐行断言。

    Args:
        pedigree: 系谱
        psi: 奠基者亲缘矩阵，None 表示奠基者互不相关且非近交
        check_ancestry: 调试模式下校验递推条件

    Returns:
        KinshipMatrix: 对角线为近交系数 Φ_ii = 2φ_ii − 1
    """
    if psi is None:
        psi = FounderKinship.zero(pedigree.founder_ids())
    founder_pos = _founder_positions(pedigree, psi)

    n = pedigree.n
    order = pedigree.topo.order
    position = pedigree.topo.position
    sets = compute_ancestor_sets(pedigree) if check_ancestry else None

    # 在拓扑位置空间中计算，行 t 对应个体 order[t]
    phi = np.zeros((n, n), dtype=np.float64)
    phi[np.ix_(founder_pos, founder_pos)] = psi.self_kinship_seed()

    for t in range(len(pedigree.founders), n):
        i = int(order[t])
        a = position[pedigree.mother[i]]
        b = position[pedigree.father[i]]
        if sets is not None:
            earlier = order[:t]
            assert not sets.descendant_mask(i)[earlier].any(), f"{pedigree.ids[i]} 是先处理个体的祖先"
        row = (phi[a, :t] + phi[b, :t]) / 2.0
        phi[t, :t] = row
        phi[:t, t] = row
        phi[t, t] = (1.0 + phi[a, b]) / 2.0

    values = phi[np.ix_(position, position)]
    logger.info(f"精确亲缘计算完成: n={n}")
    self_kinship = KinshipMatrix(pedigree.ids, values, DiagonalConvention.SELF_KINSHIP)
    return convert_diagonal(self_kinship, DiagonalConvention.INBREEDING)


def outbred_kinship_from_ibd_fractions(f0: float, f1: float, f2: float) -> float:
    """
    非近交情形下由共享 0/1/2 个 IBD 等位基因的概率求亲缘系数：(2f₂ + f₁)/4。

    f₂ 状态含 2 条跨个体边、f₁ 状态含 1 条，每条边贡献 1/4。
    """
    fractions = (f0, f1, f2)
    if any(not 0.0 <= f <= 1.0 for f in fractions) or abs(math.fsum(fractions) - 1.0) > TOLERANCE:
        raise ValueError(f"({f0}, {f1}, {f2}) 不是概率向量")
    return (2.0 * f2 + f1) / 4.0
