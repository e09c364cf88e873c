"""
祖先集合
每个个体一行按位压缩的集合 A_i = {i} ∪ A_母 ∪ A_父，支持常数时间的祖先查询
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..pedigree.model import Pedigree

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class AncestorSets:
    """
    n 行 n 位的位集合，第 i 行第 v 位为 1 当且仅当 v ∈ A_i。

    位按小端存储：个体 v 位于第 v >> 3 个字节的第 v & 7 位。
    """

    pedigree: Pedigree
    bits: np.ndarray

    def contains(self, i: int, v: int) -> bool:
        """v ∈ A_i（包含 i 自身）"""
        return bool((self.bits[i, v >> 3] >> (v & 7)) & 1)

    def is_ancestor_index(self, a: int, b: int) -> bool:
        """a 是 b 的严格祖先"""
        return a != b and self.contains(b, a)

    def ancestor_mask(self, i: int) -> np.ndarray:
        """A_i 的布尔向量"""
        return np.unpackbits(self.bits[i], bitorder="little")[: self.pedigree.n].astype(bool)

    def descendant_mask(self, a: int) -> np.ndarray:
        """所有 A_j 中含 a 的 j（含 a 自身）"""
        return ((self.bits[:, a >> 3] >> (a & 7)) & 1).astype(bool)

    def members(self, individual_id: str) -> Tuple[str, ...]:
        """A_id 中的个体 ID（含自身），按稠密下标排序"""
        mask = self.ancestor_mask(self.pedigree.index(individual_id))
        return tuple(self.pedigree.ids[v] for v in np.flatnonzero(mask))

    def size(self, i: int) -> int:
        return int(np.unpackbits(self.bits[i], bitorder="little").sum())


def compute_ancestor_sets(pedigree: Pedigree) -> AncestorSets:
    """
    按拓扑顺序自上而下计算祖先集合。

    奠基者 A_f = {f}；其余个体取父母两行的按位或再置上自身位，
    总计 O(n²) 次位运算（按字节并行）。
    """
    n = pedigree.n
    bits = np.zeros((n, (n + 7) // 8), dtype=np.uint8)
    for i in pedigree.topo:
        parents = pedigree.parents(i)
        if parents is not None:
            m, p = parents
            np.bitwise_or(bits[m], bits[p], out=bits[i])
        bits[i, i >> 3] |= np.uint8(1 << (i & 7))
    bits.setflags(write=False)
    logger.debug(f"祖先集合已计算: {n} 行, 每行 {bits.shape[1]} 字节")
    return AncestorSets(pedigree=pedigree, bits=bits)


def is_ancestor(sets: AncestorSets, a: str, b: str) -> bool:
    """a 是否为 b 的严格祖先（a ∈ A_b 且 a ≠ b）"""
    return sets.is_ancestor_index(sets.pedigree.index(a), sets.pedigree.index(b))
