"""
身份状态
一对个体四个等位基因 (a1, a2, b1, b2) 上的 IBD 划分，边类型计数、15/9 状态分类
"""

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from itertools import combinations
from typing import Dict, List, Tuple

import numpy as np

ALLELES = ("a1", "a2", "b1", "b2")


class EdgeType(str, Enum):
    """边类型：个体内 aa、跨个体 ab、个体内 bb"""

    AA = "aa"
    AB = "ab"
    BB = "bb"


def _edge_type(x: int, y: int) -> EdgeType:
    if x < 2 and y < 2:
        return EdgeType.AA
    if x >= 2 and y >= 2:
        return EdgeType.BB
    return EdgeType.AB


@dataclass(frozen=True)
class AllelePartition:
    """
    四个等位基因的等价类划分，以限制增长串表示。

    blocks[k] 为第 k 个等位基因所属类别编号，类别按首次出现依次编号为 0,1,2,...
    """

    blocks: Tuple[int, int, int, int]

    @classmethod
    def from_labels(cls, *labels: int) -> "AllelePartition":
        renumber: Dict[int, int] = {}
        blocks = tuple(renumber.setdefault(int(x), len(renumber)) for x in labels)
        return cls(blocks)  # type: ignore[arg-type]

    @property
    def classes(self) -> Tuple[Tuple[str, ...], ...]:
        """各等价类包含的等位基因名"""
        groups: Dict[int, List[str]] = {}
        for allele, b in zip(ALLELES, self.blocks):
            groups.setdefault(b, []).append(allele)
        return tuple(tuple(g) for g in groups.values())

    def __str__(self) -> str:
        return "".join("{" + ",".join(c) + "}" for c in self.classes)


@dataclass(frozen=True)
class StateIndex:
    """详细状态编号 1..15 与凝聚状态编号 1..9"""

    detailed: int
    condensed: int


def partition_from_labels(ci_m: int, ci_f: int, cj_m: int, cj_f: int) -> AllelePartition:
    """由连通分量标签构造划分：标签相同的等位基因同属一类"""
    return AllelePartition.from_labels(ci_m, ci_f, cj_m, cj_f)


def edge_count(p: AllelePartition, t: EdgeType) -> int:
    """同一类中类型为 t 的无序等位基因对数"""
    t = EdgeType(t)
    return sum(
        1
        for x, y in combinations(range(4), 2)
        if p.blocks[x] == p.blocks[y] and _edge_type(x, y) is t
    )


def founder_allele_count(p: AllelePartition) -> int:
    """该状态所需的奠基者等位基因数，即等价类个数"""
    return len(set(p.blocks))


def is_outbred(p: AllelePartition) -> bool:
    return edge_count(p, EdgeType.AA) == 0 and edge_count(p, EdgeType.BB) == 0


def _condensed(p: AllelePartition) -> int:
    aa = edge_count(p, EdgeType.AA)
    bb = edge_count(p, EdgeType.BB)
    ab = edge_count(p, EdgeType.AB)
    if aa and bb:
        return 1 if ab == 4 else 2
    if aa:
        return 3 if ab == 2 else 4
    if bb:
        return 5 if ab == 2 else 6
    return {2: 7, 1: 8, 0: 9}[ab]


def _restricted_growth_strings(length: int) -> List[Tuple[int, ...]]:
    out: List[Tuple[int, ...]] = [(0,)]
    for _ in range(length - 1):
        out = [s + (k,) for s in out for k in range(max(s) + 2)]
    return out


@lru_cache(maxsize=None)
def all_partitions() -> Tuple[AllelePartition, ...]:
    """
    15 个详细身份状态的规范顺序。

    先按 Jacquard 凝聚状态 Δ1..Δ9 排序，同一凝聚状态内按排序后的类签名字典序。
    """
    parts = [AllelePartition(s) for s in _restricted_growth_strings(4)]  # type: ignore[arg-type]
    return tuple(sorted(parts, key=lambda p: (_condensed(p), sorted(p.classes))))


@lru_cache(maxsize=None)
def _detailed_index() -> Dict[AllelePartition, int]:
    return {p: k for k, p in enumerate(all_partitions(), start=1)}


def classify(p: AllelePartition) -> StateIndex:
    """详细状态编号与 Jacquard 凝聚状态编号（个体内交换等位基因不改变凝聚编号）"""
    return StateIndex(detailed=_detailed_index()[p], condensed=_condensed(p))


def kinship_contribution(p: AllelePartition, same_individual: bool) -> float:
    """
    单个状态对亲缘估计的贡献。

    同一个体时为 e(aa) ∈ {0, 1}（近交系数项）；不同个体时为 e(ab)/4。
    """
    if same_individual:
        return float(edge_count(p, EdgeType.AA))
    return edge_count(p, EdgeType.AB) / 4.0


def cross_edge_counts(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """
    批量计算 e(ab)：left 形如 (..., 2)，right 形如 (..., k, 2)，
    返回 (..., k) 的跨个体同标签对数。
    """
    eq = left[..., None, :, None] == right[..., :, None, :]
    return eq.sum(axis=(-2, -1))


def state_table() -> List[Dict[str, object]]:
    """15 行状态表：编号、划分、边计数、奠基者等位基因数、是否非近交"""
    rows = []
    for p in all_partitions():
        idx = classify(p)
        rows.append(
            {
                "detailed": idx.detailed,
                "condensed": idx.condensed,
                "partition": str(p),
                "aa": edge_count(p, EdgeType.AA),
                "ab": edge_count(p, EdgeType.AB),
                "bb": edge_count(p, EdgeType.BB),
                "founder_alleles": founder_allele_count(p),
                "outbred": is_outbred(p),
            }
        )
    return rows
