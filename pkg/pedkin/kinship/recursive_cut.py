"""
递归切割精确算法
按世代边界把系谱切成若干片段，自上而下逐段运行精确算法，
上一段中切割亲本的亲缘系数作为下一段的奠基者 Ψ
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import CutPlanError, InterestPlacementError
from ..pedigree.model import Pedigree
from .exact import exact_kinship
from .matrix import FounderKinship, KinshipMatrix

logger = logging.getLogger(__name__)


class SegmentRole(str, Enum):
    INTERIOR = "interior"
    CUT_FOUNDER = "cut-founder"
    CUT_LEAF = "cut-leaf"


@dataclass(frozen=True)
class CutPlan:
    """
    世代切割方案。

    boundaries[k] = c 表示在世代 c-1 与 c 之间切割；cut_parents[k] 为该切割的亲本集合 P
    （世代 < c 且有世代 >= c 的子女的个体），cut_edges[k] 为跨越切割的亲本→子女边。
    """

    boundaries: Tuple[int, ...]
    cut_parents: Tuple[FrozenSet[str], ...]
    cut_edges: Tuple[FrozenSet[Tuple[str, str]], ...]
    segment_sizes: Tuple[int, ...]
    max_generation: int

    @property
    def m(self) -> int:
        """片段数"""
        return len(self.segment_sizes)

    @property
    def s(self) -> int:
        """最大片段的个体数"""
        return max(self.segment_sizes)

    def describe(self) -> List[str]:
        lines = [f"segments={self.m} max_segment={self.s} max_generation={self.max_generation}"]
        edges = [0] + list(self.boundaries) + [self.max_generation + 1]
        for k, size in enumerate(self.segment_sizes):
            carried = len(self.cut_parents[k - 1]) if k > 0 else 0
            lines.append(
                f"segment {k}: generations {edges[k]}..{edges[k + 1] - 1}, "
                f"size {size}, cut founders {carried}"
            )
        return lines


@dataclass(frozen=True, eq=False)
class Segment:
    """一个片段：本身是合法系谱，成员标注为内部 / 切割奠基者 / 切割叶子"""

    pedigree: Pedigree
    cut_founders: FrozenSet[str]
    cut_leaves: FrozenSet[str]
    generations: Tuple[int, int]

    def role(self, individual_id: str) -> SegmentRole:
        self.pedigree.index(individual_id)
        if individual_id in self.cut_founders:
            return SegmentRole.CUT_FOUNDER
        if individual_id in self.cut_leaves:
            return SegmentRole.CUT_LEAF
        return SegmentRole.INTERIOR


def assign_generations(pedigree: Pedigree) -> np.ndarray:
    """奠基者为 0，其余个体为 1 + 父母世代的最大值（最长路径深度）"""
    gen = np.zeros(pedigree.n, dtype=np.int64)
    for i in pedigree.topo:
        parents = pedigree.parents(i)
        if parents is not None:
            gen[i] = 1 + max(gen[parents[0]], gen[parents[1]])
    return gen


def _latest_child_generation(pedigree: Pedigree, gen: np.ndarray) -> np.ndarray:
    latest = np.full(pedigree.n, -1, dtype=np.int64)
    for v, kids in enumerate(pedigree.children):
        if kids:
            latest[v] = gen[list(kids)].max()
    return latest


@dataclass(frozen=True, eq=False)
class _Layout:
    """
    按世代排好的个体下标，一次计算后供规划和切割共用。

    by_generation[starts[g]:starts[g + 1]] 为第 g 代个体；
    carried_count[c] 为切割 c 的亲本数 |P_c|（世代 < c 且有世代 >= c 的子女）。
    """

    gen: np.ndarray
    latest: np.ndarray
    by_generation: np.ndarray
    starts: np.ndarray
    carried_count: np.ndarray

    @property
    def top(self) -> int:
        return self.starts.size - 2

    def inside(self, lo: int, hi: int) -> np.ndarray:
        return self.by_generation[self.starts[lo]:self.starts[hi]]

    def size(self, lo: int, hi: int) -> int:
        return int(self.carried_count[lo] + self.starts[hi] - self.starts[lo])


def _layout(pedigree: Pedigree) -> _Layout:
    gen = assign_generations(pedigree)
    latest = _latest_child_generation(pedigree, gen)
    top = int(gen.max()) if pedigree.n else 0
    by_generation = np.argsort(gen, kind="stable")
    starts = np.searchsorted(gen[by_generation], np.arange(top + 2))
    spans = latest > gen
    diff = np.zeros(top + 3, dtype=np.int64)
    np.add.at(diff, gen[spans] + 1, 1)
    np.add.at(diff, latest[spans] + 1, -1)
    return _Layout(gen, latest, by_generation, starts, np.cumsum(diff)[: top + 2])


def _carried_sets(layout: _Layout, boundaries: Sequence[int]) -> List[np.ndarray]:
    """每个切割的亲本下标：个体 v 属于满足 gen(v) < c <= 最晚子女世代 的全部切割 c"""
    b = np.asarray(boundaries, dtype=np.int64)
    if b.size == 0:
        return []
    spans = np.flatnonzero(layout.latest > layout.gen)
    first = np.searchsorted(b, layout.gen[spans], side="right")
    counts = np.searchsorted(b, layout.latest[spans], side="right") - first
    owners = np.repeat(spans, counts)
    offsets = np.arange(int(counts.sum())) - np.repeat(np.cumsum(counts) - counts, counts)
    slots = np.repeat(first, counts) + offsets
    order = np.argsort(slots, kind="stable")
    owners, slots = owners[order], slots[order]
    bounds = np.searchsorted(slots, np.arange(b.size + 1))
    return [owners[bounds[k]:bounds[k + 1]] for k in range(b.size)]


def _build_plan(pedigree: Pedigree, layout: _Layout, boundaries: Sequence[int]) -> CutPlan:
    edges = [0] + list(boundaries) + [layout.top + 1]
    sizes = tuple(layout.size(lo, hi) for lo, hi in zip(edges[:-1], edges[1:]))

    ids = pedigree.ids
    parents, cut_edges = [], []
    for c, p in zip(boundaries, _carried_sets(layout, boundaries)):
        parents.append(frozenset(ids[v] for v in p))
        crossing = set()
        for v in p:
            for child in pedigree.children[v]:
                if layout.gen[child] >= c:
                    crossing.add((ids[v], ids[child]))
        cut_edges.append(frozenset(crossing))
    return CutPlan(
        boundaries=tuple(int(b) for b in boundaries),
        cut_parents=tuple(parents),
        cut_edges=tuple(cut_edges),
        segment_sizes=sizes,
        max_generation=layout.top,
    )


def _final_segment_ids(pedigree: Pedigree, layout: _Layout, last_boundary: int) -> FrozenSet[str]:
    carried = _carried_sets(layout, [last_boundary])[0]
    members = np.concatenate([carried, layout.inside(last_boundary, layout.top + 1)])
    return frozenset(pedigree.ids[v] for v in members)


def plan_cuts(pedigree: Pedigree, interest: Iterable[str], max_segment_size: int) -> CutPlan:
    """
    自最老的一侧贪心地放置世代切割。

    当加入下一个世代会使当前片段超过 max_segment_size 时就在该世代之前切割；
    切割位置不超过目标个体的最小世代，以保证最年轻的片段包含全部目标个体。
    单个世代本身超过上限时使用最细的世代切割并如实报告达到的 s。

    Raises:
        InterestPlacementError: 目标个体含第 0 代且系谱超过上限，无法切割（应退回整体精确算法）
    """
    interest = list(dict.fromkeys(interest))
    if not interest:
        raise CutPlanError("目标个体集合不能为空")
    if max_segment_size < 1:
        raise CutPlanError("片段上限必须 >= 1")
    layout = _layout(pedigree)
    lowest = int(layout.gen[pedigree.indices(interest)].min())

    boundaries: List[int] = []
    start = 0
    for t in range(1, layout.top + 1):
        if t <= lowest and layout.size(start, t + 1) > max_segment_size:
            boundaries.append(t)
            start = t

    if not boundaries and pedigree.n > max_segment_size and lowest == 0:
        raise InterestPlacementError("目标个体包含第 0 代个体，世代切割无法缩小最年轻的片段")

    plan = _build_plan(pedigree, layout, boundaries)
    if plan.s > max_segment_size:
        logger.warning(f"片段上限 {max_segment_size} 无法满足，实际最大片段为 {plan.s}")
    logger.info(f"切割方案: {plan.m} 个片段, 最大片段 {plan.s}")
    return plan


def plan_from_boundaries(pedigree: Pedigree, interest: Iterable[str], boundaries: Sequence[int]) -> CutPlan:
    """验证并构建用户给出的世代切割方案"""
    layout = _layout(pedigree)
    top = layout.top
    boundaries = [int(b) for b in boundaries]
    if any(b < 1 or b > top for b in boundaries):
        raise CutPlanError(f"切割世代必须位于 1..{top}")
    if any(b2 <= b1 for b1, b2 in zip(boundaries, boundaries[1:])):
        raise CutPlanError("切割世代必须严格递增")
    interest = list(interest)
    pedigree.indices(interest)
    if boundaries:
        final = _final_segment_ids(pedigree, layout, boundaries[-1])
        outside = [i for i in interest if i not in final]
        if outside:
            raise InterestPlacementError(f"目标个体不在最年轻的片段中: {', '.join(outside)}")
    return _build_plan(pedigree, layout, boundaries)


def cut_pedigree(pedigree: Pedigree, plan: CutPlan) -> List[Segment]:
    """
    按方案把系谱切成片段。

    每个切割的亲本 P 同时出现在上下两段：在上段是叶子，在下段是奠基者；
    下段包含全部切割边。
    """
    layout = _layout(pedigree)
    top = layout.top
    if plan.max_generation != top:
        raise CutPlanError(f"方案的最大世代 {plan.max_generation} 与系谱的 {top} 不一致")
    ids = pedigree.ids
    edges = [0] + list(plan.boundaries) + [top + 1]
    carried_sets = [np.zeros(0, dtype=np.int64)] + _carried_sets(layout, plan.boundaries)

    segments = []
    for k, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        carried = carried_sets[k]
        founders = frozenset(ids[v] for v in carried)
        if k > 0 and founders != plan.cut_parents[k - 1]:
            raise CutPlanError(f"第 {k} 个切割的亲本集合与系谱不一致")
        leaves = plan.cut_parents[k] if k < len(plan.boundaries) else frozenset()
        sub = pedigree.subpedigree(np.concatenate([carried, layout.inside(lo, hi)]), carried)
        segments.append(Segment(sub, founders, frozenset(leaves), (lo, hi - 1)))
    return segments


def recursive_cut_kinship(
    pedigree: Pedigree,
    psi: Optional[FounderKinship],
    interest: Iterable[str],
    plan: CutPlan,
) -> KinshipMatrix:
    """
    自上而下逐段运行精确算法。

    每段结束后取下一段奠基者（切割亲本）的子矩阵，对角线为近交系数 Φ_pp，
    作为下一段的 Ψ；精确算法再以 φ_pp = (1 + Ψ_pp)/2 还原自身亲缘系数。

    Returns:
        KinshipMatrix: 最年轻片段上的亲缘矩阵（近交对角线）
    """
    if psi is None:
        psi = FounderKinship.zero(pedigree.founder_ids())
    interest = list(interest)
    pedigree.indices(interest)
    if plan.m == 1:
        return exact_kinship(pedigree, psi)

    segments = cut_pedigree(pedigree, plan)
    final = segments[-1].pedigree
    outside = [i for i in interest if i not in final]
    if outside:
        raise InterestPlacementError(f"目标个体不在最年轻的片段中: {', '.join(outside)}")

    current = psi.restricted_to(segments[0].pedigree.founder_ids())
    result = None
    for k, segment in enumerate(segments):
        result = exact_kinship(segment.pedigree, current)
        logger.info(f"片段 {k + 1}/{len(segments)} 完成: {segment.pedigree.n} 个个体")
        if k + 1 < len(segments):
            handoff = segments[k + 1].pedigree.founder_ids()
            current = FounderKinship.full(handoff, result.submatrix(handoff).values)
    assert result is not None
    return result
