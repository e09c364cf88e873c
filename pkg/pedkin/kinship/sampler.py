"""
线性时间的蒙特卡洛亲缘估计
抽样分离指示 -> 三遍连通分量标签传播（含奠基者合并）-> 按身份状态累加估计量
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ..errors import ConfigError
from ..pedigree.model import Pedigree
from .identity_states import cross_edge_counts
from .matrix import DiagonalConvention, FounderKinship, KinshipMatrix

logger = logging.getLogger(__name__)

# 每个块内的重复次数固定，块 b 使用 default_rng([seed, b])，与线程数无关
REPLICATE_BLOCK = 4096


class MergeRule(str, Enum):
    """奠基者等位基因合并概率"""

    PAPER_LITERAL = "paper"  # 每个配对槽位以 Ψ_fg 合并，期望估计为 Ψ_fg/2
    UNBIASED_2PSI = "unbiased"  # 以 min(1, 2Ψ_fg) 合并，期望估计为 Ψ_fg

    def probability(self, psi_fg: float) -> float:
        if self is MergeRule.PAPER_LITERAL:
            return psi_fg
        return min(1.0, 2.0 * psi_fg)


@dataclass(frozen=True)
class SamplerConfig:
    """抽样配置"""

    samples: int
    seed: int
    merge_rule: MergeRule = MergeRule.UNBIASED_2PSI
    threads: int = 1

    def __post_init__(self) -> None:
        if self.samples < 1:
            raise ConfigError("抽样次数 S 必须 >= 1")
        if self.threads < 1:
            raise ConfigError("线程数必须 >= 1")
        object.__setattr__(self, "merge_rule", MergeRule(self.merge_rule))


@dataclass(frozen=True, eq=False)
class SegregationSample:
    """
    R 次重复的分离指示，形如 (R, n, 2)。

    origin[r, i, 0] 为母源等位基因来自母亲的哪一份（0 = 外祖母一侧，1 = 外祖父一侧），
    origin[r, i, 1] 同理对应父亲；奠基者行不使用。
    """

    origin: np.ndarray

    @property
    def replicates(self) -> int:
        return self.origin.shape[0]


@dataclass(frozen=True, eq=False)
class CCLabels:
    """每个等位基因的连通分量编号，形如 (R, n, 2)，0 保留为未分配"""

    labels: np.ndarray


@dataclass(frozen=True, eq=False)
class KinshipEstimate:
    """目标个体上的亲缘估计，对角线直接估计近交系数"""

    matrix: KinshipMatrix
    stderr: Optional[np.ndarray]
    samples: int
    seed: int


def sample_segregation(pedigree: Pedigree, rng: np.random.Generator, replicates: int = 1) -> SegregationSample:
    """为每个非奠基者独立抛两枚公平硬币"""
    origin = np.zeros((replicates, pedigree.n, 2), dtype=np.uint8)
    non_founders = np.asarray(pedigree.non_founders, dtype=np.int64)
    if non_founders.size:
        origin[:, non_founders, :] = rng.integers(0, 2, size=(replicates, non_founders.size, 2), dtype=np.uint8)
    return SegregationSample(origin=origin)


def psi_slots(pedigree: Pedigree, psi: FounderKinship) -> List[int]:
    """系谱中各奠基者（按稠密下标）在 Ψ 中的位置"""
    psi.require_founders(pedigree.founder_ids())
    position = {f: k for k, f in enumerate(psi.founders)}
    return [position[f] for f in pedigree.founder_ids()]


def draw_founder_merges(
    psi: FounderKinship,
    founder_slots: Sequence[int],
    rng: np.random.Generator,
    merge_rule: MergeRule,
    replicates: int,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    抽取每次重复的奠基者合并边。

    节点编号为 r·2F + 2a + x（第 r 次重复、第 a 个奠基者的第 x 份等位基因）。
    每对奠基者先抛一枚配对硬币，再对两个配对槽位各以合并概率抽取；
    每个奠基者自身的两份等位基因以 Ψ_ff 合并。
    """
    width = 2 * len(founder_slots)
    base = np.arange(replicates, dtype=np.int64) * width
    matrix = psi.matrix
    heads: List[np.ndarray] = []
    tails: List[np.ndarray] = []

    for a in range(len(founder_slots)):
        for b in range(a + 1, len(founder_slots)):
            p_merge = merge_rule.probability(float(matrix[founder_slots[a], founder_slots[b]]))
            if p_merge <= 0.0:
                continue
            # 0: (f1,g1)(f2,g2)；1: (f1,g2)(f2,g1)
            crossed = rng.integers(0, 2, size=replicates)
            for x in (0, 1):
                y = np.where(crossed == 0, x, 1 - x)
                hit = np.flatnonzero(rng.random(replicates) < p_merge)
                heads.append(base[hit] + 2 * a + x)
                tails.append(base[hit] + 2 * b + y[hit])

    for a in range(len(founder_slots)):
        p_self = float(matrix[founder_slots[a], founder_slots[a]])
        if p_self <= 0.0:
            continue
        hit = np.flatnonzero(rng.random(replicates) < p_self)
        heads.append(base[hit] + 2 * a)
        tails.append(base[hit] + 2 * a + 1)

    if not heads:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty
    return np.concatenate(heads), np.concatenate(tails)


def resolve_founder_merges(founder_labels: np.ndarray, heads: np.ndarray, tails: np.ndarray) -> np.ndarray:
    """把合并边连通的奠基者等位基因统一为分量内最大的标签，一次求连通分量"""
    if heads.size == 0:
        return founder_labels
    flat = founder_labels.reshape(-1)
    nodes = flat.size
    graph = coo_matrix((np.ones(heads.size, dtype=np.int8), (heads, tails)), shape=(nodes, nodes))
    _, component = connected_components(graph, directed=False)
    largest = np.zeros(int(component.max()) + 1, dtype=flat.dtype)
    np.maximum.at(largest, component, flat)
    return largest[component].reshape(founder_labels.shape)


def compute_cc_labels(
    pedigree: Pedigree,
    seg: SegregationSample,
    psi: FounderKinship,
    rng: np.random.Generator,
    merge_rule: MergeRule = MergeRule.UNBIASED_2PSI,
) -> CCLabels:
    """
    三遍传播得到每个等位基因的连通分量标签。

    1. 叶子个体的两个等位基因依次获得 (counter, counter+1)；
    2. 自下而上把标签复制到分离指示选中的亲本等位基因，冲突时保留较大者；
       仍为 0 的奠基者等位基因获得新的不同标签，然后按 Ψ 随机合并奠基者标签；
    3. 自上而下把亲本等位基因的标签复制给子女。
    """
    replicates = seg.replicates
    n = pedigree.n
    rows = np.arange(replicates)
    origin = seg.origin
    labels = np.zeros((replicates, n, 2), dtype=np.uint64)

    counter = 1
    for leaf in pedigree.leaves:
        labels[:, leaf, 0] = counter
        labels[:, leaf, 1] = counter + 1
        counter += 2

    order = pedigree.topo.order
    for i in order[::-1]:
        parents = pedigree.parents(int(i))
        if parents is None:
            continue
        for slot, parent in enumerate(parents):
            sel = origin[:, i, slot]
            current = labels[rows, parent, sel]
            labels[rows, parent, sel] = np.maximum(current, labels[:, i, slot])

    founders = np.asarray(pedigree.founders, dtype=np.int64)
    founder_labels = labels[:, founders, :]
    fresh = np.uint64(counter) + np.arange(founders.size * 2, dtype=np.uint64).reshape(founders.size, 2)
    founder_labels = np.where(founder_labels == 0, fresh[None, :, :], founder_labels)

    heads, tails = draw_founder_merges(psi, psi_slots(pedigree, psi), rng, merge_rule, replicates)
    founder_labels = resolve_founder_merges(founder_labels, heads, tails)
    labels[:, founders, :] = founder_labels

    for i in order[len(founders):]:
        for slot, parent in enumerate(pedigree.parents(int(i))):
            labels[:, i, slot] = labels[rows, parent, origin[:, i, slot]]
    return CCLabels(labels=labels)


def _run_block(
    pedigree: Pedigree,
    psi: FounderKinship,
    interest: np.ndarray,
    config: SamplerConfig,
    block: int,
    replicates: int,
) -> Tuple[np.ndarray, np.ndarray]:
    """单个块：返回 (Σ 计数, Σ 计数²)，非对角为 e(ab)，对角为 c_m == c_f 指示"""
    rng = np.random.default_rng([config.seed, block])
    seg = sample_segregation(pedigree, rng, replicates)
    cc = compute_cc_labels(pedigree, seg, psi, rng, config.merge_rule)
    chosen = cc.labels[:, interest, :]

    k = interest.size
    sums = np.zeros((k, k), dtype=np.int64)
    squares = np.zeros((k, k), dtype=np.int64)
    for a in range(k):
        e = cross_edge_counts(chosen[:, a, :], chosen).astype(np.int64)
        e[:, a] = chosen[:, a, 0] == chosen[:, a, 1]
        sums[a] = e.sum(axis=0)
        squares[a] = (e * e).sum(axis=0)
    return sums, squares


def standard_errors(sums: np.ndarray, squares: np.ndarray, samples: int) -> np.ndarray:
    """
    每个条目的样本标准差除以 √S。

    sums、squares 为每次重复贡献之和及平方和。
    """
    if samples < 2:
        raise ConfigError("计算标准误至少需要 S >= 2")
    sums = np.asarray(sums, dtype=np.float64)
    squares = np.asarray(squares, dtype=np.float64)
    variance = (squares - sums * sums / samples) / (samples - 1)
    return np.sqrt(np.clip(variance, 0.0, None) / samples)


def estimate_kinship(
    pedigree: Pedigree,
    psi: Optional[FounderKinship],
    interest: Sequence[str],
    config: SamplerConfig,
) -> KinshipEstimate:
    """
    对目标个体抽样估计亲缘矩阵。

    每次重复对不同个体 i≠j 累加 e(ab)/(4S)，对 i=j 在 c_m = c_f 时累加 1/S。
    重复按固定大小分块，块之间互相独立，可由线程池并行；
    整数计数按块序号求和，因此结果与线程数无关。
    """
    if psi is None:
        psi = FounderKinship.zero(pedigree.founder_ids())
    psi.require_founders(pedigree.founder_ids())
    ids = tuple(dict.fromkeys(interest))
    index = np.asarray(pedigree.indices(ids), dtype=np.int64)

    blocks = math.ceil(config.samples / REPLICATE_BLOCK)
    sizes = [min(REPLICATE_BLOCK, config.samples - b * REPLICATE_BLOCK) for b in range(blocks)]
    logger.info(f"开始抽样: S={config.samples}, {blocks} 个块, {config.threads} 个线程")

    def work(b: int) -> Tuple[np.ndarray, np.ndarray]:
        return _run_block(pedigree, psi, index, config, b, sizes[b])

    if config.threads > 1 and blocks > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as executor:
            results: List[Tuple[np.ndarray, np.ndarray]] = list(executor.map(work, range(blocks)))
    else:
        results = [work(b) for b in range(blocks)]

    k = index.size
    sums = np.zeros((k, k), dtype=np.int64)
    squares = np.zeros((k, k), dtype=np.int64)
    for block_sums, block_squares in results:
        sums += block_sums
        squares += block_squares

    # 非对角贡献为 e/4，对角为指示值
    scale = np.full((k, k), 0.25)
    np.fill_diagonal(scale, 1.0)
    values = sums * scale / config.samples
    stderr = None
    if config.samples >= 2:
        stderr = standard_errors(sums * scale, squares * scale * scale, config.samples)
    matrix = KinshipMatrix(ids, values, DiagonalConvention.INBREEDING)
    return KinshipEstimate(matrix=matrix, stderr=stderr, samples=config.samples, seed=config.seed)
