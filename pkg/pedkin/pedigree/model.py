"""
系谱数据模型
个体记录、经过验证的系谱有向无环图以及拓扑排序
"""

import heapq
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import (
    DuplicateIndividualError,
    HalfFounderError,
    PedigreeCycleError,
    SexInconsistencyError,
    UnknownIndividualError,
)

logger = logging.getLogger(__name__)

NO_PARENT = -1


class Sex(str, Enum):
    """个体性别"""

    FEMALE = "female"
    MALE = "male"
    UNKNOWN = "unknown"

    @property
    def code(self) -> str:
        return {"female": "F", "male": "M", "unknown": "U"}[self.value]


@dataclass(frozen=True)
class IndividualRecord:
    """PED 文件中的一条个体记录（父母以外部 ID 表示）"""

    id: str
    sex: Sex = Sex.UNKNOWN
    mother: Optional[str] = None
    father: Optional[str] = None
    # 解析时合成的虚拟奠基者；不参与相等比较，写出后再读入即为普通奠基者
    synthesized: bool = field(default=False, compare=False)

    @property
    def is_founder(self) -> bool:
        return self.mother is None and self.father is None


@dataclass(frozen=True, eq=False)
class TopologicalOrder:
    """
    个体的拓扑排列：每个个体都排在父母之后。

    order[t] 是第 t 个被处理的稠密下标，position 是其逆排列。
    """

    order: np.ndarray
    position: np.ndarray

    def __len__(self) -> int:
        return len(self.order)

    def __iter__(self) -> Iterator[int]:
        return iter(int(i) for i in self.order)

    def is_valid_for(self, mother: np.ndarray, father: np.ndarray) -> bool:
        """在 O(n) 内检查排列是否满足父母先于子女"""
        n = len(mother)
        if len(self.order) != n or set(self.order.tolist()) != set(range(n)):
            return False
        for i in range(n):
            for p in (mother[i], father[i]):
                if p != NO_PARENT and self.position[p] >= self.position[i]:
                    return False
        return True


def _children_lists(mother: np.ndarray, father: np.ndarray) -> List[List[int]]:
    children: List[List[int]] = [[] for _ in range(len(mother))]
    for i in range(len(mother)):
        for p in (mother[i], father[i]):
            if p != NO_PARENT:
                children[p].append(i)
    return children


def _sweep(mother: np.ndarray, father: np.ndarray) -> Tuple[List[int], List[int]]:
    """
    Kahn 拓扑扫描：所有奠基者按下标在前，其余个体每次释放下标最小的就绪者。

    Returns:
        (order, remaining)：remaining 非空说明存在环。
    """
    n = len(mother)
    children = _children_lists(mother, father)
    pending = (mother != NO_PARENT).astype(np.int64) + (father != NO_PARENT)
    order = [i for i in range(n) if pending[i] == 0]
    ready: List[int] = []

    def release(v: int) -> None:
        for c in children[v]:
            pending[c] -= 1
            if pending[c] == 0:
                heapq.heappush(ready, c)

    for f in order:
        release(f)
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        release(v)

    placed = set(order)
    remaining = [i for i in range(n) if i not in placed]
    return order, remaining


def _find_cycle(mother: np.ndarray, father: np.ndarray, remaining: Sequence[int]) -> List[int]:
    # 剩余个体都至少有一个亲本也在剩余集合中，沿亲本回溯必然闭合成环
    left = set(remaining)
    v = min(remaining)
    seen: Dict[int, int] = {}
    path: List[int] = []
    while v not in seen:
        seen[v] = len(path)
        path.append(v)
        v = next(int(p) for p in (mother[v], father[v]) if p in left)
    return path[seen[v]:] + [v]


class Pedigree:
    """
    经过验证的系谱：以亲本指向子女的有向无环图。

    构造后不可变，可在多个线程间只读共享。个体的外部 ID 为任意字符串，
    内部使用按输入顺序分配的稠密下标 0..n-1。
    """

    def __init__(self, records: Sequence[IndividualRecord]):
        index: Dict[str, int] = {}
        for i, rec in enumerate(records):
            if rec.id in index:
                raise DuplicateIndividualError(rec.id)
            index[rec.id] = i

        n = len(records)
        mother = np.full(n, NO_PARENT, dtype=np.int64)
        father = np.full(n, NO_PARENT, dtype=np.int64)
        for i, rec in enumerate(records):
            if (rec.mother is None) != (rec.father is None):
                raise HalfFounderError(f"个体 {rec.id} 只有一个已知亲本")
            if rec.mother is None:
                continue
            for parent_id in (rec.mother, rec.father):
                if parent_id not in index:
                    raise UnknownIndividualError(parent_id)
            mother[i] = index[rec.mother]
            father[i] = index[rec.father]

        order, remaining = _sweep(mother, father)
        if remaining:
            cycle = _find_cycle(mother, father, remaining)
            raise PedigreeCycleError([records[i].id for i in cycle])

        self._index = index
        self.records: Tuple[IndividualRecord, ...] = tuple(
            self._normalize_sex(records, mother, father)
        )
        self.ids: Tuple[str, ...] = tuple(rec.id for rec in self.records)
        mother.setflags(write=False)
        father.setflags(write=False)
        self.mother = mother
        self.father = father
        self.children: Tuple[Tuple[int, ...], ...] = tuple(
            tuple(sorted(set(c))) for c in _children_lists(mother, father)
        )
        self.founders: Tuple[int, ...] = tuple(i for i in range(n) if mother[i] == NO_PARENT)
        self.non_founders: Tuple[int, ...] = tuple(i for i in range(n) if mother[i] != NO_PARENT)
        self.leaves: Tuple[int, ...] = tuple(i for i in range(n) if not self.children[i])

        order_arr = np.asarray(order, dtype=np.int64)
        position = np.empty(n, dtype=np.int64)
        position[order_arr] = np.arange(n, dtype=np.int64)
        order_arr.setflags(write=False)
        position.setflags(write=False)
        self.topo = TopologicalOrder(order=order_arr, position=position)
        logger.debug(f"系谱已构建: {n} 个个体, {len(self.founders)} 个奠基者")

    @staticmethod
    def _normalize_sex(
        records: Sequence[IndividualRecord], mother: np.ndarray, father: np.ndarray
    ) -> List[IndividualRecord]:
        """检查性别一致性；未知性别的亲本按角色确定性别"""
        as_mother = set(int(m) for m in mother if m != NO_PARENT)
        as_father = set(int(f) for f in father if f != NO_PARENT)
        normalized = []
        for i, rec in enumerate(records):
            if i in as_mother and i in as_father:
                raise SexInconsistencyError(f"个体 {rec.id} 同时作为母亲和父亲出现")
            if i in as_mother:
                if rec.sex is Sex.MALE:
                    raise SexInconsistencyError(f"个体 {rec.id} 声明为男性却作为母亲出现")
                rec = replace(rec, sex=Sex.FEMALE)
            elif i in as_father:
                if rec.sex is Sex.FEMALE:
                    raise SexInconsistencyError(f"个体 {rec.id} 声明为女性却作为父亲出现")
                rec = replace(rec, sex=Sex.MALE)
            normalized.append(rec)
        return normalized

    @property
    def n(self) -> int:
        return len(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def __contains__(self, individual_id: object) -> bool:
        return individual_id in self._index

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Pedigree):
            return NotImplemented
        return self.records == other.records

    def __hash__(self) -> int:
        return hash(self.records)

    def __repr__(self) -> str:
        return f"Pedigree(n={self.n}, founders={len(self.founders)}, leaves={len(self.leaves)})"

    def index(self, individual_id: str) -> int:
        """外部 ID -> 稠密下标"""
        try:
            return self._index[individual_id]
        except KeyError:
            raise UnknownIndividualError(individual_id) from None

    def indices(self, individual_ids: Iterable[str]) -> List[int]:
        return [self.index(i) for i in individual_ids]

    def is_founder(self, i: int) -> bool:
        return self.mother[i] == NO_PARENT

    def parents(self, i: int) -> Optional[Tuple[int, int]]:
        """返回 (母亲, 父亲) 下标，奠基者返回 None"""
        if self.mother[i] == NO_PARENT:
            return None
        return int(self.mother[i]), int(self.father[i])

    def founder_ids(self) -> Tuple[str, ...]:
        return tuple(self.ids[f] for f in self.founders)

    def subpedigree(self, members: Iterable[int], cut_founders: Iterable[int]) -> "Pedigree":
        """
        抽取子系谱：members 按稠密下标顺序保留，cut_founders 中的个体去掉父母成为奠基者。

        其余成员的父母必须同在 members 中。
        """
        keep = sorted(set(int(m) for m in members))
        cut = set(int(c) for c in cut_founders)
        records = []
        for i in keep:
            rec = self.records[i]
            if i in cut and not rec.is_founder:
                rec = replace(rec, mother=None, father=None)
            records.append(rec)
        return Pedigree(records)


def topological_order(pedigree: Pedigree) -> TopologicalOrder:
    """
    计算系谱的拓扑顺序。

    奠基者按稠密下标排在最前（对应以奠基者初始化队列），其后的非奠基者
    每次取就绪个体中下标最小者，因此对同一输入结果确定。
    """
    order, remaining = _sweep(pedigree.mother, pedigree.father)
    if remaining:  # 构造时已保证无环
        raise PedigreeCycleError([pedigree.ids[i] for i in remaining])
    order_arr = np.asarray(order, dtype=np.int64)
    position = np.empty(len(order), dtype=np.int64)
    position[order_arr] = np.arange(len(order), dtype=np.int64)
    return TopologicalOrder(order=order_arr, position=position)
