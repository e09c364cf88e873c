"""
亲缘矩阵与奠基者亲缘矩阵 Ψ 的数据类型
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from ..errors import FounderKinshipError, UnknownIndividualError

# 亲缘系数为二进小数，比较时使用的容差
TOLERANCE = 1e-12


class DiagonalConvention(str, Enum):
    """对角线约定：近交系数 Φ_ii 或自身亲缘系数 φ_ii"""

    INBREEDING = "inbreeding"
    SELF_KINSHIP = "self-kinship"


class PsiMode(str, Enum):
    """奠基者亲缘矩阵的初始化方式"""

    FULL = "full"
    AVERAGE_PSI = "average_psi"
    ZERO = "zero"


@dataclass(frozen=True, eq=False)
class KinshipMatrix:
    """n×n 对称亲缘矩阵，附带对角线约定和 ID 映射"""

    ids: Tuple[str, ...]
    values: np.ndarray
    convention: DiagonalConvention = DiagonalConvention.INBREEDING
    _index: Dict[str, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        n = len(self.ids)
        if values.shape != (n, n):
            raise ValueError(f"矩阵形状 {values.shape} 与 {n} 个 ID 不匹配")
        values.setflags(write=False)
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(self.ids)})

    @property
    def n(self) -> int:
        return len(self.ids)

    def index(self, individual_id: str) -> int:
        try:
            return self._index[individual_id]
        except KeyError:
            raise UnknownIndividualError(individual_id) from None

    def get(self, a: str, b: str) -> float:
        return float(self.values[self.index(a), self.index(b)])

    def submatrix(self, ids: Iterable[str]) -> "KinshipMatrix":
        ids = tuple(ids)
        idx = [self.index(i) for i in ids]
        return KinshipMatrix(ids, self.values[np.ix_(idx, idx)].copy(), self.convention)

    def with_convention(self, target: DiagonalConvention) -> "KinshipMatrix":
        return convert_diagonal(self, target)

    def invariant_violations(self, tol: float = TOLERANCE) -> List[str]:
        """返回违反对称性与取值范围的描述，空列表表示全部满足"""
        problems = []
        v = self.values
        if not np.allclose(v, v.T, rtol=0.0, atol=tol):
            problems.append("矩阵不对称")
        off = v[~np.eye(self.n, dtype=bool)]
        if off.size and (off.min() < -tol or off.max() > 1 + tol):
            problems.append("非对角元素超出 [0, 1]")
        diag = np.diag(v)
        low = 0.5 if self.convention is DiagonalConvention.SELF_KINSHIP else 0.0
        if diag.size and (diag.min() < low - tol or diag.max() > 1 + tol):
            problems.append(f"对角元素超出 [{low}, 1]")
        return problems


def convert_diagonal(matrix: KinshipMatrix, target: DiagonalConvention) -> KinshipMatrix:
    """
    在近交系数与自身亲缘系数之间转换对角线：Φ = 2φ − 1，φ = (1 + Φ)/2。

    非对角元素不变；两次相反的转换互为逆运算。
    """
    target = DiagonalConvention(target)
    if target is matrix.convention:
        return matrix
    values = np.array(matrix.values, dtype=np.float64)
    diag = np.diag(values).copy()
    if target is DiagonalConvention.INBREEDING:
        diag = 2.0 * diag - 1.0
    else:
        diag = (1.0 + diag) / 2.0
    np.fill_diagonal(values, diag)
    return KinshipMatrix(matrix.ids, values, target)


@dataclass(frozen=True, eq=False)
class FounderKinship:
    """
    奠基者亲缘矩阵 Ψ（F×F，对角线为奠基者近交系数 Ψ_ff）。

    matrix 中保存的是当前模式下实际生效的 Ψ：
    full 模式为原始输入，average_psi 模式非对角元素统一为 psi_bar，zero 模式全零。
    """

    founders: Tuple[str, ...]
    matrix: np.ndarray
    mode: PsiMode = PsiMode.FULL

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=np.float64)
        f = len(self.founders)
        if m.shape != (f, f):
            raise FounderKinshipError(f"Ψ 形状 {m.shape} 与 {f} 个奠基者不匹配")
        if len(set(self.founders)) != f:
            raise FounderKinshipError("Ψ 中存在重复的奠基者")
        if not np.array_equal(m, m.T):
            raise FounderKinshipError("Ψ 必须对称")
        if m.size and (m.min() < 0.0 or m.max() > 1.0):
            raise FounderKinshipError("Ψ 的元素必须位于 [0, 1]")
        m.setflags(write=False)
        object.__setattr__(self, "founders", tuple(self.founders))
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "mode", PsiMode(self.mode))

    @classmethod
    def zero(cls, founders: Sequence[str]) -> "FounderKinship":
        f = len(founders)
        return cls(tuple(founders), np.zeros((f, f)), PsiMode.ZERO)

    @classmethod
    def full(cls, founders: Sequence[str], matrix: np.ndarray) -> "FounderKinship":
        return cls(tuple(founders), np.asarray(matrix, dtype=np.float64), PsiMode.FULL)

    @classmethod
    def average_of(cls, psi: "FounderKinship") -> "FounderKinship":
        """以各奠基者的近交系数构造 average-ψ 模式：非对角统一为平均近交系数"""
        diag = np.diag(psi.matrix).copy()
        psi_bar = float(diag.mean()) if diag.size else 0.0
        m = np.full((len(diag), len(diag)), psi_bar)
        np.fill_diagonal(m, diag)
        return cls(psi.founders, m, PsiMode.AVERAGE_PSI)

    @property
    def inbreeding(self) -> np.ndarray:
        return np.diag(self.matrix)

    @property
    def psi_bar(self) -> float:
        """奠基者平均近交系数 (1/F)·Σ Ψ_hh"""
        diag = self.inbreeding
        return float(diag.mean()) if diag.size else 0.0

    def require_founders(self, founders: Sequence[str]) -> None:
        """Ψ 的奠基者集合必须与给定集合一致"""
        expected = set(founders)
        if set(self.founders) != expected or len(self.founders) != len(expected):
            missing = sorted(expected - set(self.founders))
            extra = sorted(set(self.founders) - expected)
            raise FounderKinshipError(f"Ψ 的奠基者集合与系谱不一致 (缺少 {missing}, 多出 {extra})")

    def restricted_to(self, founders: Sequence[str]) -> "FounderKinship":
        pos = {f: i for i, f in enumerate(self.founders)}
        try:
            idx = [pos[f] for f in founders]
        except KeyError as e:
            raise FounderKinshipError(f"{e.args[0]} 不在 Ψ 的奠基者集合中") from None
        return FounderKinship(tuple(founders), self.matrix[np.ix_(idx, idx)].copy(), self.mode)

    def self_kinship_seed(self) -> np.ndarray:
        """递推的初值：φ_ff = (1 + Ψ_ff)/2，φ_fg = Ψ_fg"""
        seed = np.array(self.matrix, dtype=np.float64)
        np.fill_diagonal(seed, (1.0 + np.diag(self.matrix)) / 2.0)
        return seed
