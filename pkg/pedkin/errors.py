"""
异常定义模块
所有库代码抛出的错误都继承自 PedkinError，CLI 统一捕获后以退出码 1 结束
"""

from typing import Optional, Sequence


class PedkinError(Exception):
    """pedkin 所有错误的基类"""


class PedigreeFormatError(PedkinError):
    """系谱文件格式错误（带行号）"""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"第 {line_number} 行: {message}"
        super().__init__(message)


class DuplicateIndividualError(PedkinError):
    """同一个体被声明了多次"""

    def __init__(self, individual_id: str, line_number: Optional[int] = None):
        self.individual_id = individual_id
        self.line_number = line_number
        where = f" (第 {line_number} 行)" if line_number is not None else ""
        super().__init__(f"重复的个体 ID: {individual_id}{where}")


class PedigreeCycleError(PedkinError):
    """系谱中存在环（某个体是自己的祖先）"""

    def __init__(self, cycle: Sequence[str]):
        self.cycle = tuple(cycle)
        super().__init__(f"系谱中存在环: {' -> '.join(self.cycle)}")


class SexInconsistencyError(PedkinError):
    """性别与父母角色矛盾"""


class HalfFounderError(PedkinError):
    """只有一个已知亲本，且未启用虚拟奠基者合成"""


class UnknownIndividualError(PedkinError):
    """引用了系谱中不存在的个体"""

    def __init__(self, individual_id: str):
        self.individual_id = individual_id
        super().__init__(f"未知个体: {individual_id}")


class FounderKinshipError(PedkinError):
    """奠基者亲缘矩阵 Ψ 不合法"""


class CutPlanError(PedkinError):
    """切割方案与系谱不一致"""


class InterestPlacementError(CutPlanError):
    """目标个体无法放入同一个最年轻的片段，应退回整体精确算法"""


class OracleBudgetError(PedkinError):
    """非奠基者数量超出穷举预算"""


class MatrixMismatchError(PedkinError):
    """两个矩阵的个体集合或对角线约定不一致"""


class ConfigError(PedkinError):
    """配置文件或运行参数不合法"""
