from abc import ABC, abstractmethod
from typing import Dict, Sequence, Type

from ..errors import ConfigError
from ..kinship.exact import exact_kinship
from ..kinship.recursive_cut import assign_generations, plan_from_boundaries, recursive_cut_kinship
from ..kinship.sampler import MergeRule, SamplerConfig, estimate_kinship
from ..pedigree.model import Pedigree


class BaseRunner(ABC):
    """
    所有被测算法的抽象基类。
    定义基准测试对每个算法的统一接口。
    """

    name = "base"
    # 拟合方式：loglog 对 n 拟合幂指数，linear 对世代数 G 做线性拟合
    fit = "loglog"

    @abstractmethod
    def __init__(self, **kwargs):
        self.options = kwargs

    @abstractmethod
    def run(self, pedigree: Pedigree, interest: Sequence[str]) -> None:
        """
        在给定系谱上执行一次算法。

        Args:
            pedigree (Pedigree): Wright-Fisher 系谱。
            interest (Sequence[str]): 最后一代个体。
        """
        pass

    def normalize(self, seconds: float) -> float:
        """把一次运行的耗时换算为拟合使用的量"""
        return seconds

    def work(self, pedigree: Pedigree) -> int:
        """记录在计时表中的规模"""
        return pedigree.n


class ExactRunner(BaseRunner):
    """整体精确算法，耗时应随 n 平方增长"""

    name = "exact"

    def __init__(self, **kwargs):
        super().__init__(**kwargs)

    def run(self, pedigree: Pedigree, interest: Sequence[str]) -> None:
        exact_kinship(pedigree)


class CutRunner(BaseRunner):
    """
    逐代切割的递归算法。

    每个片段大小固定为相邻两代，耗时应随片段数 m（即世代数）线性增长。
    """

    name = "cut"
    fit = "linear"

    def __init__(self, **kwargs):
        super().__init__(**kwargs)

    def run(self, pedigree: Pedigree, interest: Sequence[str]) -> None:
        top = int(assign_generations(pedigree).max())
        plan = plan_from_boundaries(pedigree, interest, range(1, top + 1))
        recursive_cut_kinship(pedigree, None, interest, plan)

    def work(self, pedigree: Pedigree) -> int:
        return int(assign_generations(pedigree).max()) + 1


class SampleRunner(BaseRunner):
    """抽样器，按每次重复的耗时拟合，应随 n 线性增长"""

    name = "sample"

    def __init__(self, samples: int = 200, seed: int = 0, threads: int = 1, merge_rule: str = "unbiased", **kwargs):
        super().__init__(**kwargs)
        self.config = SamplerConfig(samples=samples, seed=seed, merge_rule=MergeRule(merge_rule), threads=threads)

    def run(self, pedigree: Pedigree, interest: Sequence[str]) -> None:
        estimate_kinship(pedigree, None, interest, self.config)

    def normalize(self, seconds: float) -> float:
        return seconds / self.config.samples


RUNNERS: Dict[str, Type[BaseRunner]] = {
    ExactRunner.name: ExactRunner,
    CutRunner.name: CutRunner,
    SampleRunner.name: SampleRunner,
}


def create_runner(name: str, **kwargs) -> BaseRunner:
    """按名称创建算法运行器"""
    try:
        cls = RUNNERS[name]
    except KeyError:
        raise ConfigError(f"未知算法: {name}（可选 {', '.join(RUNNERS)}）") from None
    return cls(**kwargs)
