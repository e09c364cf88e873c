"""
基准测试框架
固定 N，按 G, 2G, 4G, ... 扫描 Wright-Fisher 系谱，取 best-of-r 墙钟时间并拟合标度
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np

from ..errors import ConfigError
from ..simulate.generators import WrightFisherParams, wright_fisher_pedigree
from .runners import BaseRunner

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BenchRecord:
    algo: str
    N: int
    G: int
    n: int
    work: int
    seconds: float


@dataclass(frozen=True)
class ScalingFit:
    """
    loglog：log(耗时) 对 log(n) 的斜率；linear：耗时对 G 的斜率。

    r_squared 为对应线性回归的决定系数。
    """

    kind: str
    slope: float
    r_squared: float

    def describe(self) -> str:
        if self.kind == "loglog":
            return f"log-log 斜率 {self.slope:.3f} (R²={self.r_squared:.3f})"
        return f"耗时对 G 线性斜率 {self.slope:.3g} 秒/代 (R²={self.r_squared:.3f})"


@dataclass
class BenchReport:
    records: List[BenchRecord] = field(default_factory=list)
    fits: Dict[str, ScalingFit] = field(default_factory=dict)

    def as_rows(self) -> List[Dict[str, object]]:
        return [vars(r) for r in self.records]


def fit_line(x: Sequence[float], y: Sequence[float]) -> ScalingFit:
    """一元线性回归，返回斜率与 R²"""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    total = float(((y - y.mean()) ** 2).sum())
    r_squared = 1.0 - float((residual**2).sum()) / total if total > 0 else 1.0
    return ScalingFit(kind="linear", slope=float(slope), r_squared=r_squared)


def fit_loglog(x: Sequence[float], y: Sequence[float]) -> ScalingFit:
    line = fit_line(np.log(np.asarray(x, dtype=np.float64)), np.log(np.asarray(y, dtype=np.float64)))
    return ScalingFit(kind="loglog", slope=line.slope, r_squared=line.r_squared)


class BenchmarkHarness:
    """基准测试框架"""

    def __init__(
        self,
        runners: Sequence[BaseRunner],
        N: int,
        G: int,
        steps: int = 3,
        repeats: int = 3,
        seed: int = 0,
    ):
        if steps < 2:
            raise ConfigError("拟合标度至少需要 2 个规模点")
        if repeats < 1:
            raise ConfigError("重复次数必须 >= 1")
        self.runners = list(runners)
        self.N = N
        self.G = G
        self.steps = steps
        self.repeats = repeats
        self.seed = seed

    def generations(self) -> List[int]:
        return [self.G * (2**k) for k in range(self.steps)]

    def _best_of(self, runner: BaseRunner, pedigree, interest) -> float:
        best = float("inf")
        for _ in range(self.repeats):
            start = time.perf_counter()
            runner.run(pedigree, interest)
            best = min(best, time.perf_counter() - start)
        return runner.normalize(best)

    def run(self) -> BenchReport:
        report = BenchReport()
        for G in self.generations():
            pedigree = wright_fisher_pedigree(WrightFisherParams(N=self.N, G=G, seed=self.seed))
            interest = [pedigree.ids[i] for i in range(pedigree.n - 2 * self.N, pedigree.n)]
            for runner in self.runners:
                seconds = self._best_of(runner, pedigree, interest)
                logger.info(f"{runner.name}: N={self.N} G={G} n={pedigree.n} -> {seconds:.6f}s")
                report.records.append(
                    BenchRecord(runner.name, self.N, G, pedigree.n, runner.work(pedigree), seconds)
                )

        for runner in self.runners:
            mine = [r for r in report.records if r.algo == runner.name]
            if runner.fit == "linear":
                report.fits[runner.name] = fit_line([r.G for r in mine], [r.seconds for r in mine])
            else:
                report.fits[runner.name] = fit_loglog([r.n for r in mine], [max(r.seconds, 1e-12) for r in mine])
        return report
