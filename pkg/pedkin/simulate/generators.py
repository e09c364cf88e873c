"""
二倍体 Wright-Fisher 世代系谱与随机交配系谱
"""

import logging
from dataclasses import dataclass
from typing import List

import numpy as np

from ..errors import ConfigError
from ..pedigree.model import IndividualRecord, Pedigree, Sex

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WrightFisherParams:
    """
    N 为每代的配对数（每代 2N 个个体），G 为世代数。

    monogamous=True 时每代先把雌雄随机配成 N 对，子女只从这些配对中抽取父母。
    """

    N: int
    G: int
    seed: int = 0
    monogamous: bool = False

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ConfigError("N 必须 >= 1")
        if self.G < 1:
            raise ConfigError("G 必须 >= 1")


def _wf_id(generation: int, k: int) -> str:
    return f"g{generation}_{k}"


def wright_fisher_pedigree(params: WrightFisherParams) -> Pedigree:
    """
    生成 Wright-Fisher 系谱。

    第 g 代的前 N 个个体为雌性、后 N 个为雄性；第 g>0 代每个个体
    从上一代雌性中均匀抽取母亲、从雄性中均匀抽取父亲。稠密下标按世代顺序排列。
    """
    N, G = params.N, params.G
    rng = np.random.default_rng(params.seed)
    sexes = [Sex.FEMALE] * N + [Sex.MALE] * N
    records: List[IndividualRecord] = [
        IndividualRecord(_wf_id(0, k), sexes[k]) for k in range(2 * N)
    ]

    for g in range(1, G):
        if params.monogamous:
            pairs = np.stack([rng.permutation(N), N + rng.permutation(N)], axis=1)
            chosen = pairs[rng.integers(0, N, size=2 * N)]
            mothers, fathers = chosen[:, 0], chosen[:, 1]
        else:
            mothers = rng.integers(0, N, size=2 * N)
            fathers = N + rng.integers(0, N, size=2 * N)
        for k in range(2 * N):
            records.append(
                IndividualRecord(
                    _wf_id(g, k),
                    sexes[k],
                    mother=_wf_id(g - 1, int(mothers[k])),
                    father=_wf_id(g - 1, int(fathers[k])),
                )
            )

    logger.info(f"生成 Wright-Fisher 系谱: N={N}, G={G}, 共 {len(records)} 个个体")
    return Pedigree(records)


def random_pedigree(n: int, founder_fraction: float, seed: int) -> Pedigree:
    """
    随机交配系谱，用作穷举预言机的模糊测试输入。

    前 round(n·founder_fraction) 个个体为奠基者，性别交替为雌、雄；
    其余个体性别随机，父母从此前出现的对应性别个体中均匀抽取。

    Raises:
        ConfigError: 参数越界，或非奠基者找不到某一性别的可选亲本
    """
    if n < 1:
        raise ConfigError("个体数 n 必须 >= 1")
    if not 0.0 < founder_fraction <= 1.0:
        raise ConfigError("奠基者比例必须位于 (0, 1]")
    rng = np.random.default_rng(seed)
    n_founders = min(n, max(1, int(round(n * founder_fraction))))

    records: List[IndividualRecord] = []
    females: List[str] = []
    males: List[str] = []
    for k in range(n):
        individual_id = f"i{k}"
        if k < n_founders:
            sex = Sex.FEMALE if k % 2 == 0 else Sex.MALE
            records.append(IndividualRecord(individual_id, sex))
        else:
            if not females or not males:
                raise ConfigError(f"个体 {individual_id} 没有可选的{'母亲' if not females else '父亲'}")
            sex = Sex.FEMALE if rng.integers(0, 2) == 0 else Sex.MALE
            mother = females[int(rng.integers(0, len(females)))]
            father = males[int(rng.integers(0, len(males)))]
            records.append(IndividualRecord(individual_id, sex, mother=mother, father=father))
        (females if sex is Sex.FEMALE else males).append(individual_id)
    return Pedigree(records)
