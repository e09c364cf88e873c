import io

import pytest

from pedkin.pedigree.io import parse_pedigree
from pedkin.pedigree.model import Pedigree
from pedkin.simulate.generators import WrightFisherParams, wright_fisher_pedigree

TRIO = """\
A 0 0 M
B 0 0 F
C A B M
"""

# S1、S2 为全同胞，X 为二者之子
FULL_SIB_MATING = """\
F 0 0 M
M 0 0 F
S1 F M M
S2 F M F
X S1 S2 M
"""

HALF_SIBS = """\
D 0 0 M
M1 0 0 F
M2 0 0 F
H1 D M1 M
H2 D M2 F
"""

FIRST_COUSINS = """\
GF 0 0 M
GM 0 0 F
P1 GF GM M
P2 GF GM F
W1 0 0 F
W2 0 0 M
C1 P1 W1 M
C2 W2 P2 F
"""


def ped_from_text(text: str) -> Pedigree:
    return parse_pedigree(io.StringIO(text))


@pytest.fixture
def trio() -> Pedigree:
    return ped_from_text(TRIO)


@pytest.fixture
def full_sib_mating() -> Pedigree:
    return ped_from_text(FULL_SIB_MATING)


@pytest.fixture
def half_sibs() -> Pedigree:
    return ped_from_text(HALF_SIBS)


@pytest.fixture
def first_cousins() -> Pedigree:
    return ped_from_text(FIRST_COUSINS)


@pytest.fixture
def wright_fisher():
    """按参数构造 Wright-Fisher 系谱的工厂"""

    def build(N: int, G: int, seed: int = 7, monogamous: bool = False) -> Pedigree:
        return wright_fisher_pedigree(WrightFisherParams(N=N, G=G, seed=seed, monogamous=monogamous))

    return build


def last_generation(pedigree: Pedigree, N: int):
    return [pedigree.ids[i] for i in range(pedigree.n - 2 * N, pedigree.n)]


@pytest.fixture
def write_file(tmp_path):
    def write(name: str, text: str) -> str:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return write
