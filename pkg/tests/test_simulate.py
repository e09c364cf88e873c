import pytest

from pedkin.errors import ConfigError
from pedkin.pedigree.model import Sex
from pedkin.simulate.generators import WrightFisherParams, random_pedigree, wright_fisher_pedigree


class TestWrightFisher:
    def test_single_generation_is_founders(self):
        ped = wright_fisher_pedigree(WrightFisherParams(N=1, G=1))
        assert ped.ids == ("g0_0", "g0_1")
        assert len(ped.founders) == 2

    def test_generation_layout(self):
        ped = wright_fisher_pedigree(WrightFisherParams(N=2, G=3, seed=11))
        assert ped.n == 12
        for rec in ped.records:
            g = int(rec.id.split("_")[0][1:])
            if g == 0:
                assert rec.is_founder
                continue
            assert rec.mother.startswith(f"g{g - 1}_")
            assert rec.father.startswith(f"g{g - 1}_")
            assert ped.records[ped.index(rec.mother)].sex is Sex.FEMALE
            assert ped.records[ped.index(rec.father)].sex is Sex.MALE

    def test_deterministic_for_seed(self):
        a = wright_fisher_pedigree(WrightFisherParams(N=5, G=4, seed=3))
        b = wright_fisher_pedigree(WrightFisherParams(N=5, G=4, seed=3))
        assert a.records == b.records

    def test_monogamous_parents_come_in_fixed_pairs(self):
        ped = wright_fisher_pedigree(WrightFisherParams(N=4, G=5, seed=2, monogamous=True))
        partners = {}
        for rec in ped.records:
            if rec.is_founder:
                continue
            assert partners.setdefault(rec.mother, rec.father) == rec.father

    @pytest.mark.parametrize("N, G", [(0, 3), (3, 0)])
    def test_invalid_params(self, N, G):
        with pytest.raises(ConfigError):
            WrightFisherParams(N=N, G=G)


class TestRandomPedigree:
    def test_founders_first(self):
        ped = random_pedigree(20, 0.25, seed=4)
        assert ped.n == 20
        founders = [r.id for r in ped.records if r.is_founder]
        assert founders == [f"i{k}" for k in range(5)]

    def test_parents_precede_children(self):
        ped = random_pedigree(50, 0.2, seed=9)
        for k, rec in enumerate(ped.records):
            if not rec.is_founder:
                assert int(rec.mother[1:]) < k and int(rec.father[1:]) < k

    def test_all_founders(self):
        ped = random_pedigree(6, 1.0, seed=0)
        assert len(ped.founders) == 6

    def test_single_founder_has_no_partner(self):
        with pytest.raises(ConfigError):
            random_pedigree(5, 0.1, seed=0)

    @pytest.mark.parametrize("n, fraction", [(0, 0.5), (5, 0.0), (5, 1.5)])
    def test_invalid_arguments(self, n, fraction):
        with pytest.raises(ConfigError):
            random_pedigree(n, fraction, seed=0)
