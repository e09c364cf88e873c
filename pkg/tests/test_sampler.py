import time

import numpy as np
import pytest

from pedkin.bench.harness import fit_loglog
from pedkin.errors import ConfigError, FounderKinshipError
from pedkin.kinship.exact import exact_kinship
from pedkin.kinship.identity_states import cross_edge_counts
from pedkin.kinship.matrix import FounderKinship
from pedkin.kinship.sampler import (
    REPLICATE_BLOCK,
    MergeRule,
    SamplerConfig,
    SegregationSample,
    compute_cc_labels,
    draw_founder_merges,
    estimate_kinship,
    psi_slots,
    sample_segregation,
    standard_errors,
)
from pedkin.pedigree.model import IndividualRecord, Pedigree
from pedkin.simulate.generators import random_pedigree


def _all_segregations(pedigree):
    """枚举所有 4^k 个分离向量"""
    k = len(pedigree.non_founders)
    codes = np.arange(4**k)
    origin = np.zeros((codes.size, pedigree.n, 2), dtype=np.uint8)
    for t, i in enumerate(pedigree.non_founders):
        origin[:, i, 0] = (codes >> (2 * t)) & 1
        origin[:, i, 1] = (codes >> (2 * t + 1)) & 1
    return SegregationSample(origin=origin)


def _exhaustive_average(pedigree):
    seg = _all_segregations(pedigree)
    psi = FounderKinship.zero(pedigree.founder_ids())
    labels = compute_cc_labels(pedigree, seg, psi, np.random.default_rng(0)).labels
    n, replicates = pedigree.n, seg.replicates
    values = np.zeros((n, n))
    for a in range(n):
        counts = cross_edge_counts(labels[:, a, :], labels).sum(axis=0)
        values[a] = counts / (4.0 * replicates)
        values[a, a] = np.count_nonzero(labels[:, a, 0] == labels[:, a, 1]) / replicates
    return values


def _two_founders():
    return Pedigree([IndividualRecord("f"), IndividualRecord("g")])


def _related_psi(pedigree, rng):
    """Ψ 的奠基者顺序与系谱相反，非对角与对角均为正"""
    founders = pedigree.founder_ids()[::-1]
    f = len(founders)
    m = rng.uniform(0.0, 0.2, size=(f, f))
    m = m + m.T
    np.fill_diagonal(m, rng.uniform(0.0, 0.5, size=f))
    return FounderKinship.full(founders, m)


def _union_find_roots(pedigree, origin, merges):
    """等位基因 2i+slot 的并查集根：遗传边加上奠基者合并边"""
    parent = list(range(2 * pedigree.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in pedigree.non_founders:
        for slot, p in enumerate(pedigree.parents(i)):
            parent[find(2 * i + slot)] = find(2 * p + int(origin[i, slot]))
    for u, v in merges:
        parent[find(u)] = find(v)
    return [find(x) for x in range(2 * pedigree.n)]


def _founders_only(f):
    return Pedigree([IndividualRecord(f"f{k}") for k in range(f)])


class TestExhaustiveUnbiasedness:
    @pytest.mark.parametrize("name", ["trio", "full_sib_mating", "half_sibs", "first_cousins"])
    def test_average_over_all_segregations_equals_exact(self, name, request):
        pedigree = request.getfixturevalue(name)
        assert len(pedigree.non_founders) <= 6
        np.testing.assert_array_equal(_exhaustive_average(pedigree), exact_kinship(pedigree).values)

    @pytest.mark.parametrize("seed", range(30))
    def test_random_pedigrees(self, seed):
        pedigree = random_pedigree(4 + seed % 7, 0.4, seed)
        assert len(pedigree.non_founders) <= 6
        np.testing.assert_allclose(_exhaustive_average(pedigree), exact_kinship(pedigree).values, rtol=0, atol=1e-12)


class TestLabels:
    def test_labels_follow_founder_alleles(self, trio):
        seg = sample_segregation(trio, np.random.default_rng(3), replicates=50)
        psi = FounderKinship.zero(trio.founder_ids())
        labels = compute_cc_labels(trio, seg, psi, np.random.default_rng(4)).labels
        c, a, b = trio.index("C"), trio.index("A"), trio.index("B")
        rows = np.arange(50)
        # C 的母源等位基因来自母亲 B，父源来自父亲 A
        assert np.array_equal(labels[:, c, 0], labels[rows, b, seg.origin[:, c, 0]])
        assert np.array_equal(labels[:, c, 1], labels[rows, a, seg.origin[:, c, 1]])
        assert (labels > 0).all()

    def test_unrelated_founder_alleles_are_distinct(self, trio):
        seg = sample_segregation(trio, np.random.default_rng(0), replicates=10)
        psi = FounderKinship.zero(trio.founder_ids())
        labels = compute_cc_labels(trio, seg, psi, np.random.default_rng(0)).labels
        founders = labels[:, list(trio.founders), :].reshape(10, -1)
        for row in founders:
            assert len(set(row.tolist())) == 4

    def test_segregation_only_for_non_founders(self, trio):
        seg = sample_segregation(trio, np.random.default_rng(1), replicates=1000)
        assert not seg.origin[:, list(trio.founders), :].any()
        share = seg.origin[:, trio.index("C"), :].mean()
        assert 0.4 < share < 0.6

    @pytest.mark.parametrize("seed", range(10))
    def test_labels_match_union_find(self, seed):
        pedigree = random_pedigree(8 + seed % 5, 0.4, seed)
        psi = _related_psi(pedigree, np.random.default_rng(seed))
        replicates = 100
        seg = sample_segregation(pedigree, np.random.default_rng([seed, 1]), replicates)
        labels = compute_cc_labels(pedigree, seg, psi, np.random.default_rng([seed, 2])).labels

        heads, tails = draw_founder_merges(
            psi, psi_slots(pedigree, psi), np.random.default_rng([seed, 2]), MergeRule.UNBIASED_2PSI, replicates
        )
        founders = pedigree.founders
        width = 2 * len(founders)

        def allele(node):
            return 2 * founders[(node % width) // 2] + node % 2

        for r in range(replicates):
            mine = (heads // width) == r
            merges = [(allele(u), allele(v)) for u, v in zip(heads[mine], tails[mine])]
            roots = _union_find_roots(pedigree, seg.origin[r], merges)
            flat = labels[r].reshape(-1).tolist()
            pairs = set(zip(flat, roots))
            assert len(pairs) == len(set(flat)) == len(set(roots))


class TestConvergence:
    @pytest.mark.parametrize("name", ["trio", "full_sib_mating"])
    def test_within_tolerance_of_exact(self, name, request):
        pedigree = request.getfixturevalue(name)
        config = SamplerConfig(samples=200_000, seed=11)
        estimate = estimate_kinship(pedigree, None, pedigree.ids, config)
        exact = exact_kinship(pedigree)
        assert np.abs(estimate.matrix.values - exact.values).max() < 0.01

    def test_related_founders_trio(self, trio):
        psi = FounderKinship.full(("A", "B"), np.array([[0.0, 0.25], [0.25, 0.0]]))
        config = SamplerConfig(samples=100_000, seed=5)
        estimate = estimate_kinship(trio, psi, ["C"], config)
        assert estimate.matrix.get("C", "C") == pytest.approx(0.25, abs=0.01)

    def test_error_shrinks_as_inverse_square_root(self, full_sib_mating):
        exact = exact_kinship(full_sib_mating).values
        sizes = [100, 1_000, 10_000, 100_000]
        rms = []
        for samples in sizes:
            errors = [
                estimate_kinship(full_sib_mating, None, full_sib_mating.ids, SamplerConfig(samples, seed)).matrix.values
                - exact
                for seed in range(8)
            ]
            rms.append(float(np.sqrt(np.mean(np.square(errors)))))
        fit = fit_loglog(sizes, rms)
        assert -0.6 <= fit.slope <= -0.4


class TestFounderMerge:
    @pytest.mark.parametrize("rule, expected", [(MergeRule.UNBIASED_2PSI, 0.3), (MergeRule.PAPER_LITERAL, 0.15)])
    def test_merge_expectation(self, rule, expected):
        psi = FounderKinship.full(("f", "g"), np.array([[0.0, 0.3], [0.3, 0.0]]))
        config = SamplerConfig(samples=100_000, seed=2024, merge_rule=rule)
        estimate = estimate_kinship(_two_founders(), psi, ["f", "g"], config)
        assert estimate.matrix.get("f", "g") == pytest.approx(expected, abs=0.01)
        assert estimate.matrix.get("f", "f") == 0.0

    def test_founder_self_merge(self):
        psi = FounderKinship.full(("f", "g"), np.diag([0.4, 0.0]))
        config = SamplerConfig(samples=50_000, seed=9)
        estimate = estimate_kinship(_two_founders(), psi, ["f", "g"], config)
        assert estimate.matrix.get("f", "f") == pytest.approx(0.4, abs=0.01)
        assert estimate.matrix.get("g", "g") == 0.0

    def test_probabilities(self):
        assert MergeRule.PAPER_LITERAL.probability(0.3) == 0.3
        assert MergeRule.UNBIASED_2PSI.probability(0.3) == 0.6
        assert MergeRule.UNBIASED_2PSI.probability(0.75) == 1.0

    def test_psi_missing_founder(self, trio):
        psi = FounderKinship.zero(["A"])
        with pytest.raises(FounderKinshipError):
            estimate_kinship(trio, psi, ["C"], SamplerConfig(10, 0))

    def test_merge_cost_grows_at_most_quadratically(self):
        def best_time(f):
            pedigree = _founders_only(f)
            m = np.full((f, f), 0.1)
            np.fill_diagonal(m, 0.0)
            psi = FounderKinship.full(pedigree.founder_ids(), m)
            seg = sample_segregation(pedigree, np.random.default_rng(0), 64)
            best = float("inf")
            for _ in range(3):
                start = time.perf_counter()
                compute_cc_labels(pedigree, seg, psi, np.random.default_rng(1))
                best = min(best, time.perf_counter() - start)
            return best

        # 4 倍的奠基者：二次方为 16 倍，三次方为 64 倍
        assert best_time(160) / best_time(40) < 40


class TestDeterminism:
    def test_same_seed_same_result(self, first_cousins):
        config = SamplerConfig(samples=3000, seed=42)
        one = estimate_kinship(first_cousins, None, first_cousins.ids, config)
        two = estimate_kinship(first_cousins, None, first_cousins.ids, config)
        assert np.array_equal(one.matrix.values, two.matrix.values)

    def test_thread_count_does_not_change_result(self, first_cousins):
        samples = 3 * REPLICATE_BLOCK + 17
        single = estimate_kinship(first_cousins, None, first_cousins.ids, SamplerConfig(samples, 7, threads=1))
        pooled = estimate_kinship(first_cousins, None, first_cousins.ids, SamplerConfig(samples, 7, threads=4))
        assert np.array_equal(single.matrix.values, pooled.matrix.values)
        assert np.array_equal(single.stderr, pooled.stderr)

    def test_different_seeds_differ(self, first_cousins):
        one = estimate_kinship(first_cousins, None, first_cousins.ids, SamplerConfig(2000, 1))
        two = estimate_kinship(first_cousins, None, first_cousins.ids, SamplerConfig(2000, 2))
        assert not np.array_equal(one.matrix.values, two.matrix.values)


class TestEstimateShape:
    def test_interest_order_and_duplicates(self, trio):
        estimate = estimate_kinship(trio, None, ["C", "A", "C"], SamplerConfig(100, 0))
        assert estimate.matrix.ids == ("C", "A")
        assert estimate.samples == 100 and estimate.seed == 0

    def test_parent_child_is_exact_per_replicate(self, trio):
        # 子女必有一个等位基因来自 A，A 的两份等位基因互不相同，每次重复 e(ab) 恰为 1
        estimate = estimate_kinship(trio, None, ["A", "C"], SamplerConfig(500, 3))
        assert estimate.matrix.get("A", "C") == 0.25
        assert estimate.stderr[0, 1] == 0.0

    def test_single_sample_has_no_stderr(self, trio):
        assert estimate_kinship(trio, None, ["C"], SamplerConfig(1, 0)).stderr is None


class TestStandardErrors:
    def test_known_values(self):
        se = standard_errors(np.array([2]), np.array([2]), 4)
        assert se[0] == pytest.approx(np.sqrt(1.0 / 12.0))

    def test_needs_two_samples(self):
        with pytest.raises(ConfigError):
            standard_errors(np.array([1]), np.array([1]), 1)


class TestSamplerConfig:
    def test_invalid(self):
        with pytest.raises(ConfigError):
            SamplerConfig(samples=0, seed=1)
        with pytest.raises(ConfigError):
            SamplerConfig(samples=10, seed=1, threads=0)

    def test_merge_rule_from_string(self):
        assert SamplerConfig(10, 1, merge_rule="paper").merge_rule is MergeRule.PAPER_LITERAL
