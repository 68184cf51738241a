from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from treepatterns import (
    InvalidInput,
    Pattern,
    estimate_cumulants,
    exact_cumulants,
    inversion_cumulant_exact,
    make_path,
    random_tree,
    theorem_ratio,
)
from treepatterns.mc import k_statistics, sample_occurrence_counts


class TestKStatistics:
    def test_k2_of_123(self):
        assert k_statistics([1.0, 2.0, 3.0], 2)[1] == pytest.approx(1.0)

    def test_exact_fraction_path(self):
        ks = k_statistics([Fraction(1), Fraction(2), Fraction(3)], 3)
        assert ks[1] == Fraction(1) and ks[2] == 0

    @pytest.mark.parametrize("order", [2, 3, 4])
    def test_subsample_inheritance(self, order):
        # averaging the k-statistic over every subsample without
        # replacement reproduces the population k-statistic exactly
        population = [Fraction(x) for x in (1, 2, 3, 5, 8, 13)]
        pop_k = k_statistics(population, 4)[order - 1]
        subs = [k_statistics(list(s), 4)[order - 1] for s in combinations(population, 4)]
        assert sum(subs, Fraction(0)) / len(subs) == pop_k

    def test_too_few_samples(self):
        with pytest.raises(InvalidInput):
            k_statistics([1.0], 2)


class TestEstimateCumulants:
    def test_degenerate_pattern_gives_exact_zeros(self):
        # pattern longer than height+1: the count is identically zero
        ests = estimate_cumulants(make_path(2), Pattern((3, 2, 1)), 4, 200, seed=0)
        assert ests[0].estimate == 0
        for e in ests[1:]:
            assert e.estimate == 0 and e.standard_error == 0

    def test_determinism(self):
        t = make_path(4)
        a = estimate_cumulants(t, Pattern((2, 1)), 3, 500, seed=11)
        b = estimate_cumulants(t, Pattern((2, 1)), 3, 500, seed=11)
        assert [(e.estimate, e.standard_error) for e in a] == [
            (e.estimate, e.standard_error) for e in b
        ]

    def test_estimator_names(self):
        ests = estimate_cumulants(make_path(3), Pattern((2, 1)), 6, 300, seed=1)
        assert [e.estimator for e in ests[:4]] == ["k-statistic"] * 4
        assert [e.estimator for e in ests[4:]] == ["sample-cumulant"] * 2

    def test_needs_30_samples(self):
        with pytest.raises(InvalidInput):
            estimate_cumulants(make_path(2), Pattern((2, 1)), 2, 10, seed=0)

    def test_p2_converges_to_bernoulli_half(self):
        ests = estimate_cumulants(make_path(2), Pattern((2, 1)), 2, 20_000, seed=5)
        assert abs(ests[0].estimate - 0.5) <= 3 * ests[0].standard_error + 1e-9
        assert abs(ests[1].estimate - 0.25) <= 3 * ests[1].standard_error + 1e-9

    def test_split_tree_universe(self):
        from treepatterns import bst_params, generate_trickle_down

        st = generate_trickle_down(bst_params(), 12, seed=3)
        ests = estimate_cumulants(st, Pattern((2, 1)), 2, 400, seed=0)
        assert ests[0].sample_count == 400


class TestExactCumulants:
    def test_p2_inversions(self):
        ks = exact_cumulants(make_path(2), Pattern((2, 1)), 4)
        assert ks[0] == Fraction(1, 2) and ks[1] == Fraction(1, 4)
        assert ks[2] == 0 and ks[3] == Fraction(-1, 8)

    def test_first_cumulant_is_the_mean(self):
        from treepatterns import expected_occurrences

        rng = np.random.default_rng(2)
        for _ in range(4):
            t = random_tree(int(rng.integers(2, 8)), rng)
            for alpha in (Pattern((2, 1)), Pattern((1, 3, 2))):
                assert exact_cumulants(t, alpha, 1)[0] == expected_occurrences(t, alpha)

    def test_matches_closed_form_for_inversions(self):
        rng = np.random.default_rng(3)
        for _ in range(6):
            t = random_tree(int(rng.integers(2, 9)), rng)
            ks = exact_cumulants(t, Pattern((2, 1)), 4)
            for r in (2, 3, 4):
                assert ks[r - 1] == inversion_cumulant_exact(t, r)

    def test_refuses_large_universe(self):
        from treepatterns import Infeasible

        with pytest.raises(Infeasible):
            exact_cumulants(make_path(10), Pattern((2, 1)), 2)


class TestTheoremRatio:
    def test_zero_coefficient_is_flagged(self):
        t = make_path(5)
        ests = estimate_cumulants(t, Pattern((2, 1)), 3, 500, seed=2)
        ratio = theorem_ratio(t, Pattern((2, 1)), 3, ests[2])
        assert ratio.d_zero and ratio.ratio is None
        assert np.isfinite(ratio.kappa_over_upsilon)

    def test_defined_ratio(self):
        t = make_path(6)
        ests = estimate_cumulants(t, Pattern((2, 1)), 2, 4000, seed=2)
        ratio = theorem_ratio(t, Pattern((2, 1)), 2, ests[1])
        assert not ratio.d_zero
        denom = float(ratio.d_value) * ratio.upsilon
        expected = float(inversion_cumulant_exact(t, 2)) / denom
        assert ratio.ratio == pytest.approx(expected, abs=5 * ests[1].standard_error / denom)

    def test_order_mismatch_rejected(self):
        t = make_path(3)
        ests = estimate_cumulants(t, Pattern((2, 1)), 2, 100, seed=0)
        with pytest.raises(InvalidInput):
            theorem_ratio(t, Pattern((2, 1)), 1, ests[1])


@pytest.mark.slow
class TestConvergenceInvariant:
    def test_estimates_cover_exact_values(self):
        # on small trees the k-statistics land within 4 bootstrap standard
        # errors of the exact cumulants in at least 95% of repeated runs
        rng = np.random.default_rng(8)
        trees = [make_path(3), random_tree(7, rng), random_tree(8, rng)]
        alpha = Pattern((2, 1))
        for t in trees:
            exact = exact_cumulants(t, alpha, 3)
            hits = 0
            runs = 100
            for run in range(runs):
                ests = estimate_cumulants(t, alpha, 3, 10_000, seed=1000 + run)
                ok = all(
                    abs(e.estimate - float(exact[e.order - 1]))
                    <= 4 * max(e.standard_error, 1e-12)
                    for e in ests
                )
                hits += ok
            assert hits >= 95, (t.parent, hits)


class TestSampleCounts:
    def test_batched_sampler_reproducible(self):
        t = make_path(5)
        a = sample_occurrence_counts(t, Pattern((2, 1)), 100, seed=4)
        b = sample_occurrence_counts(t, Pattern((2, 1)), 100, seed=4)
        assert np.array_equal(a, b)

    def test_counts_distribution_matches_exact_pmf(self):
        from treepatterns import exact_distribution

        t = make_path(4)
        alpha = Pattern((2, 1))
        pmf = exact_distribution(t, alpha)
        counts = sample_occurrence_counts(t, alpha, 50_000, seed=9)
        for value, prob in pmf.items():
            phat = float(np.mean(counts == value))
            se = np.sqrt(float(prob) * (1 - float(prob)) / 50_000)
            assert abs(phat - float(prob)) <= 5 * se + 1e-4
