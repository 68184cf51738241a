from fractions import Fraction
from math import comb, factorial

import numpy as np
import pytest
from scipy.stats import chi2

from treepatterns import (
    Infeasible,
    InvalidInput,
    Pattern,
    SplitParams,
    count_occurrences,
    exact_distribution,
    expected_occurrences,
    generate_trickle_down,
    make_complete_binary_tree,
    make_path,
    random_tree,
    sample_labelling,
)
from treepatterns.patterns import all_patterns, count_occurrences_batch
from treepatterns.splitgen import DirichletLaw
from treepatterns.treeparams import total_path_length


class TestPattern:
    def test_parse_digits(self):
        assert Pattern.parse("231").entries == (2, 3, 1)

    def test_parse_commas(self):
        assert Pattern.parse("10,2,3,4,5,6,7,8,9,1").k == 10

    @pytest.mark.parametrize("bad", ["221", "13", "0", "a", "2,2"])
    def test_parse_rejects(self, bad):
        with pytest.raises(InvalidInput):
            Pattern.parse(bad)


class TestCounting:
    def test_single_inverted_pair(self):
        assert count_occurrences(make_path(2), Pattern((2, 1)), [2, 1]) == 1
        assert count_occurrences(make_path(2), Pattern((2, 1)), [1, 2]) == 0

    def test_pattern_longer_than_height_is_zero(self):
        t = make_path(4)
        assert count_occurrences(t, Pattern((5, 1, 2, 3, 4)), [1, 2, 3, 4]) == 0

    def test_non_bijective_rejected(self):
        with pytest.raises(InvalidInput):
            count_occurrences(make_path(2), Pattern((2, 1)), [1, 1])

    def test_average_over_all_labellings_equals_mean_on_cbt2(self):
        t = make_complete_binary_tree(2)
        pmf = exact_distribution(t, Pattern((2, 1)))
        mean = sum((p * x for x, p in pmf.items()), Fraction(0))
        assert mean == expected_occurrences(t, Pattern((2, 1))) == 5

    def test_batch_matches_single(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            t = random_tree(int(rng.integers(2, 10)), rng)
            for alpha in [Pattern((2, 1)), Pattern((1, 2, 3)), Pattern((2, 1, 3)),
                          Pattern((3, 1, 4, 2))]:
                labels = np.stack([sample_labelling(t.n, seed=s) for s in range(10)])
                got = count_occurrences_batch(t, alpha, labels)
                want = [count_occurrences(t, alpha, labels[i]) for i in range(10)]
                assert got.tolist() == want


class TestExpected:
    def test_path3_inversions(self):
        assert expected_occurrences(make_path(3), Pattern((2, 1))) == Fraction(3, 2)

    def test_cbt2_length2(self):
        assert expected_occurrences(make_complete_binary_tree(2), Pattern((2, 1))) == 5

    def test_k2_is_half_total_path_length(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            t = random_tree(int(rng.integers(1, 40)), rng)
            assert expected_occurrences(t, Pattern((2, 1))) == Fraction(
                total_path_length(t), 2
            )

    def test_mean_depends_only_on_length(self):
        rng = np.random.default_rng(6)
        for _ in range(5):
            t = random_tree(int(rng.integers(2, 20)), rng)
            for k in (2, 3, 4):
                means = {expected_occurrences(t, a) for a in all_patterns(k)}
                assert len(means) == 1


class TestExactDistribution:
    def test_p2(self):
        assert exact_distribution(make_path(2), Pattern((2, 1))) == {
            0: Fraction(1, 2),
            1: Fraction(1, 2),
        }

    def test_p3_inversion_pmf(self):
        pmf = exact_distribution(make_path(3), Pattern((2, 1)))
        assert pmf == {0: Fraction(1, 6), 1: Fraction(2, 6), 2: Fraction(2, 6), 3: Fraction(1, 6)}

    def test_probabilities_sum_to_one_and_mean_agrees(self):
        rng = np.random.default_rng(7)
        for _ in range(6):
            t = random_tree(int(rng.integers(2, 8)), rng)
            for alpha in (Pattern((2, 1)), Pattern((1, 3, 2))):
                pmf = exact_distribution(t, alpha)
                assert sum(pmf.values()) == 1
                mean = sum((p * x for x, p in pmf.items()), Fraction(0))
                assert mean == expected_occurrences(t, alpha)

    def test_support_bounded_by_chain_combinations(self):
        t = make_complete_binary_tree(2)
        alpha = Pattern((2, 1))
        pmf = exact_distribution(t, alpha)
        assert max(pmf) <= comb(t.n, alpha.k)

    def test_universe_cap(self):
        with pytest.raises(Infeasible, match="9"):
            exact_distribution(make_path(10), Pattern((2, 1)))


class TestSplitTrees:
    def test_same_bag_balls_never_chain(self):
        # n <= s keeps both balls in the root bag: no ordered pair exists
        st = generate_trickle_down(SplitParams(2, 2, 1, 0), 2, seed=1)
        assert st.tree.n == 1
        assert count_occurrences(st, Pattern((2, 1)), [1, 2]) == 0
        assert count_occurrences(st, Pattern((2, 1)), [2, 1]) == 0

    def test_split_mean_matches_enumeration_with_wide_bags(self):
        # internal bags of size 2: chains pick one ball per bag
        params = SplitParams(2, 3, 2, 0, law=DirichletLaw(1))
        for seed in (1, 4):
            st = generate_trickle_down(params, 7, seed=seed)
            for alpha in (Pattern((2, 1)), Pattern((3, 1, 2))):
                pmf = exact_distribution(st, alpha)
                mean = sum((p * x for x, p in pmf.items()), Fraction(0))
                assert mean == expected_occurrences(st, alpha)

    def test_ball_chain_counting_against_node_structure(self):
        st = generate_trickle_down(SplitParams(2, 1, 1, 0), 6, seed=3)
        labels = sample_labelling(6, seed=0)
        # bst preset has singleton bags: ball chains == node chains
        by_node = [0] * st.tree.n
        for v, bag in enumerate(st.bags):
            by_node[v] = labels[bag[0] - 1]
        assert count_occurrences(st, Pattern((2, 1)), labels) == count_occurrences(
            st.tree, Pattern((2, 1)), by_node
        )


class TestSampleLabelling:
    def test_identity_for_n1(self):
        assert sample_labelling(1, seed=0).tolist() == [1]

    def test_determinism(self):
        assert sample_labelling(8, seed=9).tolist() == sample_labelling(8, seed=9).tolist()

    def test_rejects_zero(self):
        with pytest.raises(InvalidInput):
            sample_labelling(0, seed=0)

    def test_uniform_over_all_permutations(self):
        rng = np.random.default_rng(123)
        draws = 100_000
        counts: dict[tuple, int] = {}
        for _ in range(draws):
            key = tuple(sample_labelling(3, rng=rng))
            counts[key] = counts.get(key, 0) + 1
        assert len(counts) == 6
        expected = draws / 6
        stat = sum((c - expected) ** 2 / expected for c in counts.values())
        assert chi2.sf(stat, 5) > 1e-4
