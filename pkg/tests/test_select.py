import numpy as np
import pytest

from tieredal.errors import InvalidArgumentError
from tieredal.select import (auto_label_select, badge_select, entropy,
                             entropy_select)


class TestEntropySelect:
    def test_uniform_beats_onehot(self):
        probs = np.array([[0.25, 0.25, 0.25, 0.25],
                          [1.0, 0.0, 0.0, 0.0]])
        batch = entropy_select(probs, [0, 1], 1)
        assert batch.indices.tolist() == [0]
        assert batch.items[0].score == pytest.approx(np.log(4), abs=1e-12)
        assert batch.items[0].tier == "hard"
        assert batch.items[0].suggested_label == 0

    def test_onehot_entropy_zero(self):
        probs = np.array([[0.0, 1.0, 0.0]])
        batch = entropy_select(probs, [0], 1)
        assert batch.items[0].score == 0.0

    def test_exhaustive_sorted_descending(self):
        rng = np.random.default_rng(0)
        raw = rng.random((10, 3))
        probs = raw / raw.sum(axis=1, keepdims=True)
        batch = entropy_select(probs, np.arange(10), 10)
        scores = [it.score for it in batch.items]
        assert scores == sorted(scores, reverse=True)
        assert sorted(batch.indices.tolist()) == list(range(10))

    def test_matches_full_sort_oracle(self):
        rng = np.random.default_rng(7)
        raw = rng.random((50, 5))
        probs = raw / raw.sum(axis=1, keepdims=True)
        unlabeled = rng.choice(50, size=30, replace=False)
        b = 12
        batch = entropy_select(probs, unlabeled, b)
        ent = entropy(probs[unlabeled])
        oracle = [int(unlabeled[i]) for i in np.lexsort((unlabeled, -ent))[:b]]
        assert batch.indices.tolist() == oracle

    def test_tie_breaks_by_lower_index(self):
        probs = np.tile([0.5, 0.5], (4, 1))
        batch = entropy_select(probs, [3, 1, 2], 2)
        assert batch.indices.tolist() == [1, 2]

    def test_budget_too_large(self):
        with pytest.raises(InvalidArgumentError):
            entropy_select(np.ones((2, 2)) / 2, [0, 1], 3)


class TestBadgeSelect:
    def test_single_point(self):
        E = np.random.default_rng(0).standard_normal((5, 4))
        probs = np.ones((5, 2)) / 2
        batch = badge_select(E, np.arange(5), probs, 1, 3)
        assert len(batch.items) == 1
        assert not batch.fallback

    def test_two_clusters_covered(self):
        # two far-apart clusters: b=2 should straddle them almost surely
        E = np.zeros((8, 2))
        E[:4] = [0.0, 0.0]
        E[:4] += 0.01 * np.random.default_rng(0).standard_normal((4, 2))
        E[4:] = [100.0, 0.0]
        E[4:] += 0.01 * np.random.default_rng(1).standard_normal((4, 2))
        probs = np.ones((8, 2)) / 2
        hits = 0
        for seed in range(200):
            batch = badge_select(E, np.arange(8), probs, 2, seed)
            sides = {int(i >= 4) for i in batch.indices}
            hits += sides == {0, 1}
        assert hits / 200 >= 0.95

    def test_duplicate_embeddings_fallback(self):
        E = np.ones((6, 3))
        probs = np.ones((6, 2)) / 2
        batch = badge_select(E, np.arange(6), probs, 2, 5)
        assert batch.fallback
        assert len(set(batch.indices.tolist())) == 2

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(2)
        E = rng.standard_normal((20, 6))
        probs = np.ones((20, 3)) / 3
        a = badge_select(E, np.arange(20), probs, 5, 77)
        b = badge_select(E, np.arange(20), probs, 5, 77)
        assert a.indices.tolist() == b.indices.tolist()

    def test_sampling_law_chi_square(self):
        # 4 points on a line; first two forced far apart, then check the D^2
        # law empirically for the second draw given a fixed first draw
        from scipy.stats import chisquare
        E = np.array([[0.0], [1.0], [3.0], [7.0]])
        probs = np.ones((4, 2)) / 2
        counts = np.zeros(4)
        n_trials = 10_000
        first_counts = np.zeros(4)
        second_given_first = {f: np.zeros(4) for f in range(4)}
        for seed in range(n_trials):
            batch = badge_select(E, np.arange(4), probs, 2, seed)
            i, j = batch.indices.tolist()
            first_counts[i] += 1
            second_given_first[i][j] += 1
        # first pick uniform
        p_first = chisquare(first_counts).pvalue
        assert p_first > 0.01
        # second pick follows D^2 masses conditioned on the first
        for f in range(4):
            d2 = (E[:, 0] - E[f, 0]) ** 2
            expected = d2 / d2.sum() * second_given_first[f].sum()
            observed = second_given_first[f]
            mask = expected > 0
            p = chisquare(observed[mask], expected[mask]).pvalue
            assert p > 0.01


class TestAutoLabelSelect:
    def test_most_confident_first(self):
        probs = np.array([[0.99, 0.01], [0.6, 0.4]])
        batch = auto_label_select(probs, [0, 1], 1)
        item = batch.items[0]
        assert item.index == 0
        assert item.suggested_label == 0
        assert item.score == pytest.approx(0.99)
        assert item.tier == "easy"

    def test_zero_budget(self):
        assert auto_label_select(np.ones((3, 2)) / 2, [0, 1, 2], 0).items == []

    def test_tie_lower_index_wins(self):
        probs = np.array([[0.7, 0.3], [0.7, 0.3], [0.7, 0.3]])
        batch = auto_label_select(probs, [2, 0, 1], 2)
        assert batch.indices.tolist() == [0, 1]

    def test_budget_too_large(self):
        with pytest.raises(InvalidArgumentError):
            auto_label_select(np.ones((2, 2)) / 2, [0, 1], 3)


class TestSelectorContracts:
    def test_exact_counts_and_no_labeled(self):
        rng = np.random.default_rng(11)
        raw = rng.random((40, 4))
        probs = raw / raw.sum(axis=1, keepdims=True)
        E = rng.standard_normal((40, 8))
        unlabeled = rng.choice(40, size=25, replace=False)
        for b in (1, 5, 25):
            for batch in (entropy_select(probs, unlabeled, b),
                          badge_select(E, unlabeled, probs, b, 1),
                          auto_label_select(probs, unlabeled, b)):
                assert len(batch.items) == b
                assert len(set(batch.indices.tolist())) == b
                assert set(batch.indices.tolist()) <= set(unlabeled.tolist())
