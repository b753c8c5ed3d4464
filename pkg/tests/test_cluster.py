import numpy as np
import pytest

from corefkit import metrics
from corefkit.cluster import (TUNE_GRID, agglomerate, lemma_baseline,
                              tune_threshold)
from corefkit.corpus import Corpus
from corefkit.partition import Partition, ScoreMatrix, merge_partitions

from conftest import make_doc, make_mention
from oracles import random_partition


def matrix(ids, pairs):
    n = len(ids)
    scores = np.eye(n)
    index = {m: i for i, m in enumerate(ids)}
    for (a, b), s in pairs.items():
        scores[index[a], index[b]] = scores[index[b], index[a]] = s
    return ScoreMatrix(tuple(ids), scores)


def oracle_matrix(gold: Partition, ids=None) -> ScoreMatrix:
    """score(i, j) = 1 iff same gold cluster."""
    ids = list(ids or sorted(gold.universe))
    label = {m: k for k, c in enumerate(gold.clusters) for m in c}
    n = len(ids)
    scores = np.fromfunction(
        np.vectorize(lambda i, j: 1.0 if label[ids[int(i)]] == label[ids[int(j)]] else 0.0),
        (n, n))
    return ScoreMatrix(tuple(ids), scores)


class TestAgglomerate:
    def test_hand_trace_average_link(self):
        m = matrix(["1", "2", "3"],
                   {("1", "2"): 0.9, ("1", "3"): 0.2, ("2", "3"): 0.8})
        result = agglomerate(m, 0.5)
        assert result == Partition.from_clusters([{"1", "2"}, {"3"}])

    def test_tau_one_all_singletons(self):
        m = matrix(["a", "b"], {("a", "b"): 1.0})
        assert agglomerate(m, 1.0) == Partition.singletons(["a", "b"])

    def test_tau_zero_all_positive_merges_everything(self):
        rng = np.random.default_rng(0)
        ids = [f"m{i}" for i in range(6)]
        pairs = {(ids[i], ids[j]): float(rng.uniform(0.05, 1.0))
                 for i in range(6) for j in range(i + 1, 6)}
        m = matrix(ids, pairs)
        assert agglomerate(m, 0.0) == Partition.from_clusters([set(ids)])

    def test_degenerate_inputs(self):
        one = matrix(["only"], {})
        assert agglomerate(one, 0.3) == Partition.singletons(["only"])
        empty = ScoreMatrix((), np.zeros((0, 0)))
        assert agglomerate(empty, 0.3) == Partition(())

    def test_oracle_recovery_at_half(self):
        rng = np.random.default_rng(42)
        for _ in range(30):
            n = int(rng.integers(2, 15))
            gold = Partition.from_clusters(
                random_partition(rng, [f"m{i}" for i in range(n)]))
            got = agglomerate(oracle_matrix(gold), 0.5)
            assert got == gold

    def test_id_permutation_invariance(self):
        rng = np.random.default_rng(3)
        ids = [f"m{i}" for i in range(8)]
        pairs = {(ids[i], ids[j]): float(rng.uniform(0, 1))
                 for i in range(8) for j in range(i + 1, 8)}
        base = agglomerate(matrix(ids, pairs), 0.45)
        shuffled = list(ids)
        rng.shuffle(shuffled)
        again = agglomerate(matrix(shuffled, pairs), 0.45)
        assert base == again

    def test_coarsening_when_threshold_drops(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            n = int(rng.integers(3, 12))
            ids = [f"m{i}" for i in range(n)]
            pairs = {(ids[i], ids[j]): float(rng.uniform(0, 1))
                     for i in range(n) for j in range(i + 1, n)}
            m = matrix(ids, pairs)
            for tau in np.arange(0.2, 0.95, 0.1):
                high = agglomerate(m, float(tau))
                low = agglomerate(m, float(tau) - 0.1)
                assert low.is_coarsening_of(high)

    def test_bad_threshold_rejected(self):
        with pytest.raises(ValueError):
            agglomerate(matrix(["a"], {}), 1.5)


class TestTuneThreshold:
    def test_gold_oracle_scorer_hits_perfect_f1_everywhere(self):
        gold = Partition.from_clusters([{"a", "b"}, {"c", "d"}, {"e"}])
        tau = tune_threshold([oracle_matrix(gold)], gold)
        # with an oracle scorer every grid point below 1.0 is perfect,
        # so the smallest-tau tie-break wins
        assert tau == 0.0
        got = agglomerate(oracle_matrix(gold), tau)
        assert got == gold

    def test_single_mention_universe_returns_smallest_tau(self):
        gold = Partition.from_clusters([{"x"}])
        assert tune_threshold([oracle_matrix(gold)], gold) == 0.0

    def test_argmax_matches_exhaustive_grid(self):
        m = matrix(["1", "2", "3"],
                   {("1", "2"): 0.9, ("1", "3"): 0.2, ("2", "3"): 0.8})
        gold = Partition.from_clusters([{"1", "2"}, {"3"}])
        best = tune_threshold([m], gold)
        # independent exhaustive evaluation over the whole grid
        values = []
        for tau in TUNE_GRID:
            rep = metrics.report(gold, agglomerate(m, tau))
            values.append(rep.conll_f1)
        want = TUNE_GRID[int(np.argmax(values))]
        assert best == want
        assert values[TUNE_GRID.index(best)] == max(values)

    def test_objective_selection_and_missing_gold(self):
        m = matrix(["1", "2"], {("1", "2"): 0.7})
        gold = Partition.from_clusters([{"1", "2"}])
        assert tune_threshold([m], gold, objective="b3") <= 0.69
        with pytest.raises(ValueError, match="cover"):
            tune_threshold([m], Partition.from_clusters([{"1"}]))


class TestLemmaBaseline:
    def test_same_lemma_same_topic_clusters(self):
        m1 = make_mention("d1_m0", "d1", 0, 0, 1, gold="x")
        m2 = make_mention("d2_m0", "d2", 0, 0, 1, gold="x")
        m3 = make_mention("d2_m1", "d2", 0, 1, 2, gold="y")
        docs = (make_doc("d1", ["lost homes"], [m1], topic_id="t0"),
                make_doc("d2", ["lost died"], [m2, m3], topic_id="t0"))
        corpus = Corpus(docs, scope="cross_doc")
        part = lemma_baseline(corpus)
        assert part == Partition.from_clusters(
            [{"d1_m0", "d2_m0"}, {"d2_m1"}])

    def test_same_lemma_different_topics_stay_apart(self):
        m1 = make_mention("d1_m0", "d1", 0, 0, 1)
        m2 = make_mention("d2_m0", "d2", 0, 0, 1)
        docs = (make_doc("d1", ["lost homes"], [m1], topic_id="t0"),
                make_doc("d2", ["lost town"], [m2], topic_id="t1"))
        corpus = Corpus(docs, scope="cross_doc")
        part = lemma_baseline(corpus)
        assert part == Partition.from_clusters([{"d1_m0"}, {"d2_m0"}])

    def test_lemma_annotation_beats_surface(self):
        m1 = make_mention("d1_m0", "d1", 0, 0, 1)
        m2 = make_mention("d1_m1", "d1", 1, 0, 1)
        docs = (make_doc("d1", ["Lost homes", "losing ground"], [m1, m2],
                         lemmas={0: ["lose", None], 1: ["lose", None]}),)
        corpus = Corpus(docs, scope="within_doc")
        part = lemma_baseline(corpus)
        assert part == Partition.from_clusters([{"d1_m0", "d1_m1"}])

    def test_fallback_is_lowercased_surface(self):
        m1 = make_mention("d1_m0", "d1", 0, 0, 1)
        m2 = make_mention("d1_m1", "d1", 1, 0, 1)
        docs = (make_doc("d1", ["Lost homes", "lost ground"], [m1, m2]),)
        corpus = Corpus(docs, scope="within_doc")
        part = lemma_baseline(corpus)
        assert part == Partition.from_clusters([{"d1_m0", "d1_m1"}])

    def test_head_is_last_trigger_token(self):
        m1 = make_mention("d1_m0", "d1", 0, 0, 2)  # "gave up"
        m2 = make_mention("d1_m1", "d1", 1, 0, 1)  # "up"
        docs = (make_doc("d1", ["gave up hope", "up next"], [m1, m2]),)
        part = lemma_baseline(Corpus(docs, scope="within_doc"))
        assert part == Partition.from_clusters([{"d1_m0", "d1_m1"}])

    def test_within_doc_scope_groups_by_document(self, two_doc_corpus):
        corpus = Corpus(two_doc_corpus.documents, task="event",
                        scope="within_doc")
        part = lemma_baseline(corpus)
        # "lost" appears in d1 and d2 but groups are per document
        assert frozenset({"d1_m0", "d2_m0"}) not in part.clusters


class TestMergePartitions:
    def test_disjoint_union(self):
        a = Partition.from_clusters([{"x"}])
        b = Partition.from_clusters([{"y", "z"}])
        assert merge_partitions([a, b]).universe == {"x", "y", "z"}

    def test_overlap_rejected(self):
        a = Partition.from_clusters([{"x"}])
        with pytest.raises(ValueError):
            merge_partitions([a, a])
