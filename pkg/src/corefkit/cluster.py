"""Agglomerative mention clustering and the head-lemma baseline.

Clusters start as singletons and the pair of clusters with the highest
average cross-cluster pair score is merged repeatedly; merging stops
when no pair's average is strictly above the threshold.  Ties between
candidate pairs break on the lexicographically smallest pair of cluster
minimum ids, which makes results independent of mention order.  Because
the merge sequence itself never consults the threshold, lowering the
threshold can only extend the sequence, so partitions at lower
thresholds are coarsenings of those at higher ones.
"""

from typing import Mapping, Optional, Sequence

import numpy as np

from . import metrics
from .corpus import CROSS_DOC, Corpus
from .partition import Partition, ScoreMatrix, merge_partitions

TUNE_GRID = tuple(round(t * 0.01, 2) for t in range(101))


def _merge_trace(matrix: ScoreMatrix) -> list[tuple[float, list[set[int]]]]:
    """Greedy average-link merge sequence, one snapshot per merge.

    Returns (average score of the merge, resulting clusters) pairs, in
    merge order; cluster-pair sums are updated incrementally, which is
    exactly equivalent to recomputing averages from raw pair scores.
    """
    n = len(matrix.ids)
    clusters: dict[int, set[int]] = {i: {i} for i in range(n)}
    min_id: dict[int, str] = {i: matrix.ids[i] for i in range(n)}
    sums = matrix.scores.astype(np.float64).copy()
    trace: list[tuple[float, list[set[int]]]] = []
    while len(clusters) > 1:
        best: Optional[tuple[float, str, str, int, int]] = None
        active = sorted(clusters)
        for ai, a in enumerate(active):
            for b in active[ai + 1:]:
                avg = sums[a, b] / (len(clusters[a]) * len(clusters[b]))
                lo, hi = sorted((min_id[a], min_id[b]))
                if (best is None or avg > best[0]
                        or (avg == best[0] and (lo, hi) < (best[1], best[2]))):
                    best = (avg, lo, hi, a, b)
        avg, _, _, a, b = best
        clusters[a] |= clusters[b]
        min_id[a] = min(min_id[a], min_id[b])
        del clusters[b]
        sums[a, :] += sums[b, :]
        sums[:, a] += sums[:, b]
        trace.append((avg, [set(c) for c in clusters.values()]))
    return trace


def agglomerate(matrix: ScoreMatrix, tau: float) -> Partition:
    """Average-link clustering; merge while the best average is > tau."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {tau}")
    if len(matrix.ids) == 0:
        return Partition(())
    return _partition_at(matrix, _merge_trace(matrix), tau)


def tune_threshold(dev_scores: Sequence[ScoreMatrix], gold: Partition,
                   objective: str = "conll_f1") -> float:
    """Grid-search the merge threshold on development data.

    Evaluates ``objective`` at every grid point over the union of the
    per-group clusterings; ties go to the smallest threshold.
    """
    scored = frozenset(m for s in dev_scores for m in s.ids)
    if not scored:
        raise ValueError("no development scores to tune on")
    if not scored <= gold.universe:
        missing = sorted(scored - gold.universe)[:3]
        raise ValueError(f"gold partition does not cover scored mentions "
                         f"(e.g. {missing})")
    gold = gold.restricted(scored)
    # One merge trace per matrix serves every grid point.
    traces = [(s, _merge_trace(s)) for s in dev_scores]
    best_tau, best_value = 0.0, -1.0
    for tau in TUNE_GRID:
        predicted = merge_partitions(
            _partition_at(s, trace, tau) for s, trace in traces)
        value = metrics.objective_value(metrics.report(gold, predicted),
                                        objective)
        if value > best_value:
            best_tau, best_value = tau, value
    return best_tau


def _partition_at(matrix: ScoreMatrix, trace, tau: float) -> Partition:
    chosen = None
    for avg, snapshot in trace:
        if avg > tau:
            chosen = snapshot
        else:
            break
    if chosen is None:
        return Partition.singletons(matrix.ids)
    return Partition.from_clusters(
        [matrix.ids[i] for i in cluster] for cluster in chosen)


def lemma_baseline(corpus: Corpus,
                   topics: Optional[Mapping[str, str]] = None) -> Partition:
    """Cluster mentions sharing a trigger head lemma, per document or
    (for cross-document corpora) per topic.

    Head = last trigger token; missing lemma annotations fall back to the
    lowercased surface form.
    """
    if topics is None and corpus.scope == CROSS_DOC:
        topics = corpus.gold_topics()
    groups: dict[tuple, list[str]] = {}
    for doc in corpus.documents:
        if corpus.scope == CROSS_DOC:
            try:
                group = topics[doc.doc_id]
            except KeyError:
                raise ValueError(f"no topic assigned to document "
                                 f"{doc.doc_id!r}") from None
        else:
            group = doc.doc_id
        for m in doc.mentions:
            head = doc.sentences[m.trigger.sentence][m.trigger.end - 1]
            lemma = head.lemma if head.lemma is not None else head.text.lower()
            groups.setdefault((group, lemma), []).append(m.mention_id)
    return Partition.from_clusters(groups.values())
