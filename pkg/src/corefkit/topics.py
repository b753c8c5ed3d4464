"""Document pre-clustering for cross-document coreference.

Documents become L2-normalized TF-IDF vectors over lowercased unigrams,
bigrams and trigrams (n-grams never cross sentence boundaries), get
clustered with seeded k-means++ / Lloyd iterations, and the number of
topics is picked by the mean silhouette over K = 2..k_max.
"""

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import Corpus

MAX_LLOYD_ITERATIONS = 300


@dataclass(frozen=True)
class DocVector:
    """Sparse tf-idf weights keyed by n-gram."""

    doc_id: str
    weights: dict[str, float]


@dataclass(frozen=True)
class TopicAssignment:
    topics: dict[str, int]  # doc_id -> topic index in [0, k)
    k: int
    silhouette: float
    inertia_history: tuple[float, ...] = ()


def _doc_ngrams(doc) -> list[str]:
    grams = []
    for sent in doc.sentences:
        words = [t.text.lower() for t in sent]
        for n in (1, 2, 3):
            grams.extend(" ".join(words[i:i + n])
                         for i in range(len(words) - n + 1))
    return grams


def tfidf_vectors(corpus: Corpus) -> list[DocVector]:
    """Raw-count tf, smoothed idf ln((1+N)/(1+df)) + 1, L2-normalized."""
    if not corpus.documents:
        raise ValueError("cannot vectorize an empty corpus")
    counts = []
    df: dict[str, int] = {}
    for doc in corpus.documents:
        tf: dict[str, int] = {}
        for gram in _doc_ngrams(doc):
            tf[gram] = tf.get(gram, 0) + 1
        counts.append(tf)
        for gram in tf:
            df[gram] = df.get(gram, 0) + 1
    n = len(corpus.documents)
    vectors = []
    for doc, tf in zip(corpus.documents, counts):
        weights = {g: c * (np.log((1 + n) / (1 + df[g])) + 1.0)
                   for g, c in tf.items()}
        norm = np.sqrt(sum(w * w for w in weights.values()))
        if norm > 0:
            weights = {g: w / norm for g, w in weights.items()}
        vectors.append(DocVector(doc.doc_id, weights))
    return vectors


def _dense(vecs: Sequence[DocVector]) -> np.ndarray:
    vocab = sorted({g for v in vecs for g in v.weights})
    index = {g: i for i, g in enumerate(vocab)}
    x = np.zeros((len(vecs), len(vocab)))
    for row, v in enumerate(vecs):
        for g, w in v.weights.items():
            x[row, index[g]] = w
    return x


def _kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    d2 = ((x - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:
            pick = int(rng.integers(n))
        else:
            pick = int(rng.choice(n, p=d2 / total))
        centers[j] = x[pick]
        d2 = np.minimum(d2, ((x - centers[j]) ** 2).sum(axis=1))
    return centers


def _lloyd(x: np.ndarray, k: int,
           rng: np.random.Generator) -> tuple[np.ndarray, list[float]]:
    centers = _kmeans_pp_init(x, k, rng)
    labels = np.full(x.shape[0], -1)
    history: list[float] = []
    for _ in range(MAX_LLOYD_ITERATIONS):
        d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = d2.argmin(axis=1)
        # Re-seed any emptied cluster with the worst-fit point from a
        # cluster that can spare one.
        for j in range(k):
            if not (new_labels == j).any():
                sizes = np.bincount(new_labels, minlength=k)
                spare = sizes[new_labels] >= 2
                fit = d2[np.arange(len(x)), new_labels]
                worst = int(np.where(spare, fit, -1.0).argmax())
                centers[j] = x[worst]
                new_labels[worst] = j
                d2[:, j] = ((x - centers[j]) ** 2).sum(axis=1)
        history.append(float(d2[np.arange(len(x)), new_labels].sum()))
        if (new_labels == labels).all():
            break
        labels = new_labels
        for j in range(k):
            members = x[labels == j]
            if len(members):
                centers[j] = members.mean(axis=0)
    return labels, history


def mean_silhouette(x: np.ndarray, labels: np.ndarray) -> float:
    """Mean of (b - a) / max(a, b) with Euclidean distances.

    Singleton-cluster points and 0/0 cases score 0; a single cluster
    scores 0 overall.
    """
    n = len(x)
    ks = np.unique(labels)
    if len(ks) < 2:
        return 0.0
    dist = np.sqrt(((x[:, None, :] - x[None, :, :]) ** 2).sum(axis=2))
    scores = np.zeros(n)
    for i in range(n):
        own = labels == labels[i]
        n_own = own.sum()
        if n_own == 1:
            continue
        a = dist[i, own].sum() / (n_own - 1)
        b = min(dist[i, labels == k].mean() for k in ks if k != labels[i])
        denom = max(a, b)
        scores[i] = (b - a) / denom if denom > 0 else 0.0
    return float(scores.mean())


def kmeans(vecs: Sequence[DocVector], k: int, seed: int = 0,
           n_init: int = 10) -> TopicAssignment:
    """Seeded k-means++ / Lloyd clustering of document vectors.

    Runs ``n_init`` restarts (all derived from ``seed``) and keeps the
    one with the lowest final inertia, so results stay deterministic per
    seed but do not hinge on a single initialization.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > len(vecs):
        raise ValueError(f"k={k} exceeds number of documents {len(vecs)}")
    x = _dense(vecs)
    best: tuple[np.ndarray, list[float]] | None = None
    for restart in range(n_init):
        rng = np.random.default_rng(np.random.SeedSequence([seed, k, restart]))
        labels, history = _lloyd(x, k, rng)
        if best is None or history[-1] < best[1][-1]:
            best = (labels, history)
    labels, history = best
    return TopicAssignment(
        topics={v.doc_id: int(lab) for v, lab in zip(vecs, labels)},
        k=k,
        silhouette=mean_silhouette(x, labels),
        inertia_history=tuple(history))


def predict_topics(corpus: Corpus, k_max: int, seed: int = 0) -> TopicAssignment:
    """Pick K in [2, k_max] by mean silhouette (ties to the smaller K)."""
    if k_max < 2:
        raise ValueError("k_max must be >= 2")
    if len(corpus.documents) < 2:
        raise ValueError("topic prediction needs at least 2 documents")
    vecs = tfidf_vectors(corpus)
    best: TopicAssignment | None = None
    for k in range(2, min(k_max, len(vecs)) + 1):
        assignment = kmeans(vecs, k, seed=seed)
        if best is None or assignment.silhouette > best.silhouette:
            best = assignment
    return best


def topic_labels(assignment: TopicAssignment) -> dict[str, str]:
    """doc_id -> printable topic label."""
    return {doc: f"p{t:02d}" for doc, t in assignment.topics.items()}


def write_topics(path, topics: dict[str, str]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for doc_id in sorted(topics):
            f.write(json.dumps({"doc_id": doc_id, "topic": topics[doc_id]})
                    + "\n")


def read_topics(path) -> dict[str, str]:
    topics: dict[str, str] = {}
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                topics[record["doc_id"]] = str(record["topic"])
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{line_no}: bad topic record: {exc}")
    return topics
