"""Shared result types: mention partitions and pairwise score matrices.

A :class:`Partition` is a set of disjoint, non-empty clusters covering a
mention universe; it is what clustering produces and what the evaluation
metrics consume.  A :class:`ScoreMatrix` holds symmetric pairwise
coreference probabilities over an ordered mention set.

Both have a JSON line-record file representation (UTF-8, one object per
line):

* partition records: ``{"cluster_id": ..., "mention_ids": [...]}``
* score records: ``{"mention_i": ..., "mention_j": ..., "score": ...}``
"""

import json
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np


@dataclass(frozen=True, eq=False)
class Partition:
    """Disjoint non-empty clusters over a universe of mention ids.

    Equality is set-of-sets: cluster order and labels are irrelevant.
    """

    clusters: tuple[frozenset[str], ...]

    def __post_init__(self):
        seen: set[str] = set()
        for cluster in self.clusters:
            if not cluster:
                raise ValueError("partition contains an empty cluster")
            overlap = seen & cluster
            if overlap:
                raise ValueError(
                    f"partition clusters overlap on {sorted(overlap)[0]!r}")
            seen.update(cluster)

    @classmethod
    def from_clusters(cls, clusters: Iterable[Iterable[str]]) -> "Partition":
        canon = sorted((frozenset(c) for c in clusters),
                       key=lambda c: min(c) if c else "")
        return cls(tuple(canon))

    @classmethod
    def singletons(cls, ids: Iterable[str]) -> "Partition":
        return cls.from_clusters([m] for m in ids)

    @property
    def universe(self) -> frozenset[str]:
        return frozenset(m for cluster in self.clusters for m in cluster)

    def cluster_of(self) -> dict[str, frozenset[str]]:
        """Map each mention id to its containing cluster."""
        return {m: cluster for cluster in self.clusters for m in cluster}

    def restricted(self, universe: Iterable[str]) -> "Partition":
        """Drop mentions outside ``universe`` (and clusters left empty)."""
        keep = frozenset(universe)
        return Partition.from_clusters(
            kept for c in self.clusters if (kept := c & keep))

    def is_coarsening_of(self, other: "Partition") -> bool:
        """True when every cluster of ``other`` lies inside one of ours."""
        if self.universe != other.universe:
            return False
        mine = self.cluster_of()
        return all(c <= mine[min(c)] for c in other.clusters)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return frozenset(self.clusters) == frozenset(other.clusters)

    def __hash__(self) -> int:
        return hash(frozenset(self.clusters))

    def __len__(self) -> int:
        return len(self.clusters)

    def __iter__(self) -> Iterator[frozenset[str]]:
        return iter(self.clusters)


def merge_partitions(parts: Iterable[Partition]) -> Partition:
    """Union partitions over disjoint universes into one."""
    clusters: list[frozenset[str]] = []
    for p in parts:
        clusters.extend(p.clusters)
    return Partition.from_clusters(clusters)


def write_partition(path, partition: Partition) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for i, cluster in enumerate(partition.clusters):
            record = {"cluster_id": f"k{i}", "mention_ids": sorted(cluster)}
            f.write(json.dumps(record) + "\n")


def read_partition(path) -> Partition:
    clusters = []
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                clusters.append(record["mention_ids"])
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{line_no}: bad partition record: {exc}")
    return Partition.from_clusters(clusters)


@dataclass(eq=False)
class ScoreMatrix:
    """Symmetric pairwise coreference probabilities over ordered ids.

    Entries lie in [0, 1], the diagonal is exactly 1, and the matrix is
    exactly symmetric (scores are stored once per unordered pair).
    """

    ids: tuple[str, ...]
    scores: np.ndarray

    def __post_init__(self):
        self.ids = tuple(self.ids)
        n = len(self.ids)
        if len(set(self.ids)) != n:
            raise ValueError("duplicate mention ids in score matrix")
        s = np.asarray(self.scores, dtype=np.float64)
        if s.shape != (n, n):
            raise ValueError(f"score matrix shape {s.shape} != ({n}, {n})")
        if not np.isfinite(s).all():
            raise ValueError("non-finite score")
        if (s < 0).any() or (s > 1).any():
            raise ValueError("score outside [0, 1]")
        if not (s == s.T).all():
            raise ValueError("score matrix is not symmetric")
        if n and not (np.diag(s) == 1.0).all():
            raise ValueError("score matrix diagonal must be 1")
        self.scores = s

    def __len__(self) -> int:
        return len(self.ids)

    def score(self, id_a: str, id_b: str) -> float:
        i, j = self.ids.index(id_a), self.ids.index(id_b)
        return float(self.scores[i, j])


def write_scores(path, matrices: Iterable[ScoreMatrix]) -> None:
    """Write score line-records; diagonal records keep singletons visible."""
    with open(path, "w", encoding="utf-8") as f:
        for m in matrices:
            for i, mi in enumerate(m.ids):
                f.write(json.dumps(
                    {"mention_i": mi, "mention_j": mi, "score": 1.0}) + "\n")
                for j in range(i + 1, len(m.ids)):
                    record = {"mention_i": mi, "mention_j": m.ids[j],
                              "score": float(m.scores[i, j])}
                    f.write(json.dumps(record) + "\n")


def read_scores(path) -> list[ScoreMatrix]:
    """Rebuild per-group matrices from score records.

    Groups are the connected components of the pairs present in the file;
    pairs never written (across groups) default to score 0.
    """
    parent: dict[str, str] = {}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: str, b: str) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    entries: list[tuple[str, str, float]] = []
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                a, b = record["mention_i"], record["mention_j"]
                s = float(record["score"])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{line_no}: bad score record: {exc}")
            for m in (a, b):
                parent.setdefault(m, m)
            union(a, b)
            entries.append((a, b, s))

    groups: dict[str, list[str]] = {}
    for m in parent:
        groups.setdefault(find(m), []).append(m)

    matrices = []
    for root in sorted(groups):
        ids = sorted(groups[root])
        index = {m: i for i, m in enumerate(ids)}
        scores = np.zeros((len(ids), len(ids)))
        np.fill_diagonal(scores, 1.0)
        for a, b, s in entries:
            if a in index and b in index:
                scores[index[a], index[b]] = s
                scores[index[b], index[a]] = s
        matrices.append(ScoreMatrix(tuple(ids), scores))
    return matrices


def check_universes(key: Partition, response: Partition) -> None:
    """Gold-mention evaluation requires identical universes."""
    if key.universe != response.universe:
        extra = sorted(key.universe ^ response.universe)[:3]
        raise ValueError(
            f"partition universes differ (e.g. {extra}); "
            "metrics require the same mention set on both sides")
