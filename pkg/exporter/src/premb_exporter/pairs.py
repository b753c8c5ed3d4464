"""Mention-pair selection: explicit pair files or automatic enumeration."""

import json
from itertools import combinations

from .corpusio import CorpusIndex


def read_pairs(path, corpus: CorpusIndex) -> list[tuple[str, str]]:
    """Pair records {"mention_i", "mention_j"}, order preserved."""
    pairs: list[tuple[str, str]] = []
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                a, b = record["mention_i"], record["mention_j"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{line_no}: bad pair record: {exc}")
            corpus.mention(a), corpus.mention(b)  # must exist
            pairs.append((a, b))
    return pairs


def auto_pairs(corpus: CorpusIndex, scope: str = "within_doc") -> list[tuple[str, str]]:
    """All unordered pairs per document or per gold topic, smaller
    mention id first (the order the consuming scorer encodes)."""
    if scope not in ("within_doc", "cross_doc"):
        raise ValueError(f"bad scope {scope!r}")
    groups: dict[str, list[str]] = {}
    for m in corpus.mentions.values():
        if scope == "within_doc":
            key = m.doc_id
        else:
            topic = corpus.docs[m.doc_id].topic_id
            if topic is None:
                raise ValueError(f"document {m.doc_id!r} has no topic_id "
                                 "(required for cross_doc auto pairs)")
            key = topic
        groups.setdefault(key, []).append(m.mention_id)
    pairs: list[tuple[str, str]] = []
    for key in sorted(groups):
        pairs.extend(combinations(sorted(groups[key]), 2))
    return pairs
