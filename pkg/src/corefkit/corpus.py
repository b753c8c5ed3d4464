"""Corpus data model, ingestion, validation, statistics, synthetic data.

The on-disk corpus format is JSON line-records, one document per line
(UTF-8).  Document record fields:

* ``doc_id``: string
* ``topic_id``: optional string (gold topic)
* ``sentences``: list of sentences, each a list of ``{"text", "lemma"?}``
* ``mentions``: list of ``{"mention_id", "kind", "trigger", "args"?,
  "gold_cluster"?}`` where spans are ``{"sentence", "start", "end"}``
  (start inclusive, end exclusive, token offsets) and ``args`` maps a
  subset of ``arg0|arg1|loc|time`` to spans.

Unknown fields are ignored with a warning.  Corpora are immutable after
load and safe to share across workers.
"""

import json
import math
import random
import warnings
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Optional

from .partition import Partition

EVENT = "event"
ENTITY = "entity"
KINDS = (EVENT, ENTITY)

WITHIN_DOC = "within_doc"
CROSS_DOC = "cross_doc"
SCOPES = (WITHIN_DOC, CROSS_DOC)

ARG_ROLES = ("arg0", "arg1", "loc", "time")


class CorpusParseError(ValueError):
    """Malformed corpus file; message carries the line number."""


class CorpusValidationError(ValueError):
    """Structurally valid record violating a corpus invariant."""


@dataclass(frozen=True)
class Token:
    text: str
    lemma: Optional[str] = None


@dataclass(frozen=True)
class Span:
    """Token span: [start, end) within sentence ``sentence`` of a document."""

    sentence: int
    start: int
    end: int


@dataclass(frozen=True)
class Mention:
    mention_id: str
    doc_id: str
    kind: str
    trigger: Span
    args: dict[str, Span] = field(default_factory=dict)
    gold_cluster: Optional[str] = None


@dataclass(frozen=True)
class Document:
    doc_id: str
    sentences: tuple[tuple[Token, ...], ...]
    mentions: tuple[Mention, ...] = ()
    topic_id: Optional[str] = None


@dataclass(frozen=True)
class Corpus:
    documents: tuple[Document, ...]
    task: str = EVENT
    scope: str = WITHIN_DOC

    @cached_property
    def documents_by_id(self) -> dict[str, Document]:
        return {d.doc_id: d for d in self.documents}

    @cached_property
    def mentions_by_id(self) -> dict[str, Mention]:
        return {m.mention_id: m for d in self.documents for m in d.mentions}

    def mentions(self) -> list[Mention]:
        return [m for d in self.documents for m in d.mentions]

    def mention(self, mention_id: str) -> Mention:
        try:
            return self.mentions_by_id[mention_id]
        except KeyError:
            raise KeyError(f"unknown mention id {mention_id!r}") from None

    def document(self, doc_id: str) -> Document:
        try:
            return self.documents_by_id[doc_id]
        except KeyError:
            raise KeyError(f"unknown doc id {doc_id!r}") from None

    def gold_topics(self) -> dict[str, str]:
        """doc_id -> gold topic_id, for documents that carry one."""
        return {d.doc_id: d.topic_id for d in self.documents
                if d.topic_id is not None}


def validate_corpus(corpus: Corpus) -> None:
    """Raise :class:`CorpusValidationError` on any invariant violation."""
    if corpus.task not in KINDS:
        raise CorpusValidationError(f"bad task {corpus.task!r}")
    if corpus.scope not in SCOPES:
        raise CorpusValidationError(f"bad scope {corpus.scope!r}")
    doc_ids: set[str] = set()
    mention_ids: set[str] = set()
    for doc in corpus.documents:
        if doc.doc_id in doc_ids:
            raise CorpusValidationError(f"duplicate doc_id {doc.doc_id!r}")
        doc_ids.add(doc.doc_id)
        for sent in doc.sentences:
            for tok in sent:
                if not tok.text:
                    raise CorpusValidationError(
                        f"empty token text in document {doc.doc_id!r}")
        for m in doc.mentions:
            _validate_mention(m, doc, corpus.task, mention_ids)


def _validate_mention(m: Mention, doc: Document, task: str,
                      mention_ids: set[str]) -> None:
    def bad(msg: str) -> CorpusValidationError:
        return CorpusValidationError(f"mention {m.mention_id!r}: {msg}")

    if m.mention_id in mention_ids:
        raise bad("duplicate mention id")
    mention_ids.add(m.mention_id)
    if "|" in m.mention_id:
        raise bad("mention ids must not contain '|' (reserved for pair ids)")
    if m.doc_id != doc.doc_id:
        raise bad(f"doc_id {m.doc_id!r} does not match document {doc.doc_id!r}")
    if m.kind not in KINDS:
        raise bad(f"bad kind {m.kind!r}")
    if task == ENTITY and m.kind != ENTITY:
        raise bad("entity corpus contains a non-entity mention")
    if m.kind == ENTITY and m.args:
        raise bad("entity mentions must not carry argument spans")
    for role in m.args:
        if role not in ARG_ROLES:
            raise bad(f"unknown argument role {role!r}")
    for label, span in [("trigger", m.trigger)] + sorted(m.args.items()):
        if span.sentence < 0 or span.sentence >= len(doc.sentences):
            raise bad(f"{label} span references missing sentence {span.sentence}")
        sent_len = len(doc.sentences[span.sentence])
        if span.start < 0 or span.start >= span.end:
            raise bad(f"{label} span has start {span.start} >= end {span.end}")
        if span.end > sent_len:
            raise bad(f"{label} span end {span.end} > sentence length {sent_len}")


# ---------------------------------------------------------------------------
# File format


def _parse_span(obj, where: str) -> Span:
    try:
        return Span(int(obj["sentence"]), int(obj["start"]), int(obj["end"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise CorpusParseError(f"{where}: bad span: {exc}") from None


_DOC_FIELDS = {"doc_id", "topic_id", "sentences", "mentions"}
_MENTION_FIELDS = {"mention_id", "kind", "trigger", "args", "gold_cluster"}
_TOKEN_FIELDS = {"text", "lemma"}


def _parse_document(record: dict, where: str,
                    unknown: set[str]) -> Document:
    unknown.update(k for k in record if k not in _DOC_FIELDS)
    try:
        doc_id = record["doc_id"]
        sentences = []
        for sent in record.get("sentences", []):
            toks = []
            for tok in sent:
                if isinstance(tok, str):  # bare strings accepted for brevity
                    toks.append(Token(tok))
                else:
                    unknown.update(k for k in tok if k not in _TOKEN_FIELDS)
                    toks.append(Token(tok["text"], tok.get("lemma")))
            sentences.append(tuple(toks))
        mentions = []
        for mrec in record.get("mentions", []):
            unknown.update(k for k in mrec if k not in _MENTION_FIELDS)
            args = {}
            for role, span_rec in (mrec.get("args") or {}).items():
                if span_rec is not None:
                    args[role] = _parse_span(span_rec, where)
            mentions.append(Mention(
                mention_id=mrec["mention_id"],
                doc_id=doc_id,
                kind=mrec["kind"],
                trigger=_parse_span(mrec["trigger"], where),
                args=args,
                gold_cluster=mrec.get("gold_cluster"),
            ))
    except (KeyError, TypeError) as exc:
        raise CorpusParseError(f"{where}: missing or malformed field: {exc}") from None
    return Document(doc_id=doc_id, sentences=tuple(sentences),
                    mentions=tuple(mentions), topic_id=record.get("topic_id"))


def loads_corpus(text: str, task: Optional[str] = None,
                 scope: str = WITHIN_DOC, where: str = "<string>") -> Corpus:
    documents = []
    unknown: set[str] = set()
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        loc = f"{where}:{line_no}"
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusParseError(f"{loc}: invalid JSON: {exc}") from None
        if not isinstance(record, dict):
            raise CorpusParseError(f"{loc}: document record must be an object")
        documents.append(_parse_document(record, loc, unknown))
    if unknown:
        warnings.warn(f"{where}: ignored unknown corpus fields: "
                      f"{sorted(unknown)}", stacklevel=2)
    if task is None:
        kinds = {m.kind for d in documents for m in d.mentions}
        task = ENTITY if kinds == {ENTITY} else EVENT
    corpus = Corpus(tuple(documents), task=task, scope=scope)
    validate_corpus(corpus)
    return corpus


def load_corpus(path, task: Optional[str] = None,
                scope: str = WITHIN_DOC) -> Corpus:
    """Load and validate a corpus file (one JSON document record per line)."""
    with open(path, encoding="utf-8") as f:
        return loads_corpus(f.read(), task=task, scope=scope, where=str(path))


def _span_record(span: Span) -> dict:
    return {"sentence": span.sentence, "start": span.start, "end": span.end}


def dumps_corpus(corpus: Corpus) -> str:
    lines = []
    for doc in corpus.documents:
        record: dict = {"doc_id": doc.doc_id}
        if doc.topic_id is not None:
            record["topic_id"] = doc.topic_id
        record["sentences"] = [
            [{"text": t.text} if t.lemma is None
             else {"text": t.text, "lemma": t.lemma} for t in sent]
            for sent in doc.sentences]
        mrecs = []
        for m in doc.mentions:
            mrec: dict = {"mention_id": m.mention_id, "kind": m.kind,
                          "trigger": _span_record(m.trigger)}
            if m.args:
                mrec["args"] = {role: _span_record(span)
                                for role, span in sorted(m.args.items())}
            if m.gold_cluster is not None:
                mrec["gold_cluster"] = m.gold_cluster
            mrecs.append(mrec)
        record["mentions"] = mrecs
        lines.append(json.dumps(record))
    return "\n".join(lines) + ("\n" if lines else "")


def save_corpus(corpus: Corpus, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps_corpus(corpus))


# ---------------------------------------------------------------------------
# Statistics


@dataclass(frozen=True)
class CorpusStats:
    """Summary counts; gold cluster totals include singletons."""

    documents: int
    sentences: int
    mentions: int
    singletons: int
    clusters: int
    topics: int

    def as_dict(self) -> dict[str, int]:
        return {"documents": self.documents, "sentences": self.sentences,
                "mentions": self.mentions, "singletons": self.singletons,
                "clusters": self.clusters, "topics": self.topics}


def corpus_stats(corpus: Corpus) -> CorpusStats:
    sizes: dict[str, int] = {}
    n_mentions = 0
    for doc in corpus.documents:
        for m in doc.mentions:
            n_mentions += 1
            if m.gold_cluster is not None:
                sizes[m.gold_cluster] = sizes.get(m.gold_cluster, 0) + 1
    return CorpusStats(
        documents=len(corpus.documents),
        sentences=sum(len(d.sentences) for d in corpus.documents),
        mentions=n_mentions,
        singletons=sum(1 for n in sizes.values() if n == 1),
        clusters=len(sizes),
        topics=len({d.topic_id for d in corpus.documents
                    if d.topic_id is not None}),
    )


def gold_partition(corpus: Corpus) -> Partition:
    """Gold clusters as a partition; unlabeled mentions become singletons."""
    clusters: dict[str, list[str]] = {}
    extras: list[list[str]] = []
    for m in corpus.mentions():
        if m.gold_cluster is None:
            extras.append([m.mention_id])
        else:
            clusters.setdefault(m.gold_cluster, []).append(m.mention_id)
    return Partition.from_clusters(list(clusters.values()) + extras)


def filter_by_topics(corpus: Corpus, topic_ids: Iterable[str]) -> Corpus:
    keep = set(topic_ids)
    docs = tuple(d for d in corpus.documents if d.topic_id in keep)
    return replace(corpus, documents=docs)


# ---------------------------------------------------------------------------
# Synthetic corpora

# Desk-scale stand-in for licensed coreference corpora: each planted
# cluster shares a distinctive trigger token (and, for events, argument
# tokens), topics have disjoint filler vocabularies, and mentions of one
# cluster are spread over the topic's documents.


def gen_synthetic(docs: int, clusters: int, mentions_per_cluster: int,
                  vocab_size: int = 50, seed: int = 0, task: str = EVENT,
                  clusters_per_topic: int = 4, scope: str = CROSS_DOC,
                  shared_trigger_ratio: float = 0.0) -> Corpus:
    """Generate a deterministic synthetic coreference corpus.

    Clusters are grouped into topics of ``clusters_per_topic`` each; every
    topic draws its filler words from its own vocabulary of ``vocab_size``
    words, so topics are separable by content and clusters by their
    planted trigger/argument tokens.

    ``shared_trigger_ratio`` makes that fraction of each topic's event
    clusters share one trigger token (think two different earthquakes
    both evoked by "lost"), which only the argument tokens can tell
    apart; the rest keep a cluster-unique trigger.
    """
    for name, value in [("docs", docs), ("clusters", clusters),
                        ("mentions_per_cluster", mentions_per_cluster),
                        ("vocab_size", vocab_size),
                        ("clusters_per_topic", clusters_per_topic)]:
        if value < 1:
            raise ValueError(f"{name} must be >= 1, got {value}")
    n_topics = math.ceil(clusters / clusters_per_topic)
    if docs < n_topics:
        raise ValueError(f"docs={docs} < number of topics {n_topics}")
    if task not in KINDS:
        raise ValueError(f"bad task {task!r}")
    if not 0.0 <= shared_trigger_ratio <= 1.0:
        raise ValueError("shared_trigger_ratio must be in [0, 1]")
    if task == ENTITY and shared_trigger_ratio > 0:
        raise ValueError("entity mentions have no arguments to disambiguate "
                         "shared triggers")
    n_shared = round(shared_trigger_ratio * clusters_per_topic)

    rng = random.Random(seed)
    used: set[str] = set()

    def fresh_word(prefixlen=7) -> str:
        # Random surfaces (not systematic names) so hash-based synthetic
        # embeddings cannot correlate the same way for every seed.
        while True:
            w = "".join(rng.choice("abcdefghijklmnopqrstuvwxyz")
                        for _ in range(prefixlen))
            if w not in used:
                used.add(w)
                return w

    topic_ids = [f"t{t:02d}" for t in range(n_topics)]
    topic_vocab = {t: [fresh_word() for _ in range(vocab_size)]
                   for t in range(n_topics)}
    doc_topic = [d % n_topics for d in range(docs)]
    topic_docs: dict[int, list[int]] = {t: [] for t in range(n_topics)}
    for d, t in enumerate(doc_topic):
        topic_docs[t].append(d)

    sentences: dict[int, list[tuple[Token, ...]]] = {d: [] for d in range(docs)}
    mentions: dict[int, list[Mention]] = {d: [] for d in range(docs)}

    def fillers(topic: int, n: int) -> list[str]:
        return [rng.choice(topic_vocab[topic]) for _ in range(n)]

    # A fixed anchor sentence per topic gives documents of one topic
    # shared n-grams, so tf-idf separates topics cleanly.
    for d in range(docs):
        anchor = topic_vocab[doc_topic[d]][:min(6, vocab_size)]
        sentences[d].append(tuple(Token(w) for w in anchor))

    shared_triggers = [fresh_word() for _ in range(n_topics)]
    for c in range(clusters):
        topic = c // clusters_per_topic
        label = f"c{c:03d}"
        if c % clusters_per_topic < n_shared:
            trigger_tok = shared_triggers[topic]
        else:
            trigger_tok = fresh_word()
        arg_toks = {role: fresh_word() for role in ARG_ROLES}
        candidates = topic_docs[topic]
        for k in range(mentions_per_cluster):
            d = candidates[(c + k) % len(candidates)]
            lead = fillers(topic, rng.randint(1, 3))
            mid = fillers(topic, 1)
            tail = fillers(topic, rng.randint(1, 2))
            if task == EVENT:
                words = (lead + [arg_toks["arg0"]] + mid + [trigger_tok]
                         + [arg_toks["arg1"], arg_toks["loc"],
                            arg_toks["time"]] + tail)
                t0 = len(lead)
                trig_at = t0 + 1 + len(mid)
                args = {"arg0": (t0, t0 + 1),
                        "arg1": (trig_at + 1, trig_at + 2),
                        "loc": (trig_at + 2, trig_at + 3),
                        "time": (trig_at + 3, trig_at + 4)}
            else:
                words = lead + [trigger_tok] + tail
                trig_at = len(lead)
                args = {}
            sent_index = len(sentences[d])
            sentences[d].append(tuple(Token(w) for w in words))
            doc_id = f"d{d:04d}"
            mentions[d].append(Mention(
                mention_id=f"{doc_id}_m{len(mentions[d])}",
                doc_id=doc_id,
                kind=task,
                trigger=Span(sent_index, trig_at, trig_at + 1),
                args={role: Span(sent_index, a, b)
                      for role, (a, b) in args.items()},
                gold_cluster=label,
            ))

    documents = tuple(
        Document(doc_id=f"d{d:04d}", sentences=tuple(sentences[d]),
                 mentions=tuple(mentions[d]),
                 topic_id=topic_ids[doc_topic[d]])
        for d in range(docs))
    corpus = Corpus(documents, task=task, scope=scope)
    validate_corpus(corpus)
    return corpus
