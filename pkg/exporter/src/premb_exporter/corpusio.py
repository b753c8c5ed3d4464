"""Minimal reader for the corpus line-record format.

Only what pair-sequence construction needs is kept: document sentences
as token texts, mention trigger positions, and topic ids.  One JSON
document record per line; unknown fields are ignored.
"""

import json
from dataclasses import dataclass


@dataclass(frozen=True)
class MentionRef:
    mention_id: str
    doc_id: str
    sentence: int


@dataclass(frozen=True)
class Doc:
    doc_id: str
    topic_id: str | None
    sentences: tuple[tuple[str, ...], ...]


class CorpusIndex:
    def __init__(self, docs: list[Doc], mentions: list[MentionRef]):
        self.docs = {d.doc_id: d for d in docs}
        self.mentions = {m.mention_id: m for m in mentions}
        if len(self.mentions) != len(mentions):
            raise ValueError("duplicate mention ids in corpus")
        self.doc_order = [d.doc_id for d in docs]

    def mention(self, mention_id: str) -> MentionRef:
        try:
            return self.mentions[mention_id]
        except KeyError:
            raise KeyError(f"unknown mention id {mention_id!r}") from None

    def sentence(self, ref: MentionRef) -> tuple[str, ...]:
        return self.docs[ref.doc_id].sentences[ref.sentence]


def read_corpus(path) -> CorpusIndex:
    docs: list[Doc] = []
    mentions: list[MentionRef] = []
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                sentences = tuple(
                    tuple(t if isinstance(t, str) else t["text"]
                          for t in sent)
                    for sent in record.get("sentences", []))
                doc = Doc(record["doc_id"], record.get("topic_id"), sentences)
                for m in record.get("mentions", []):
                    sent_index = int(m["trigger"]["sentence"])
                    if not 0 <= sent_index < len(sentences):
                        raise ValueError(
                            f"mention {m['mention_id']!r} references missing "
                            f"sentence {sent_index}")
                    mentions.append(MentionRef(m["mention_id"], doc.doc_id,
                                               sent_index))
            except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
                raise ValueError(f"{path}:{line_no}: bad corpus record: {exc}")
            docs.append(doc)
    return CorpusIndex(docs, mentions)
