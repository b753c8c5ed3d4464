import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from corefkit.corpus import Corpus, Document, Mention, Span, Token


def make_mention(mention_id, doc_id, sentence, start, end, kind="event",
                 gold=None, args=None):
    return Mention(
        mention_id=mention_id, doc_id=doc_id, kind=kind,
        trigger=Span(sentence, start, end),
        args={role: Span(*span) for role, span in (args or {}).items()},
        gold_cluster=gold)


def make_doc(doc_id, sentences, mentions=(), topic_id=None, lemmas=None):
    """sentences: list of whitespace-joined strings."""
    sents = []
    for i, sent in enumerate(sentences):
        words = sent.split()
        lem = (lemmas or {}).get(i, [None] * len(words))
        sents.append(tuple(Token(w, l) for w, l in zip(words, lem)))
    return Document(doc_id=doc_id, sentences=tuple(sents),
                    mentions=tuple(mentions), topic_id=topic_id)


@pytest.fixture
def two_doc_corpus():
    """Two documents, two gold clusters and one singleton."""
    m1 = make_mention("d1_m0", "d1", 0, 2, 3, gold="quake",
                      args={"arg0": (0, 0, 1), "loc": (0, 4, 5)})
    m2 = make_mention("d1_m1", "d1", 1, 1, 2, gold="rescue")
    m3 = make_mention("d2_m0", "d2", 0, 2, 3, gold="quake",
                      args={"arg0": (0, 0, 1)})
    m4 = make_mention("d2_m1", "d2", 1, 0, 1, gold="fire")
    d1 = make_doc("d1", ["people here lost their homes", "the rescue began"],
                  [m1, m2], topic_id="t0")
    d2 = make_doc("d2", ["thousands more lost everything", "burned down town"],
                  [m3, m4], topic_id="t0")
    return Corpus((d1, d2), task="event", scope="cross_doc")
