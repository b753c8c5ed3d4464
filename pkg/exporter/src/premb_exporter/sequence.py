"""Concatenated sentence-pair sequences.

The consuming toolkit concatenates the two mentions' sentences with one
separator slot between them; when both mentions live in the same
sentence it appears once with no separator.  Sequence length and token
order here must match that construction exactly, since PREMB records
are validated against it position by position.
"""

from dataclasses import dataclass

from .corpusio import CorpusIndex, MentionRef


@dataclass(frozen=True)
class PairSeq:
    pair_id: str
    words_i: tuple[str, ...]
    words_j: tuple[str, ...] | None  # None when the sentence is shared

    @property
    def sep_index(self) -> int | None:
        return None if self.words_j is None else len(self.words_i)

    def __len__(self) -> int:
        if self.words_j is None:
            return len(self.words_i)
        return len(self.words_i) + 1 + len(self.words_j)


def build_pair_seq(mention_i: MentionRef, mention_j: MentionRef,
                   corpus: CorpusIndex) -> PairSeq:
    pair_id = f"{mention_i.mention_id}|{mention_j.mention_id}"
    same_sentence = (mention_i.doc_id == mention_j.doc_id
                     and mention_i.sentence == mention_j.sentence)
    words_i = corpus.sentence(mention_i)
    if same_sentence:
        return PairSeq(pair_id, words_i, None)
    return PairSeq(pair_id, words_i, corpus.sentence(mention_j))
