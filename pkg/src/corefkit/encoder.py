"""Sentence-pair sequences and pluggable token encoders.

A mention pair is encoded over the concatenation of its two sentences
(``tokens_i ++ [SEP] ++ tokens_j``); when both mentions share a sentence
it appears once, without a separator, so identical tokens stay
unambiguous.  Token vectors come from one of two backends:

* ``synthetic``: deterministic pseudo-embeddings hashed from token text,
  mixed with sequence context so a token's vector depends on the other
  sentence in the pair (cheap stand-in for a contextual encoder);
* ``file``: exact vectors from a PREMB file keyed by pair id, typically
  exported from a real pretrained encoder.

Span vectors are element-wise sums of token vectors.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .corpus import Corpus, Mention, Span
from .premb import PrembFile

SEPARATOR = "[SEP]"


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class EncoderConfig:
    """Backend selection plus synthetic-backend knobs.

    ``alpha`` weighs a whole-sequence mean into every position and
    ``beta`` a local mean over positions within ``window`` tokens; both
    at 0 make a token's vector a pure function of its own text.
    """

    kind: str = "synthetic"
    dim: int = 32
    alpha: float = 0.5
    beta: float = 0.25
    window: int = 3
    path: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ("synthetic", "file"):
            raise ValueError(f"unknown encoder kind {self.kind!r}")
        if self.kind == "file" and not self.path:
            raise ValueError("file encoder requires a path")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.window < 0:
            raise ValueError("window must be >= 0")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be >= 0")


@dataclass(frozen=True)
class PairSequence:
    """Concatenated token sequence for one ordered mention pair."""

    pair_id: str
    tokens: tuple[str, ...]
    sep_index: Optional[int]  # None when both mentions share a sentence
    doc_i: str
    sentence_i: int
    doc_j: str
    sentence_j: int
    offset_j: int  # position of sentence j's first token

    def __len__(self) -> int:
        return len(self.tokens)

    def map_i(self, span: Span) -> tuple[int, int]:
        if span.sentence != self.sentence_i:
            raise EncodingError(
                f"{self.pair_id}: span in sentence {span.sentence} cannot be "
                f"mapped (first mention's sentence is {self.sentence_i})")
        return span.start, span.end

    def map_j(self, span: Span) -> tuple[int, int]:
        if span.sentence != self.sentence_j:
            raise EncodingError(
                f"{self.pair_id}: span in sentence {span.sentence} cannot be "
                f"mapped (second mention's sentence is {self.sentence_j})")
        return span.start + self.offset_j, span.end + self.offset_j


@dataclass
class TokenEmbeddings:
    """One d-vector per sequence position."""

    vectors: np.ndarray  # (seq_len, dim) float64

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return self.vectors.shape[0]


def pair_id_for(mention_i: Mention, mention_j: Mention) -> str:
    return f"{mention_i.mention_id}|{mention_j.mention_id}"


def build_pair_sequence(mention_i: Mention, mention_j: Mention,
                        corpus: Corpus) -> PairSequence:
    """Concatenate the two mentions' sentences (order-sensitive pair id)."""
    doc_i = corpus.document(mention_i.doc_id)
    doc_j = corpus.document(mention_j.doc_id)
    sent_i = doc_i.sentences[mention_i.trigger.sentence]
    sent_j = doc_j.sentences[mention_j.trigger.sentence]
    pid = pair_id_for(mention_i, mention_j)
    same_sentence = (mention_i.doc_id == mention_j.doc_id
                     and mention_i.trigger.sentence == mention_j.trigger.sentence)
    if same_sentence:
        tokens = tuple(t.text for t in sent_i)
        sep_index = None
        offset_j = 0
    else:
        tokens = tuple(t.text for t in sent_i) + (SEPARATOR,) + \
            tuple(t.text for t in sent_j)
        sep_index = len(sent_i)
        offset_j = len(sent_i) + 1
    return PairSequence(
        pair_id=pid, tokens=tokens, sep_index=sep_index,
        doc_i=mention_i.doc_id, sentence_i=mention_i.trigger.sentence,
        doc_j=mention_j.doc_id, sentence_j=mention_j.trigger.sentence,
        offset_j=offset_j)


# ---------------------------------------------------------------------------
# Synthetic backend: FNV-1a text hash -> splitmix64 stream -> [-1, 1] floats.

_MASK64 = (1 << 64) - 1


def fnv1a64(text: str) -> int:
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * 0x100000001B3) & _MASK64
    return h


def _splitmix64_floats(seed: int, n: int) -> np.ndarray:
    out = np.empty(n)
    state = seed & _MASK64
    for k in range(n):
        state = (state + 0x9E3779B97F4A7C15) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        z = z ^ (z >> 31)
        # top 53 bits -> [-1, 1)
        out[k] = (z >> 11) * 2.0 ** -52 - 1.0
    return out


@lru_cache(maxsize=1 << 16)
def _token_base(text: str, dim: int) -> np.ndarray:
    vec = _splitmix64_floats(fnv1a64(text), dim)
    vec.setflags(write=False)
    return vec


class SyntheticEncoder:
    """Deterministic hash embeddings with global and windowed context."""

    def __init__(self, config: EncoderConfig):
        if config.kind != "synthetic":
            raise ValueError("SyntheticEncoder requires kind='synthetic'")
        self.config = config
        self.dim = config.dim

    def encode(self, seq: PairSequence) -> TokenEmbeddings:
        cfg = self.config
        base = np.stack([_token_base(t, cfg.dim) for t in seq.tokens])
        out = base.copy()
        if cfg.alpha:
            out += cfg.alpha * base.mean(axis=0)
        if cfg.beta:
            w = cfg.window
            n = len(base)
            cums = np.vstack([np.zeros((1, cfg.dim)), np.cumsum(base, axis=0)])
            lo = np.maximum(np.arange(n) - w, 0)
            hi = np.minimum(np.arange(n) + w + 1, n)
            local = (cums[hi] - cums[lo]) / (hi - lo)[:, None]
            out += cfg.beta * local
        return TokenEmbeddings(out)


class FileEncoder:
    """Exact pass-through of vectors stored in a PREMB file."""

    def __init__(self, path):
        self._file = PrembFile.load(path)
        self.dim = self._file.dim

    def encode(self, seq: PairSequence) -> TokenEmbeddings:
        if seq.pair_id not in self._file:
            raise EncodingError(
                f"pair id {seq.pair_id!r} missing from {self._file.path}")
        stored = self._file.vectors(seq.pair_id)
        if stored.shape[0] != len(seq):
            raise EncodingError(
                f"{seq.pair_id}: stored seq_len {stored.shape[0]} != "
                f"sequence length {len(seq)}")
        return TokenEmbeddings(stored.astype(np.float64))


@lru_cache(maxsize=8)
def make_encoder(config: EncoderConfig):
    if config.kind == "synthetic":
        return SyntheticEncoder(config)
    return FileEncoder(config.path)


def encode(seq: PairSequence, config: EncoderConfig) -> TokenEmbeddings:
    """Encode a pair sequence with the configured backend."""
    return make_encoder(config).encode(seq)


def pool_span(embeddings: TokenEmbeddings, span: tuple[int, int]) -> np.ndarray:
    """Element-wise sum of the token vectors in [start, end)."""
    start, end = span
    if not (0 <= start < end <= len(embeddings)):
        raise EncodingError(
            f"span ({start}, {end}) out of bounds for sequence of "
            f"length {len(embeddings)}")
    return embeddings.vectors[start:end].sum(axis=0)
