"""Encoder backends and subword-to-token alignment.

Both backends produce one vector per subword of the assembled sequence
plus an ownership map saying which output row (corpus token position or
separator slot) each subword belongs to; begin/end special tokens own no
row and are dropped.  A token split into several subwords gets their
element-wise sum, matching the span-pooling convention downstream.

Backends:

* ``HuggingFaceEncoder``: any transformers checkpoint; contextual
  vectors from the full assembled sequence.
* ``HashEncoder``: deterministic, dependency-free stand-in that chunks
  words into 4-character subwords and hashes them to vectors; used for
  offline tests and dry runs of the export plumbing.

Model identifiers: ``hash:<dim>`` selects the hash backend, anything
else is passed to ``transformers.AutoModel``.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .sequence import PairSeq


class ExportError(RuntimeError):
    pass


class MisalignmentError(ExportError):
    pass


@dataclass
class SubwordTrace:
    """Diagnostic view of one encoded pair, for conservation checks."""

    subword_vectors: np.ndarray  # (n_subwords, dim) float32
    ownership: np.ndarray        # (n_subwords,) row index, -1 for specials
    sep_row: int | None


def align_subwords(trace: SubwordTrace, out_len: int, pair_id: str) -> np.ndarray:
    """Sum subword vectors into their owning rows; every row must own
    at least one subword."""
    dim = trace.subword_vectors.shape[1]
    rows = np.zeros((out_len, dim), dtype=np.float32)
    counts = np.zeros(out_len, dtype=int)
    for vec, own in zip(trace.subword_vectors, trace.ownership):
        if own < 0:
            continue
        if own >= out_len:
            raise MisalignmentError(
                f"{pair_id}: subword assigned to row {own} beyond "
                f"sequence length {out_len}")
        rows[own] += vec
        counts[own] += 1
    if (counts == 0).any():
        empty = int(np.flatnonzero(counts == 0)[0])
        raise MisalignmentError(
            f"{pair_id}: no subwords aligned to position {empty}")
    return rows


def _rows_of(seq: PairSeq) -> list[tuple[str, int, bool]]:
    """(word, output row, is_separator) triples in sequence order."""
    rows = [(w, k, False) for k, w in enumerate(seq.words_i)]
    if seq.words_j is not None:
        sep = len(seq.words_i)
        rows.append(("", sep, True))
        rows.extend((w, sep + 1 + k, False)
                    for k, w in enumerate(seq.words_j))
    return rows


class HuggingFaceEncoder:
    def __init__(self, model_id: str, device: str = "cpu",
                 batch_size: int = 8):
        try:
            import torch
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:
            raise ExportError(
                f"transformers/torch required for model {model_id!r}: {exc}")
        self._torch = torch
        try:
            self.tokenizer = AutoTokenizer.from_pretrained(model_id)
            self.model = AutoModel.from_pretrained(model_id)
        except Exception as exc:
            raise ExportError(f"failed to load model {model_id!r}: {exc}")
        self.model.to(device)
        self.model.eval()
        self.device = device
        self.batch_size = batch_size
        self.dim = int(self.model.config.hidden_size)
        tok = self.tokenizer
        self._bos = tok.cls_token_id if tok.cls_token_id is not None \
            else tok.bos_token_id
        self._eos = tok.sep_token_id if tok.sep_token_id is not None \
            else tok.eos_token_id
        self._sep = self._eos
        if self._sep is None:
            raise ExportError(f"tokenizer of {model_id!r} has no separator "
                              "or end-of-sequence token")
        self._pad = tok.pad_token_id if tok.pad_token_id is not None else 0

    def _word_ids(self, word: str, first_in_sentence: bool) -> list[int]:
        # mid-sentence words carry a leading space so BPE vocabularies
        # see their usual word-boundary form
        text = word if first_in_sentence else " " + word
        return self.tokenizer.encode(text, add_special_tokens=False)

    def _plan(self, seq: PairSeq) -> tuple[list[int], list[int]]:
        ids: list[int] = []
        ownership: list[int] = []
        if self._bos is not None:
            ids.append(self._bos)
            ownership.append(-1)
        sentence_start = {0}
        if seq.words_j is not None:
            sentence_start.add(len(seq.words_i) + 1)
        for word, row, is_sep in _rows_of(seq):
            if is_sep:
                ids.append(self._sep)
                ownership.append(row)
                continue
            word_ids = self._word_ids(word, row in sentence_start)
            if not word_ids:
                raise MisalignmentError(
                    f"{seq.pair_id}: token {word!r} produced no subwords")
            ids.extend(word_ids)
            ownership.extend([row] * len(word_ids))
        if self._eos is not None:
            ids.append(self._eos)
            ownership.append(-1)
        return ids, ownership

    def encode_with_trace(self, seq: PairSeq) -> tuple[np.ndarray, SubwordTrace]:
        [(aligned, trace)] = self.encode_batch_with_traces([seq])
        return aligned, trace

    def encode_batch_with_traces(self, seqs: Sequence[PairSeq]):
        torch = self._torch
        out = []
        for start in range(0, len(seqs), self.batch_size):
            chunk = seqs[start:start + self.batch_size]
            plans = [self._plan(s) for s in chunk]
            width = max(len(ids) for ids, _ in plans)
            batch = torch.full((len(chunk), width), self._pad,
                               dtype=torch.long)
            mask = torch.zeros((len(chunk), width), dtype=torch.long)
            for r, (ids, _) in enumerate(plans):
                batch[r, :len(ids)] = torch.tensor(ids, dtype=torch.long)
                mask[r, :len(ids)] = 1
            with torch.no_grad():
                hidden = self.model(
                    input_ids=batch.to(self.device),
                    attention_mask=mask.to(self.device),
                ).last_hidden_state.cpu().numpy().astype(np.float32)
            for r, (seq, (ids, ownership)) in enumerate(zip(chunk, plans)):
                trace = SubwordTrace(
                    subword_vectors=hidden[r, :len(ids)],
                    ownership=np.array(ownership),
                    sep_row=seq.sep_index)
                out.append((align_subwords(trace, len(seq), seq.pair_id),
                            trace))
        return out

    def encode_pair(self, seq: PairSeq) -> np.ndarray:
        return self.encode_with_trace(seq)[0]


_MASK64 = (1 << 64) - 1


def _hash_vector(text: str, dim: int) -> np.ndarray:
    state = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        state = ((state ^ byte) * 0x100000001B3) & _MASK64
    out = np.empty(dim, dtype=np.float32)
    for k in range(dim):
        state = (state + 0x9E3779B97F4A7C15) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        z ^= z >> 31
        out[k] = (z >> 11) * 2.0 ** -52 - 1.0
    return out


class HashEncoder:
    """Deterministic offline backend with a toy 4-character subword split."""

    BOS, EOS, SEP = "<s>", "</s>", "<sep>"

    def __init__(self, dim: int = 16, batch_size: int = 8):
        self.dim = dim
        self.batch_size = batch_size

    def subwords(self, word: str) -> list[str]:
        parts = [word[k:k + 4] for k in range(0, len(word), 4)]
        # mark continuations so "abcd"+"ef" differs from "abcdef" split
        return [parts[0]] + [f"##{p}" for p in parts[1:]]

    def encode_with_trace(self, seq: PairSeq) -> tuple[np.ndarray, SubwordTrace]:
        texts: list[str] = [self.BOS]
        ownership: list[int] = [-1]
        for word, row, is_sep in _rows_of(seq):
            if is_sep:
                texts.append(self.SEP)
                ownership.append(row)
                continue
            if not word:
                raise MisalignmentError(
                    f"{seq.pair_id}: empty token at row {row}")
            parts = self.subwords(word)
            texts.extend(parts)
            ownership.extend([row] * len(parts))
        texts.append(self.EOS)
        ownership.append(-1)
        trace = SubwordTrace(
            subword_vectors=np.stack([_hash_vector(t, self.dim)
                                      for t in texts]),
            ownership=np.array(ownership),
            sep_row=seq.sep_index)
        return align_subwords(trace, len(seq), seq.pair_id), trace

    def encode_batch_with_traces(self, seqs: Sequence[PairSeq]):
        return [self.encode_with_trace(s) for s in seqs]

    def encode_pair(self, seq: PairSeq) -> np.ndarray:
        return self.encode_with_trace(seq)[0]


def load_encoder(model_id: str, device: str = "cpu", batch_size: int = 8):
    if model_id.startswith("hash:"):
        return HashEncoder(dim=int(model_id.split(":", 1)[1]),
                           batch_size=batch_size)
    if model_id == "hash":
        return HashEncoder(batch_size=batch_size)
    return HuggingFaceEncoder(model_id, device=device, batch_size=batch_size)
