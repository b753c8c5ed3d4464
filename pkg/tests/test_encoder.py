import numpy as np
import pytest

from corefkit.corpus import Corpus
from corefkit.encoder import (EncoderConfig, EncodingError, SEPARATOR,
                              TokenEmbeddings, build_pair_sequence, encode,
                              fnv1a64, pool_span)
from corefkit.premb import PrembFile, PrembFormatError, write_premb

from conftest import make_doc, make_mention


@pytest.fixture
def corpus():
    m0 = make_mention("a_m0", "a", 0, 2, 4)          # sentence length 5
    m1 = make_mention("b_m0", "b", 0, 2, 4)          # sentence length 7
    m2 = make_mention("a_m1", "a", 1, 0, 1)          # shares doc a
    m3 = make_mention("a_m2", "a", 1, 4, 5)          # same sentence as m2
    docs = (
        make_doc("a", ["w0 w1 w2 w3 w4", "u0 u1 u2 u3 u4 u5"], [m0, m2, m3]),
        make_doc("b", ["v0 v1 v2 v3 v4 v5 v6"], [m1]),
    )
    return Corpus(docs)


class TestPairSequence:
    def test_cross_sentence_concatenation(self, corpus):
        seq = build_pair_sequence(corpus.mention("a_m0"),
                                  corpus.mention("b_m0"), corpus)
        assert len(seq) == 13
        assert seq.sep_index == 5
        assert seq.tokens[5] == SEPARATOR
        assert seq.pair_id == "a_m0|b_m0"

    def test_same_sentence_no_separator(self, corpus):
        seq = build_pair_sequence(corpus.mention("a_m1"),
                                  corpus.mention("a_m2"), corpus)
        assert len(seq) == 6
        assert seq.sep_index is None
        assert SEPARATOR not in seq.tokens
        span = corpus.mention("a_m2").trigger
        assert seq.map_j(span) == (4, 5)

    def test_second_side_offset_arithmetic(self, corpus):
        seq = build_pair_sequence(corpus.mention("a_m0"),
                                  corpus.mention("b_m0"), corpus)
        span = corpus.mention("b_m0").trigger
        assert seq.map_j(span) == (8, 10)
        assert seq.map_i(corpus.mention("a_m0").trigger) == (2, 4)

    def test_mapping_wrong_sentence_fails(self, corpus):
        seq = build_pair_sequence(corpus.mention("a_m0"),
                                  corpus.mention("b_m0"), corpus)
        other = corpus.mention("a_m1").trigger  # sentence 1, not in pair
        with pytest.raises(EncodingError):
            seq.map_i(other)


class TestSyntheticEncoder:
    def test_deterministic(self, corpus):
        seq = build_pair_sequence(corpus.mention("a_m0"),
                                  corpus.mention("b_m0"), corpus)
        cfg = EncoderConfig()
        e1, e2 = encode(seq, cfg), encode(seq, cfg)
        assert np.array_equal(e1.vectors, e2.vectors)
        assert e1.vectors.shape == (13, cfg.dim)
        assert np.isfinite(e1.vectors).all()

    def test_alpha_beta_zero_is_context_free(self, corpus):
        cfg = EncoderConfig(alpha=0.0, beta=0.0, dim=8)
        seq1 = build_pair_sequence(corpus.mention("a_m0"),
                                   corpus.mention("b_m0"), corpus)
        seq2 = build_pair_sequence(corpus.mention("a_m0"),
                                   corpus.mention("a_m1"), corpus)
        e1, e2 = encode(seq1, cfg), encode(seq2, cfg)
        # token "w2" appears at position 2 in both sequences
        assert np.array_equal(e1.vectors[2], e2.vectors[2])
        # and equal tokens anywhere get equal vectors
        assert np.array_equal(e1.vectors[0], e2.vectors[0])

    def test_context_mixing_shifts_vectors_across_pairs(self, corpus):
        cfg = EncoderConfig(alpha=0.5, beta=0.25, dim=16)
        seq1 = build_pair_sequence(corpus.mention("a_m0"),
                                   corpus.mention("b_m0"), corpus)
        seq2 = build_pair_sequence(corpus.mention("a_m0"),
                                   corpus.mention("a_m1"), corpus)
        e1, e2 = encode(seq1, cfg), encode(seq2, cfg)
        # same token, different pair context -> different vector
        assert not np.array_equal(e1.vectors[2], e2.vectors[2])

    def test_hash_is_reference_fnv1a(self):
        # reference values for the 64-bit FNV-1a parameters
        assert fnv1a64("") == 0xCBF29CE484222325
        assert fnv1a64("a") == 0xAF63DC4C8601EC8C


class TestPooling:
    def test_single_token_identity(self):
        e = TokenEmbeddings(np.array([[1.0, 2.0], [3.0, 4.0]]))
        assert np.array_equal(pool_span(e, (1, 2)), [3.0, 4.0])

    def test_sum_of_two(self):
        e = TokenEmbeddings(np.array([[1.0, 2.0], [3.0, 4.0]]))
        assert np.array_equal(pool_span(e, (0, 2)), [4.0, 6.0])

    def test_additive_over_adjacent_spans(self):
        rng = np.random.default_rng(0)
        e = TokenEmbeddings(rng.normal(size=(7, 4)))
        whole = pool_span(e, (1, 6))
        parts = pool_span(e, (1, 3)) + pool_span(e, (3, 6))
        assert np.allclose(whole, parts)

    def test_out_of_bounds(self):
        e = TokenEmbeddings(np.zeros((3, 2)))
        with pytest.raises(EncodingError):
            pool_span(e, (2, 5))
        with pytest.raises(EncodingError):
            pool_span(e, (2, 2))


class TestPrembRoundTrip:
    def test_write_read_exact(self, tmp_path):
        rng = np.random.default_rng(1)
        records = {
            "a_m0|b_m0": rng.normal(size=(13, 8)).astype(np.float32),
            "a_m1|a_m2": rng.normal(size=(6, 8)).astype(np.float32),
        }
        path = tmp_path / "emb.premb"
        write_premb(path, 8, records)
        loaded = PrembFile.load(path)
        assert loaded.dim == 8
        assert loaded.pair_ids() == sorted(records)
        for pid, vecs in records.items():
            assert np.array_equal(loaded.vectors(pid), vecs)

    def test_file_encoder_returns_stored_vectors(self, tmp_path, corpus):
        seq = build_pair_sequence(corpus.mention("a_m0"),
                                  corpus.mention("b_m0"), corpus)
        rng = np.random.default_rng(2)
        stored = rng.normal(size=(len(seq), 4)).astype(np.float32)
        path = tmp_path / "e.premb"
        write_premb(path, 4, {seq.pair_id: stored})
        cfg = EncoderConfig(kind="file", path=str(path))
        out = encode(seq, cfg)
        assert np.array_equal(out.vectors, stored.astype(np.float64))

    def test_missing_pair_and_bad_seq_len(self, tmp_path, corpus):
        seq = build_pair_sequence(corpus.mention("a_m0"),
                                  corpus.mention("b_m0"), corpus)
        path = tmp_path / "e.premb"
        write_premb(path, 4, {"other|pair": np.zeros((3, 4), np.float32),
                              seq.pair_id: np.zeros((2, 4), np.float32)})
        cfg = EncoderConfig(kind="file", path=str(path))
        with pytest.raises(EncodingError, match="seq_len"):
            encode(seq, cfg)
        seq2 = build_pair_sequence(corpus.mention("b_m0"),
                                   corpus.mention("a_m0"), corpus)
        with pytest.raises(EncodingError, match="missing"):
            encode(seq2, cfg)

    def test_unsorted_file_rejected(self, tmp_path):
        path = tmp_path / "bad.premb"
        write_premb(path, 2, {"b": np.zeros((1, 2), np.float32),
                              "a": np.zeros((1, 2), np.float32)})
        blob = path.read_bytes()
        # swap the two sorted records back out of order
        rec_a = blob[19:19 + 2 + 1 + 4 + 8]
        rec_b = blob[19 + 15:]
        path.write_bytes(blob[:19] + rec_b + rec_a)
        with pytest.raises(PrembFormatError, match="sorted"):
            PrembFile.load(path)

    def test_truncated_and_bad_magic(self, tmp_path):
        path = tmp_path / "t.premb"
        write_premb(path, 2, {"a": np.zeros((2, 2), np.float32)})
        blob = path.read_bytes()
        path.write_bytes(blob[:-3])
        with pytest.raises(PrembFormatError, match="truncated"):
            PrembFile.load(path)
        path.write_bytes(b"NOTPREMB" + blob)
        with pytest.raises(PrembFormatError, match="magic"):
            PrembFile.load(path)
