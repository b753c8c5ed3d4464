"""HuggingFace backend exercised with a tiny locally-built checkpoint
(random weights, handcrafted WordPiece vocab), so no downloads happen."""

import json

import numpy as np
import pytest

torch = pytest.importorskip("torch")
transformers = pytest.importorskip("transformers")

from premb_exporter.corpusio import read_corpus
from premb_exporter.encoders import HuggingFaceEncoder
from premb_exporter.export import ExportJob, run_export
from premb_exporter.sequence import build_pair_seq

VOCAB = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
         "quake", "##s", "hit", "town", "aid", "came", "lost", "many"]

CORPUS = "\n".join([
    json.dumps({
        "doc_id": "a", "topic_id": "t0",
        "sentences": [[{"text": "quakes"}, {"text": "hit"}, {"text": "town"}],
                      [{"text": "aid"}, {"text": "came"}]],
        "mentions": [
            {"mention_id": "a_m0", "kind": "event",
             "trigger": {"sentence": 0, "start": 0, "end": 1}},
            {"mention_id": "a_m1", "kind": "event",
             "trigger": {"sentence": 1, "start": 1, "end": 2}},
        ]}),
    json.dumps({
        "doc_id": "b", "topic_id": "t0",
        "sentences": [[{"text": "many"}, {"text": "lost"}]],
        "mentions": [
            {"mention_id": "b_m0", "kind": "event",
             "trigger": {"sentence": 0, "start": 1, "end": 2}},
        ]}),
])


@pytest.fixture(scope="module")
def checkpoint(tmp_path_factory):
    from tokenizers import Tokenizer, models, normalizers, pre_tokenizers

    tmp = tmp_path_factory.mktemp("tinybert")
    wordpiece = models.WordPiece({w: i for i, w in enumerate(VOCAB)},
                                 unk_token="[UNK]")
    tok = Tokenizer(wordpiece)
    tok.normalizer = normalizers.Lowercase()
    tok.pre_tokenizer = pre_tokenizers.Whitespace()
    tokenizer = transformers.PreTrainedTokenizerFast(
        tokenizer_object=tok, unk_token="[UNK]", pad_token="[PAD]",
        cls_token="[CLS]", sep_token="[SEP]", mask_token="[MASK]")
    config = transformers.BertConfig(
        vocab_size=len(VOCAB), hidden_size=12, num_hidden_layers=1,
        num_attention_heads=2, intermediate_size=24,
        max_position_embeddings=32)
    torch.manual_seed(0)
    model = transformers.BertModel(config)
    model_dir = tmp / "model"
    model.save_pretrained(model_dir)
    tokenizer.save_pretrained(model_dir)
    return model_dir


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    path = tmp_path_factory.mktemp("hfdata") / "corpus.jsonl"
    path.write_text(CORPUS + "\n")
    return path


class TestHuggingFaceAlignment:
    def test_single_subword_rows_equal_raw_hidden_states(self, checkpoint,
                                                         corpus):
        enc = HuggingFaceEncoder(str(checkpoint))
        index = read_corpus(corpus)
        seq = build_pair_seq(index.mention("a_m1"), index.mention("b_m0"),
                             index)  # "aid came" [SEP] "many lost"
        aligned, trace = enc.encode_with_trace(seq)
        assert aligned.shape == (5, enc.dim)
        own = trace.ownership
        for row in range(5):
            subs = trace.subword_vectors[own == row]
            assert subs.shape[0] == 1  # all vocab words, one piece each
            assert np.allclose(aligned[row], subs[0], atol=1e-6)

    def test_split_word_is_sum_of_subword_vectors(self, checkpoint, corpus):
        enc = HuggingFaceEncoder(str(checkpoint))
        index = read_corpus(corpus)
        seq = build_pair_seq(index.mention("a_m0"), index.mention("b_m0"),
                             index)  # "quakes hit town" [SEP] "many lost"
        aligned, trace = enc.encode_with_trace(seq)
        subs = trace.subword_vectors[trace.ownership == 0]
        assert subs.shape[0] == 2  # quake + ##s
        assert np.allclose(aligned[0], subs.sum(axis=0), atol=1e-5)

    def test_specials_dropped_and_separator_retained(self, checkpoint,
                                                     corpus):
        enc = HuggingFaceEncoder(str(checkpoint))
        index = read_corpus(corpus)
        seq = build_pair_seq(index.mention("a_m0"), index.mention("b_m0"),
                             index)
        aligned, trace = enc.encode_with_trace(seq)
        assert (trace.ownership == -1).sum() == 2  # [CLS] and final [SEP]
        sep_subs = trace.subword_vectors[trace.ownership == seq.sep_index]
        assert sep_subs.shape[0] == 1
        assert np.allclose(aligned[seq.sep_index], sep_subs[0], atol=1e-6)

    def test_conservation(self, checkpoint, corpus):
        enc = HuggingFaceEncoder(str(checkpoint))
        index = read_corpus(corpus)
        seq = build_pair_seq(index.mention("a_m0"), index.mention("a_m1"),
                             index)
        aligned, trace = enc.encode_with_trace(seq)
        keep = trace.ownership >= 0
        if trace.sep_row is not None:
            keep &= trace.ownership != trace.sep_row
            aligned = np.delete(aligned, trace.sep_row, axis=0)
        assert np.allclose(aligned.sum(axis=0),
                           trace.subword_vectors[keep].sum(axis=0),
                           atol=1e-3)

    def test_batched_equals_single(self, checkpoint, corpus):
        index = read_corpus(corpus)
        seqs = [build_pair_seq(index.mention(a), index.mention(b), index)
                for a, b in [("a_m0", "a_m1"), ("a_m0", "b_m0"),
                             ("a_m1", "b_m0")]]
        batched = HuggingFaceEncoder(str(checkpoint), batch_size=3)
        single = HuggingFaceEncoder(str(checkpoint), batch_size=1)
        for seq, (got, _), (want, _) in zip(
                seqs, batched.encode_batch_with_traces(seqs),
                single.encode_batch_with_traces(seqs)):
            assert np.allclose(got, want, atol=1e-5), seq.pair_id


class TestHuggingFaceExport:
    def test_export_round_trips_into_consumer(self, checkpoint, corpus,
                                              tmp_path):
        corefkit = pytest.importorskip("corefkit")
        out = tmp_path / "hf.premb"
        job = ExportJob(corpus_path=str(corpus), pairs="auto",
                        model=str(checkpoint), out_path=str(out),
                        scope="cross_doc")
        count = run_export(job)
        assert count == 3
        loaded = corefkit.PrembFile.load(out)
        assert loaded.dim == 12
        primary = corefkit.load_corpus(corpus, scope="cross_doc")
        for pair_id in loaded.pair_ids():
            id_i, id_j = pair_id.split("|")
            seq = corefkit.build_pair_sequence(primary.mention(id_i),
                                               primary.mention(id_j), primary)
            assert loaded.vectors(pair_id).shape == (len(seq), 12)

    def test_missing_model_reports_load_failure(self, tmp_path, corpus):
        from premb_exporter.encoders import ExportError
        job = ExportJob(corpus_path=str(corpus), pairs="auto",
                        model=str(tmp_path / "no-such-model"),
                        out_path=str(tmp_path / "x.premb"))
        with pytest.raises(ExportError, match="failed to load"):
            run_export(job)
