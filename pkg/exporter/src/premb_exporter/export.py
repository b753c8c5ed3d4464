"""Export orchestration: corpus -> pair sequences -> encoder -> PREMB."""

from dataclasses import dataclass

from .corpusio import read_corpus
from .encoders import load_encoder
from .pairs import auto_pairs, read_pairs
from .premb import write_premb
from .sequence import build_pair_seq


@dataclass(frozen=True)
class ExportJob:
    corpus_path: str
    pairs: str            # path to a pair records file, or "auto"
    model: str            # encoder identifier (or "hash[:dim]")
    out_path: str
    scope: str = "within_doc"   # used only by pairs="auto"
    device: str = "cpu"
    batch_size: int = 8


def run_export(job: ExportJob) -> int:
    """Write one PREMB record per pair; returns the record count."""
    corpus = read_corpus(job.corpus_path)
    if job.pairs == "auto":
        pair_ids = auto_pairs(corpus, scope=job.scope)
    else:
        pair_ids = read_pairs(job.pairs, corpus)
    encoder = load_encoder(job.model, device=job.device,
                           batch_size=job.batch_size)
    seqs = [build_pair_seq(corpus.mention(a), corpus.mention(b), corpus)
            for a, b in pair_ids]
    records = []
    for seq, (aligned, _) in zip(seqs, encoder.encode_batch_with_traces(seqs)):
        assert aligned.shape == (len(seq), encoder.dim)
        records.append((seq.pair_id, aligned))
    write_premb(job.out_path, encoder.dim, records)
    return len(records)
