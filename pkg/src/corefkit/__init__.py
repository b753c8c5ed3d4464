"""Event and entity coreference toolkit.

Pipeline pieces: corpus model and synthetic data, pluggable pair-context
token encoders, a trainable pairwise mention scorer with argument-aware
features, average-link agglomerative clustering with threshold tuning,
TF-IDF/k-means topic pre-clustering, and the standard coreference
metric suite (MUC, B-cubed, CEAF_e, BLANC, CoNLL F1, AVG-F).
"""

from .cluster import agglomerate, lemma_baseline, tune_threshold
from .corpus import (Corpus, CorpusParseError, CorpusValidationError,
                     Document, Mention, Span, Token, corpus_stats,
                     filter_by_topics, gen_synthetic, gold_partition,
                     load_corpus, save_corpus)
from .encoder import (EncoderConfig, PairSequence, TokenEmbeddings,
                      build_pair_sequence, encode, pool_span)
from .estimators import (AverageLinkClusterer, PairCoreferenceScorer,
                         TfidfKMeansTopics)
from .metrics import MetricReport, b3, blanc, ceaf_e, muc, report
from .pairrep import (LabeledPair, ModelParams, TrainConfig, TrainResult,
                      argument_weight_summary, enumerate_pairs, init_params,
                      loss_and_grads, pair_features, predict_scores,
                      predict_scores_grouped, role_pair_rep, score_pair,
                      train)
from .partition import (Partition, ScoreMatrix, merge_partitions,
                        read_partition, read_scores, write_partition,
                        write_scores)
from .premb import PrembFile, write_premb
from .topics import (DocVector, TopicAssignment, kmeans, predict_topics,
                     tfidf_vectors)

__version__ = "0.1.0"

__all__ = [
    "AverageLinkClusterer", "Corpus", "CorpusParseError",
    "CorpusValidationError", "DocVector", "Document", "EncoderConfig",
    "LabeledPair", "Mention", "MetricReport", "ModelParams",
    "PairCoreferenceScorer", "PairSequence", "Partition", "PrembFile",
    "ScoreMatrix", "Span", "TfidfKMeansTopics", "Token", "TokenEmbeddings",
    "TopicAssignment", "TrainConfig", "TrainResult", "agglomerate",
    "argument_weight_summary", "b3", "blanc", "build_pair_sequence",
    "ceaf_e", "corpus_stats", "encode",
    "enumerate_pairs", "filter_by_topics", "gen_synthetic", "gold_partition",
    "init_params", "kmeans", "lemma_baseline", "load_corpus",
    "loss_and_grads", "merge_partitions", "muc", "pair_features",
    "pool_span", "predict_scores", "predict_scores_grouped",
    "predict_topics", "read_partition", "read_scores", "report",
    "role_pair_rep", "save_corpus", "score_pair", "tfidf_vectors", "train",
    "tune_threshold", "write_partition", "write_premb", "write_scores",
]
