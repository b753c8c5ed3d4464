"""Estimator-style wrappers over the functional core.

These follow the scikit-learn idiom (constructor params mirrored by
``get_params``/``set_params``, ``fit`` returning ``self``, fitted state
in trailing-underscore attributes) so the pipeline composes the way the
rest of the ecosystem expects.  Inputs are corpora, score matrices and
partitions rather than feature arrays.
"""

from typing import Mapping, Optional, Sequence

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import cluster as _cluster
from . import pairrep, topics as _topics
from .corpus import Corpus
from .encoder import EncoderConfig
from .partition import Partition, ScoreMatrix, merge_partitions


class PairCoreferenceScorer(BaseEstimator):
    """Trainable pairwise coreference scorer.

    Parameters
    ----------
    encoder : {"synthetic", "file"}
        Token embedding backend; "file" reads a PREMB file at `premb_path`.
    dim, alpha, beta, window : synthetic-backend shape and context mixing.
    premb_path : path of the precomputed embedding file ("file" backend).
    learning_rate, epochs, batch_size, h1, h2, neg_keep_ratio, optimizer :
        training hyperparameters.
    seed : drives initialization, shuffling and negative subsampling.
    symmetrize : {"first", "mean"}
        Score each unordered pair once (smaller mention id first) or
        average both orders.

    Attributes
    ----------
    params_ : fitted model weights.
    epoch_losses_ : tuple of mean training losses per epoch.
    """

    def __init__(self, encoder="synthetic", dim=32, alpha=0.5, beta=0.25,
                 window=3, premb_path=None, learning_rate=1e-3, epochs=20,
                 batch_size=32, h1=128, h2=128, neg_keep_ratio=1.0,
                 optimizer="adam", seed=0, symmetrize="first"):
        self.encoder = encoder
        self.dim = dim
        self.alpha = alpha
        self.beta = beta
        self.window = window
        self.premb_path = premb_path
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.h1 = h1
        self.h2 = h2
        self.neg_keep_ratio = neg_keep_ratio
        self.optimizer = optimizer
        self.seed = seed
        self.symmetrize = symmetrize

    def encoder_config(self) -> EncoderConfig:
        return EncoderConfig(kind=self.encoder, dim=self.dim,
                             alpha=self.alpha, beta=self.beta,
                             window=self.window, path=self.premb_path)

    def _train_config(self) -> pairrep.TrainConfig:
        return pairrep.TrainConfig(
            seed=self.seed, learning_rate=self.learning_rate,
            epochs=self.epochs, batch_size=self.batch_size, h1=self.h1,
            h2=self.h2, neg_keep_ratio=self.neg_keep_ratio,
            optimizer=self.optimizer)

    def fit(self, corpus: Corpus,
            topics: Optional[Mapping[str, str]] = None) -> "PairCoreferenceScorer":
        """Train on all labeled pairs (gold topics unless given)."""
        result = pairrep.train(corpus, self.encoder_config(),
                               self._train_config(), topics=topics)
        self.params_ = result.params
        self.epoch_losses_ = result.epoch_losses
        return self

    def predict(self, corpus: Corpus,
                topics: Optional[Mapping[str, str]] = None,
                scope: Optional[str] = None) -> dict[str, ScoreMatrix]:
        """Score matrices per document or topic group."""
        check_is_fitted(self, "params_")
        return pairrep.predict_scores_grouped(
            corpus, self.params_, self.encoder_config(), scope=scope,
            topics=topics, symmetrize=self.symmetrize)


class AverageLinkClusterer(BaseEstimator):
    """Average-link agglomerative clusterer over score matrices.

    ``fit`` with a gold partition tunes the merge threshold on a 0.01
    grid for `objective`; without one it just adopts `threshold`.
    """

    def __init__(self, threshold=0.5, objective="conll_f1"):
        self.threshold = threshold
        self.objective = objective

    def fit(self, matrices: Sequence[ScoreMatrix],
            gold: Optional[Partition] = None) -> "AverageLinkClusterer":
        if gold is None:
            self.threshold_ = self.threshold
        else:
            self.threshold_ = _cluster.tune_threshold(
                list(matrices), gold, objective=self.objective)
        return self

    def predict(self, matrices: Sequence[ScoreMatrix]) -> Partition:
        check_is_fitted(self, "threshold_")
        return merge_partitions(
            _cluster.agglomerate(m, self.threshold_) for m in matrices)

    def fit_predict(self, matrices: Sequence[ScoreMatrix],
                    gold: Optional[Partition] = None) -> Partition:
        return self.fit(matrices, gold=gold).predict(matrices)


class TfidfKMeansTopics(BaseEstimator):
    """Topic pre-clustering: tf-idf n-grams, seeded k-means, silhouette
    selection of K in [2, k_max]."""

    def __init__(self, k_max=10, seed=0):
        self.k_max = k_max
        self.seed = seed

    def fit(self, corpus: Corpus) -> "TfidfKMeansTopics":
        self.assignment_ = _topics.predict_topics(corpus, self.k_max,
                                                  seed=self.seed)
        self.k_ = self.assignment_.k
        self.silhouette_ = self.assignment_.silhouette
        return self

    def predict(self, corpus: Corpus = None) -> dict[str, str]:
        check_is_fitted(self, "assignment_")
        return _topics.topic_labels(self.assignment_)

    def fit_predict(self, corpus: Corpus) -> dict[str, str]:
        return self.fit(corpus).predict()
