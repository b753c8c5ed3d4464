"""Pairwise mention scoring head and its training loop.

A mention pair is represented role by role: for vectors u, v pooled from
the pair's token embeddings, the role representation is the
concatenation [u, v, u*v] (elementwise product).  The trigger block is
kept whole; each of the four argument roles (arg0, arg1, loc, time) is
squeezed through a small shared MLP into one match scalar, and a role
missing on either side pools to the zero vector first.  Event pairs are
classified from [trigger block, four scalars], entity pairs from the
trigger block alone; the classifier emits two logits whose softmax
component 0 is the coreference probability.

Training is plain minibatch cross-entropy with analytic gradients
(checked against finite differences in the test suite), Xavier-uniform
initialization, and a seeded, single-threaded loop so runs replay
exactly.
"""

import struct
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .corpus import ARG_ROLES, CROSS_DOC, ENTITY, EVENT, WITHIN_DOC, Corpus, Mention
from .encoder import (EncoderConfig, PairSequence, TokenEmbeddings,
                      build_pair_sequence, make_encoder, pool_span)
from .partition import ScoreMatrix

MODEL_MAGIC = b"PRLM1\n"
ADAM_BETA1, ADAM_BETA2, ADAM_EPS = 0.9, 0.999, 1e-8


class TrainingError(RuntimeError):
    pass


@dataclass
class Mlp:
    """One hidden ReLU layer, linear output."""

    w1: np.ndarray  # (hidden, in)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (out, hidden)
    b2: np.ndarray  # (out,)

    def forward(self, x: np.ndarray) -> np.ndarray:
        z1 = x @ self.w1.T + self.b1
        return np.maximum(z1, 0.0) @ self.w2.T + self.b2

    def arrays(self) -> list[np.ndarray]:
        return [self.w1, self.b1, self.w2, self.b2]

    def zeros_like(self) -> "Mlp":
        return Mlp(*[np.zeros_like(a) for a in self.arrays()])


@dataclass
class ModelParams:
    """Scorer weights: shared argument MLP and the pair classifier."""

    dim: int
    h1: int
    h2: int
    kind: str  # event | entity
    mlp1: Mlp  # (3*dim) -> h1 -> 1, shared by the four argument roles
    mlp2: Mlp  # (3*dim + 4) or (3*dim) -> h2 -> 2

    def arrays(self) -> list[np.ndarray]:
        return self.mlp1.arrays() + self.mlp2.arrays()

    def zeros_like(self) -> "ModelParams":
        return ModelParams(self.dim, self.h1, self.h2, self.kind,
                           self.mlp1.zeros_like(), self.mlp2.zeros_like())

    def copy(self) -> "ModelParams":
        return ModelParams(self.dim, self.h1, self.h2, self.kind,
                           Mlp(*[a.copy() for a in self.mlp1.arrays()]),
                           Mlp(*[a.copy() for a in self.mlp2.arrays()]))

    def save(self, path) -> None:
        """PRLM1 file: header then float32 arrays in declaration order."""
        kind_byte = 0 if self.kind == EVENT else 1
        with open(path, "wb") as f:
            f.write(MODEL_MAGIC)
            f.write(struct.pack("<IIIB", self.dim, self.h1, self.h2, kind_byte))
            for a in self.arrays():
                f.write(np.ascontiguousarray(a, dtype="<f4").tobytes())

    @classmethod
    def load(cls, path) -> "ModelParams":
        with open(path, "rb") as f:
            blob = f.read()
        if not blob.startswith(MODEL_MAGIC):
            raise ValueError(f"{path}: bad magic, not a scorer model file")
        off = len(MODEL_MAGIC)
        dim, h1, h2, kind_byte = struct.unpack_from("<IIIB", blob, off)
        off += 13
        kind = EVENT if kind_byte == 0 else ENTITY
        in2 = 3 * dim + (4 if kind == EVENT else 0)
        shapes = [(h1, 3 * dim), (h1,), (1, h1), (1,),
                  (h2, in2), (h2,), (2, h2), (2,)]
        arrays = []
        for shape in shapes:
            n = int(np.prod(shape))
            raw = blob[off:off + 4 * n]
            if len(raw) != 4 * n:
                raise ValueError(f"{path}: truncated model file")
            arrays.append(np.frombuffer(raw, dtype="<f4").astype(np.float64)
                          .reshape(shape))
            off += 4 * n
        if off != len(blob):
            raise ValueError(f"{path}: {len(blob) - off} trailing bytes")
        return cls(dim, h1, h2, kind, Mlp(*arrays[:4]), Mlp(*arrays[4:]))


def _xavier(rng: np.random.Generator, out_dim: int, in_dim: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (in_dim + out_dim))
    return rng.uniform(-limit, limit, size=(out_dim, in_dim))


def init_params(dim: int, h1: int, h2: int, kind: str, seed: int) -> ModelParams:
    """Xavier-uniform weights, zero biases, from the given seed."""
    if kind not in (EVENT, ENTITY):
        raise ValueError(f"bad kind {kind!r}")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    in2 = 3 * dim + (4 if kind == EVENT else 0)
    mlp1 = Mlp(_xavier(rng, h1, 3 * dim), np.zeros(h1),
               _xavier(rng, 1, h1), np.zeros(1))
    mlp2 = Mlp(_xavier(rng, h2, in2), np.zeros(h2),
               _xavier(rng, 2, h2), np.zeros(2))
    return ModelParams(dim, h1, h2, kind, mlp1, mlp2)


def role_pair_rep(v_i: np.ndarray, v_j: np.ndarray) -> np.ndarray:
    """[v_i, v_j, v_i * v_j] concatenation for one role."""
    v_i = np.asarray(v_i, dtype=np.float64)
    v_j = np.asarray(v_j, dtype=np.float64)
    if v_i.shape != v_j.shape or v_i.ndim != 1:
        raise ValueError(f"role vectors must share one dimension, "
                         f"got {v_i.shape} and {v_j.shape}")
    return np.concatenate([v_i, v_j, v_i * v_j])


@dataclass
class PairFeatures:
    """Eagerly pooled pair representation for one ordered mention pair.

    ``role_reps`` keeps the raw role blocks (one row per argument role)
    so training can differentiate through the argument scalars; for
    entity pairs both argument fields are None.
    """

    kind: str
    trigger_rep: np.ndarray               # (3*dim,)
    role_reps: Optional[np.ndarray]       # (4, 3*dim) ordered as ARG_ROLES
    arg_scores: Optional[np.ndarray]      # (4,) match scalars

    @property
    def dim(self) -> int:
        return self.trigger_rep.shape[0] // 3


def _pooled_or_zero(mention: Mention, role: str, embeddings: TokenEmbeddings,
                    mapper) -> np.ndarray:
    span = mention.args.get(role)
    if span is None:
        return np.zeros(embeddings.dim)
    return pool_span(embeddings, mapper(span))


def pair_features(mention_i: Mention, mention_j: Mention,
                  embeddings: TokenEmbeddings, seq: PairSequence,
                  params: ModelParams) -> PairFeatures:
    """Pool trigger and argument spans into the pair representation."""
    if mention_i.kind != mention_j.kind:
        raise ValueError(f"cannot pair a {mention_i.kind} mention with a "
                         f"{mention_j.kind} mention")
    kind = mention_i.kind
    if kind != params.kind:
        raise ValueError(f"{kind} pair scored with a {params.kind} model")
    if embeddings.dim != params.dim:
        raise ValueError(f"embedding dim {embeddings.dim} != model dim "
                         f"{params.dim}")
    v_i = pool_span(embeddings, seq.map_i(mention_i.trigger))
    v_j = pool_span(embeddings, seq.map_j(mention_j.trigger))
    trigger_rep = role_pair_rep(v_i, v_j)
    if kind == ENTITY:
        return PairFeatures(kind, trigger_rep, None, None)
    role_reps = np.stack([
        role_pair_rep(
            _pooled_or_zero(mention_i, role, embeddings, seq.map_i),
            _pooled_or_zero(mention_j, role, embeddings, seq.map_j))
        for role in ARG_ROLES])
    arg_scores = params.mlp1.forward(role_reps)[:, 0]
    return PairFeatures(kind, trigger_rep, role_reps, arg_scores)


def _classifier_input(features: PairFeatures, params: ModelParams) -> np.ndarray:
    if features.kind == ENTITY:
        return features.trigger_rep
    arg_scores = params.mlp1.forward(features.role_reps)[:, 0]
    return np.concatenate([features.trigger_rep, arg_scores])


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def score_pair(features: PairFeatures, params: ModelParams) -> float:
    """Coreference probability: softmax component 0 of the classifier."""
    if features.kind != params.kind:
        raise ValueError(f"{features.kind} features scored with a "
                         f"{params.kind} model")
    logits = params.mlp2.forward(_classifier_input(features, params)[None, :])
    return float(_softmax(logits)[0, 0])


def loss_and_grads(batch: Sequence[tuple[PairFeatures, int]],
                   params: ModelParams) -> tuple[float, ModelParams]:
    """Mean cross-entropy over the batch and gradients for every weight.

    Argument scalars are recomputed from the stored role blocks, so the
    gradient flows through the shared argument MLP into the classifier.
    """
    if not batch:
        raise ValueError("empty batch")
    kinds = {f.kind for f, _ in batch}
    if len(kinds) > 1:
        raise ValueError("mixed event/entity batch")
    is_event = kinds.pop() == EVENT
    n = len(batch)
    xt = np.stack([f.trigger_rep for f, _ in batch])
    labels = np.array([y for _, y in batch])
    if not np.isin(labels, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    # Coreferent pairs (label 1) sit at softmax index 0.
    targets = 1 - labels

    m1, m2 = params.mlp1, params.mlp2
    grads = params.zeros_like()
    if is_event:
        roles = np.stack([f.role_reps for f, _ in batch])  # (n, 4, 3d)
        a_in = roles.reshape(4 * n, -1)
        z1 = a_in @ m1.w1.T + m1.b1
        a1 = np.maximum(z1, 0.0)
        scalars = (a1 @ m1.w2.T + m1.b2).reshape(n, 4)
        x2 = np.hstack([xt, scalars])
    else:
        x2 = xt
    z2 = x2 @ m2.w1.T + m2.b1
    h = np.maximum(z2, 0.0)
    logits = h @ m2.w2.T + m2.b2
    logp = logits - _logsumexp(logits)
    example_losses = -logp[np.arange(n), targets]
    bad = np.flatnonzero(~np.isfinite(example_losses))
    if bad.size:
        raise TrainingError(f"non-finite loss at batch example {bad[0]}")
    loss = float(example_losses.mean())

    dlogits = np.exp(logp)
    dlogits[np.arange(n), targets] -= 1.0
    dlogits /= n
    grads.mlp2.w2[:] = dlogits.T @ h
    grads.mlp2.b2[:] = dlogits.sum(axis=0)
    dh = dlogits @ m2.w2
    dz2 = dh * (z2 > 0)
    grads.mlp2.w1[:] = dz2.T @ x2
    grads.mlp2.b1[:] = dz2.sum(axis=0)
    if is_event:
        dscalars = (dz2 @ m2.w1)[:, xt.shape[1]:]
        ds = dscalars.reshape(4 * n, 1)
        grads.mlp1.w2[:] = ds.T @ a1
        grads.mlp1.b2[:] = ds.sum(axis=0)
        da1 = ds @ m1.w2
        dz1 = da1 * (z1 > 0)
        grads.mlp1.w1[:] = dz1.T @ a_in
        grads.mlp1.b1[:] = dz1.sum(axis=0)
    return loss, grads


def _logsumexp(logits: np.ndarray) -> np.ndarray:
    m = logits.max(axis=-1, keepdims=True)
    return m + np.log(np.exp(logits - m).sum(axis=-1, keepdims=True))


def argument_weight_summary(params: ModelParams) -> dict[str, float]:
    """Debug view of how much each argument role sways the classifier.

    The classifier's last four inputs are the role match scalars; this
    reports the mean absolute first-layer weight attached to each.
    """
    if params.kind != EVENT:
        raise ValueError("argument weights exist only for event models")
    columns = params.mlp2.w1[:, 3 * params.dim:]
    return {role: float(np.abs(columns[:, k]).mean())
            for k, role in enumerate(ARG_ROLES)}


# ---------------------------------------------------------------------------
# Pair enumeration and training


@dataclass(frozen=True)
class LabeledPair:
    mention_i: str
    mention_j: str
    label: int


@dataclass(frozen=True)
class TrainConfig:
    seed: int
    learning_rate: float = 1e-3
    epochs: int = 20
    batch_size: int = 32
    h1: int = 128
    h2: int = 128
    neg_keep_ratio: float = 1.0
    optimizer: str = "adam"

    def __post_init__(self):
        if self.learning_rate <= 0 or self.batch_size < 1:
            raise ValueError("learning_rate and batch_size must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.h1 < 1 or self.h2 < 1:
            raise ValueError("hidden widths must be >= 1")
        if not 0.0 < self.neg_keep_ratio <= 1.0:
            raise ValueError("neg_keep_ratio must be in (0, 1]")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


def _grouped_mentions(corpus: Corpus, scope: str,
                      topics: Optional[Mapping[str, str]]) -> dict[str, list[Mention]]:
    """Mentions of the corpus task, grouped by document or topic."""
    groups: dict[str, list[Mention]] = {}
    for doc in corpus.documents:
        if scope == WITHIN_DOC:
            key = doc.doc_id
        else:
            if topics is None or doc.doc_id not in topics:
                raise ValueError(f"no topic assigned to document "
                                 f"{doc.doc_id!r} (required for cross_doc)")
            key = topics[doc.doc_id]
        for m in doc.mentions:
            if m.kind == corpus.task:
                groups.setdefault(key, []).append(m)
    for members in groups.values():
        members.sort(key=lambda m: m.mention_id)
    return dict(sorted(groups.items()))


def enumerate_pairs(corpus: Corpus, scope: str,
                    topics: Optional[Mapping[str, str]],
                    cfg: TrainConfig) -> list[LabeledPair]:
    """All unordered same-group mention pairs with gold labels.

    Negatives are kept with probability ``neg_keep_ratio`` (an exact
    deterministic subsample driven by the config seed).
    """
    pairs: list[LabeledPair] = []
    for _, members in _grouped_mentions(corpus, scope, topics).items():
        for i, a in enumerate(members):
            for b in members[i + 1:]:
                same = (a.gold_cluster is not None
                        and a.gold_cluster == b.gold_cluster)
                pairs.append(LabeledPair(a.mention_id, b.mention_id,
                                         int(same)))
    if cfg.neg_keep_ratio < 1.0:
        negatives = [k for k, p in enumerate(pairs) if p.label == 0]
        keep_n = int(round(cfg.neg_keep_ratio * len(negatives)))
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 2]))
        kept = set(rng.permutation(len(negatives))[:keep_n])
        drop = {negatives[k] for k in range(len(negatives)) if k not in kept}
        pairs = [p for k, p in enumerate(pairs) if k not in drop]
    return pairs


@dataclass
class TrainResult:
    params: ModelParams
    epoch_losses: tuple[float, ...]


class _Adam:
    def __init__(self, arrays: list[np.ndarray], lr: float):
        self.lr = lr
        self.m = [np.zeros_like(a) for a in arrays]
        self.v = [np.zeros_like(a) for a in arrays]
        self.t = 0

    def step(self, arrays: list[np.ndarray], grads: list[np.ndarray]) -> None:
        self.t += 1
        correction = (np.sqrt(1 - ADAM_BETA2 ** self.t)
                      / (1 - ADAM_BETA1 ** self.t))
        for a, g, m, v in zip(arrays, grads, self.m, self.v):
            m *= ADAM_BETA1
            m += (1 - ADAM_BETA1) * g
            v *= ADAM_BETA2
            v += (1 - ADAM_BETA2) * g * g
            a -= self.lr * correction * m / (np.sqrt(v) + ADAM_EPS)


class _Sgd:
    def __init__(self, arrays: list[np.ndarray], lr: float):
        self.lr = lr

    def step(self, arrays, grads) -> None:
        for a, g in zip(arrays, grads):
            a -= self.lr * g


def build_pair_features(pair: LabeledPair, corpus: Corpus,
                        encoder_config: EncoderConfig,
                        params: ModelParams) -> PairFeatures:
    a = corpus.mention(pair.mention_i)
    b = corpus.mention(pair.mention_j)
    seq = build_pair_sequence(a, b, corpus)
    embeddings = make_encoder(encoder_config).encode(seq)
    return pair_features(a, b, embeddings, seq, params)


def train(corpus: Corpus, encoder_config: EncoderConfig, cfg: TrainConfig,
          topics: Optional[Mapping[str, str]] = None) -> TrainResult:
    """Fit the scorer on all labeled pairs of the corpus.

    Cross-document corpora pair mentions within gold topics (pass
    ``topics`` to override).  Deterministic end-to-end for a fixed seed:
    the seed drives initialization, negative subsampling, and shuffling.
    """
    if not any(m.gold_cluster is not None for m in corpus.mentions()):
        raise ValueError("training requires gold cluster labels")
    if corpus.scope == CROSS_DOC and topics is None:
        topics = corpus.gold_topics()
    encoder = make_encoder(encoder_config)
    params = init_params(encoder.dim, cfg.h1, cfg.h2, corpus.task, cfg.seed)
    pairs = enumerate_pairs(corpus, corpus.scope, topics, cfg)
    if not pairs:
        raise ValueError("no mention pairs to train on")
    data = [(build_pair_features(p, corpus, encoder_config, params), p.label)
            for p in pairs]

    optimizer = (_Adam if cfg.optimizer == "adam" else _Sgd)(
        params.arrays(), cfg.learning_rate)
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 1]))
    epoch_losses = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(data))
        total = 0.0
        for start in range(0, len(order), cfg.batch_size):
            chunk = order[start:start + cfg.batch_size]
            batch = [data[k] for k in chunk]
            try:
                loss, grads = loss_and_grads(batch, params)
            except TrainingError as exc:
                raise TrainingError(
                    f"epoch {epoch}, batch at {start}: {exc}") from None
            optimizer.step(params.arrays(), grads.arrays())
            total += loss * len(chunk)
        epoch_losses.append(total / len(data))
    return TrainResult(params, tuple(epoch_losses))


# ---------------------------------------------------------------------------
# Inference


def predict_scores(mentions: Sequence[Mention], corpus: Corpus,
                   params: ModelParams, encoder_config: EncoderConfig,
                   symmetrize: str = "first") -> ScoreMatrix:
    """Symmetric coreference probabilities over a mention set.

    Each unordered pair is scored once with the lexicographically
    smaller mention id first; ``symmetrize="mean"`` scores both orders
    and averages.
    """
    if symmetrize not in ("first", "mean"):
        raise ValueError(f"unknown symmetrize mode {symmetrize!r}")
    encoder = make_encoder(encoder_config)
    n = len(mentions)
    scores = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            a, b = sorted((mentions[i], mentions[j]),
                          key=lambda m: m.mention_id)
            s = _score_ordered(a, b, corpus, params, encoder)
            if symmetrize == "mean":
                s = (s + _score_ordered(b, a, corpus, params, encoder)) / 2.0
            scores[i, j] = scores[j, i] = s
    return ScoreMatrix(tuple(m.mention_id for m in mentions), scores)


def _score_ordered(a: Mention, b: Mention, corpus: Corpus,
                   params: ModelParams, encoder) -> float:
    seq = build_pair_sequence(a, b, corpus)
    embeddings = encoder.encode(seq)
    return score_pair(pair_features(a, b, embeddings, seq, params), params)


def predict_scores_grouped(corpus: Corpus, params: ModelParams,
                           encoder_config: EncoderConfig,
                           scope: Optional[str] = None,
                           topics: Optional[Mapping[str, str]] = None,
                           symmetrize: str = "first") -> dict[str, ScoreMatrix]:
    """One ScoreMatrix per document (within_doc) or topic (cross_doc).

    Cross-document grouping falls back to gold topics when ``topics`` is
    not given.
    """
    scope = scope or corpus.scope
    if scope == CROSS_DOC and topics is None:
        topics = corpus.gold_topics()
    return {
        key: predict_scores(members, corpus, params, encoder_config,
                            symmetrize=symmetrize)
        for key, members in _grouped_mentions(corpus, scope, topics).items()
        if members}
