"""Command-line pipeline driver.

Subcommands: gen-synth, topics, train, predict, cluster, score,
baseline-lemma, pipeline.  Every run prints its resolved configuration
(including the seed) to stderr so results are replayable.  Exit codes:
0 success, 1 stage failure (stage named on stderr), 2 usage error.
"""

import argparse
import contextlib
import json
import sys
from pathlib import Path

from . import cluster as cluster_mod
from . import corpus as corpus_mod
from . import metrics, pairrep, topics as topics_mod
from .encoder import EncoderConfig
from .partition import (Partition, merge_partitions, read_partition,
                        read_scores, write_partition, write_scores)


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage


@contextlib.contextmanager
def _stage(name: str):
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def _log(msg: str) -> None:
    print(f"[corefkit] {msg}", file=sys.stderr)


def _print_config(args: argparse.Namespace) -> None:
    config = {k: v for k, v in sorted(vars(args).items())
              if k != "func" and v is not None}
    _log(f"config: {json.dumps(config, default=str)}")


def _check_distinct_output(parser, args, out_attr="out") -> None:
    out = getattr(args, out_attr, None)
    if out is None:
        return
    inputs = [getattr(args, name, None)
              for name in ("corpus", "model", "scores", "pred", "gold",
                           "dev_corpus", "topics")]
    for inp in inputs:
        if inp and Path(str(inp)).resolve() == Path(str(out)).resolve():
            parser.error(f"--{out_attr} must differ from input path {inp}")


def _encoder_config(args) -> EncoderConfig:
    spec = args.encoder
    if spec == "synthetic":
        return EncoderConfig(kind="synthetic", dim=args.dim,
                             alpha=args.alpha, beta=args.beta,
                             window=args.window)
    if spec.startswith("file:"):
        return EncoderConfig(kind="file", path=spec[len("file:"):])
    raise ValueError(f"--encoder must be 'synthetic' or 'file:<path>', "
                     f"got {spec!r}")


def _load_corpus(args, path=None, scope=None):
    return corpus_mod.load_corpus(path or args.corpus,
                                  task=getattr(args, "task", None),
                                  scope=scope or getattr(args, "scope",
                                                         corpus_mod.WITHIN_DOC))


def _resolve_topics(spec, corpus):
    """--topics is a records file or the literal 'gold'."""
    if spec is None or spec == "gold":
        topics = corpus.gold_topics()
        missing = [d.doc_id for d in corpus.documents
                   if d.doc_id not in topics]
        if missing:
            raise ValueError(f"document {missing[0]!r} has no gold topic; "
                             "pass --topics <file>")
        return topics
    return topics_mod.read_topics(spec)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_gen_synth(args) -> int:
    with _stage("gen-synth"):
        corpus = corpus_mod.gen_synthetic(
            docs=args.docs, clusters=args.clusters,
            mentions_per_cluster=args.mentions_per_cluster,
            vocab_size=args.vocab_size, seed=args.seed, task=args.task,
            clusters_per_topic=args.clusters_per_topic, scope=args.scope)
        corpus_mod.save_corpus(corpus, args.out)
        stats = corpus_mod.corpus_stats(corpus)
        _log(f"wrote {args.out}: {stats.as_dict()}")
    return 0


def cmd_topics(args) -> int:
    with _stage("topics"):
        corpus = _load_corpus(args)
        assignment = topics_mod.predict_topics(corpus, args.kmax,
                                               seed=args.seed)
        labels = topics_mod.topic_labels(assignment)
        topics_mod.write_topics(args.out, labels)
        _log(f"selected K={assignment.k} "
             f"(mean silhouette {assignment.silhouette:.4f})")
    return 0


def cmd_train(args) -> int:
    with _stage("train"):
        corpus = _load_corpus(args)
        topics = None
        if corpus.scope == corpus_mod.CROSS_DOC:
            topics = _resolve_topics(args.topics, corpus)
        cfg = pairrep.TrainConfig(
            seed=args.seed, learning_rate=args.lr, epochs=args.epochs,
            batch_size=args.batch_size, h1=args.h1, h2=args.h2,
            neg_keep_ratio=args.neg_keep_ratio, optimizer=args.optimizer)
        result = pairrep.train(corpus, _encoder_config(args), cfg,
                               topics=topics)
        result.params.save(args.out)
        losses = ", ".join(f"{x:.4f}" for x in result.epoch_losses[-3:])
        _log(f"wrote {args.out}; final epoch losses: {losses or 'n/a'}")
        if corpus.task == corpus_mod.EVENT:
            weights = pairrep.argument_weight_summary(result.params)
            _log(f"argument weight summary: "
                 f"{json.dumps({k: round(v, 4) for k, v in weights.items()})}")
    return 0


def cmd_predict(args) -> int:
    with _stage("predict"):
        corpus = _load_corpus(args)
        params = pairrep.ModelParams.load(args.model)
        topics = None
        if corpus.scope == corpus_mod.CROSS_DOC:
            topics = _resolve_topics(args.topics, corpus)
        grouped = pairrep.predict_scores_grouped(
            corpus, params, _encoder_config(args), topics=topics,
            symmetrize=args.symmetrize)
        write_scores(args.out, grouped.values())
        n_pairs = sum(len(m) * (len(m) - 1) // 2 for m in grouped.values())
        _log(f"wrote {args.out}: {len(grouped)} groups, {n_pairs} pairs")
    return 0


def cmd_cluster(args) -> int:
    with _stage("cluster"):
        matrices = read_scores(args.scores)
        if args.tune:
            if not args.corpus:
                raise ValueError("--tune requires --corpus for gold labels")
            gold = corpus_mod.gold_partition(_load_corpus(args))
            tau = cluster_mod.tune_threshold(matrices, gold,
                                             objective=args.metric)
            _log(f"tuned threshold: {tau:.2f}")
        else:
            tau = args.threshold
        partition = merge_partitions(
            cluster_mod.agglomerate(m, tau) for m in matrices)
        write_partition(args.out, partition)
        _log(f"wrote {args.out}: {len(partition)} clusters at "
             f"threshold {tau:.2f}")
        print(json.dumps({"threshold": tau, "clusters": len(partition)}))
    return 0


def _read_gold_or_partition(path) -> Partition:
    """Accept a partition records file or a corpus file (gold clusters)."""
    with open(path, encoding="utf-8") as f:
        first = ""
        for line in f:
            if line.strip():
                first = line
                break
    try:
        record = json.loads(first) if first else {}
    except json.JSONDecodeError:
        record = {}
    if "mention_ids" in record:
        return read_partition(path)
    return corpus_mod.gold_partition(corpus_mod.load_corpus(path))


def cmd_score(args) -> int:
    with _stage("score"):
        key = _read_gold_or_partition(args.gold)
        response = read_partition(args.pred)
        rep = metrics.report(key, response)
        print(rep.table())
        print(json.dumps(rep.as_dict()))
        if args.out:
            with open(args.out, "w", encoding="utf-8") as f:
                json.dump(rep.as_dict(), f, indent=2)
    return 0


def cmd_baseline_lemma(args) -> int:
    with _stage("baseline-lemma"):
        corpus = _load_corpus(args)
        topics = None
        if corpus.scope == corpus_mod.CROSS_DOC:
            topics = _resolve_topics(args.topics, corpus)
        partition = cluster_mod.lemma_baseline(corpus, topics=topics)
        write_partition(args.out, partition)
        _log(f"wrote {args.out}: {len(partition)} clusters")
    return 0


def cmd_pipeline(args) -> int:
    corpus = None
    with _stage("load"):
        corpus = _load_corpus(args)
        params = pairrep.ModelParams.load(args.model)
        encoder_config = _encoder_config(args)

    def topic_map(c):
        if c.scope != corpus_mod.CROSS_DOC:
            return None
        assignment = topics_mod.predict_topics(c, args.kmax, seed=args.seed)
        _log(f"topics: K={assignment.k} "
             f"(mean silhouette {assignment.silhouette:.4f})")
        return topics_mod.topic_labels(assignment)

    with _stage("topics"):
        topics = topic_map(corpus)
    with _stage("predict"):
        grouped = pairrep.predict_scores_grouped(
            corpus, params, encoder_config, topics=topics,
            symmetrize=args.symmetrize)
    with _stage("cluster"):
        if args.tune:
            dev_path = args.dev_corpus
            if not dev_path:
                raise ValueError("--tune requires --dev-corpus")
            dev = _load_corpus(args, path=dev_path)
            dev_grouped = pairrep.predict_scores_grouped(
                dev, params, encoder_config, topics=topic_map(dev),
                symmetrize=args.symmetrize)
            tau = cluster_mod.tune_threshold(
                list(dev_grouped.values()), corpus_mod.gold_partition(dev),
                objective=args.metric)
            _log(f"tuned threshold: {tau:.2f}")
        else:
            tau = args.threshold
        predicted = merge_partitions(
            cluster_mod.agglomerate(m, tau) for m in grouped.values())
    with _stage("score"):
        rep = metrics.report(corpus_mod.gold_partition(corpus), predicted)
        print(rep.table())
        print(json.dumps(rep.as_dict()))
        if args.out:
            with open(args.out, "w", encoding="utf-8") as f:
                json.dump({"threshold": tau, **rep.as_dict()}, f, indent=2)
    return 0


# ---------------------------------------------------------------------------
# Parser


def _add_encoder_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--encoder", default="synthetic",
                   help="'synthetic' or 'file:<path>' (PREMB embeddings)")
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--beta", type=float, default=0.25)
    p.add_argument("--window", type=int, default=3)


def _add_corpus_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--corpus", required=True, help="corpus line-record file")
    p.add_argument("--task", choices=[corpus_mod.EVENT, corpus_mod.ENTITY],
                   default=None, help="default: inferred from mentions")
    p.add_argument("--scope", choices=list(corpus_mod.SCOPES),
                   default=corpus_mod.WITHIN_DOC)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corefkit",
        description="Event/entity coreference pipeline: synthetic data, "
                    "topic pre-clustering, pair scoring, agglomerative "
                    "clustering, and evaluation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synth", help="generate a synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--docs", type=int, default=20)
    p.add_argument("--clusters", type=int, default=8)
    p.add_argument("--mentions-per-cluster", type=int, default=5)
    p.add_argument("--vocab-size", type=int, default=50)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--task", choices=[corpus_mod.EVENT, corpus_mod.ENTITY],
                   default=corpus_mod.EVENT)
    p.add_argument("--clusters-per-topic", type=int, default=4)
    p.add_argument("--scope", choices=list(corpus_mod.SCOPES),
                   default=corpus_mod.CROSS_DOC)
    p.set_defaults(func=cmd_gen_synth)

    p = sub.add_parser("topics", help="predict topics by tf-idf + k-means")
    _add_corpus_flags(p)
    p.add_argument("--kmax", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_topics)

    p = sub.add_parser("train", help="train the pair scorer")
    _add_corpus_flags(p)
    _add_encoder_flags(p)
    p.add_argument("--topics", default=None,
                   help="topic records file or 'gold' (cross_doc)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--h1", type=int, default=128)
    p.add_argument("--h2", type=int, default=128)
    p.add_argument("--neg-keep-ratio", type=float, default=1.0)
    p.add_argument("--optimizer", choices=["sgd", "adam"], default="adam")
    p.add_argument("--out", required=True, help="model file to write")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="score mention pairs")
    _add_corpus_flags(p)
    _add_encoder_flags(p)
    p.add_argument("--model", required=True)
    p.add_argument("--topics", default=None)
    p.add_argument("--symmetrize", choices=["first", "mean"],
                   default="first")
    p.add_argument("--out", required=True, help="score records to write")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("cluster", help="agglomerative clustering of scores")
    p.add_argument("--scores", required=True)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--tune", action="store_true",
                   help="tune threshold against --corpus gold labels")
    p.add_argument("--corpus", default=None)
    p.add_argument("--task", default=None)
    p.add_argument("--scope", choices=list(corpus_mod.SCOPES),
                   default=corpus_mod.WITHIN_DOC)
    p.add_argument("--metric", choices=list(metrics.OBJECTIVES),
                   default="conll_f1")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("score", help="evaluate a predicted partition")
    p.add_argument("--gold", required=True,
                   help="gold partition records or a corpus file")
    p.add_argument("--pred", required=True, help="predicted partition records")
    p.add_argument("--out", default=None, help="also write the report JSON")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("baseline-lemma", help="same-head-lemma baseline")
    _add_corpus_flags(p)
    p.add_argument("--topics", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_baseline_lemma)

    p = sub.add_parser("pipeline",
                       help="topics -> predict -> cluster -> score")
    _add_corpus_flags(p)
    _add_encoder_flags(p)
    p.add_argument("--model", required=True)
    p.add_argument("--kmax", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--tune", action="store_true")
    p.add_argument("--dev-corpus", default=None,
                   help="corpus for threshold tuning (with --tune)")
    p.add_argument("--metric", choices=list(metrics.OBJECTIVES),
                   default="conll_f1")
    p.add_argument("--symmetrize", choices=["first", "mean"],
                   default="first")
    p.add_argument("--out", default=None, help="report JSON to write")
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _check_distinct_output(parser, args)
    _print_config(args)
    try:
        return args.func(args)
    except StageError as exc:
        _log(str(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())
