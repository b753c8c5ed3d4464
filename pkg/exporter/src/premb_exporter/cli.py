"""CLI: export token embeddings for mention pairs into a PREMB file."""

import argparse
import sys

from .encoders import ExportError
from .export import ExportJob, run_export


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="premb-export",
        description="Run a pretrained encoder over mention-pair sentences "
                    "and write token-level embeddings as a PREMB file.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("export")
    p.add_argument("--corpus", required=True, help="corpus line-record file")
    p.add_argument("--pairs", required=True,
                   help="pair records file, or 'auto' for all pairs per "
                        "scope group")
    p.add_argument("--model", required=True,
                   help="encoder identifier, e.g. 'roberta-base' or "
                        "'hash:16' for the offline hash backend")
    p.add_argument("--out", required=True, help="PREMB file to write")
    p.add_argument("--scope", choices=["within_doc", "cross_doc"],
                   default="within_doc", help="grouping for --pairs auto")
    p.add_argument("--device", default="cpu")
    p.add_argument("--batch-size", type=int, default=8)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    job = ExportJob(corpus_path=args.corpus, pairs=args.pairs,
                    model=args.model, out_path=args.out, scope=args.scope,
                    device=args.device, batch_size=args.batch_size)
    print(f"[premb-export] job: {job}", file=sys.stderr)
    try:
        count = run_export(job)
    except (ExportError, ValueError, KeyError, OSError) as exc:
        print(f"[premb-export] export failed: {exc}", file=sys.stderr)
        return 1
    print(f"[premb-export] wrote {args.out}: {count} records",
          file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
