"""Command line: run the embedding service or batch-export a corpus."""

from __future__ import annotations

import argparse
import logging
import sys

from .encoder import DEFAULT_MODEL, LineEmbedder
from .export import export_file
from .service import serve


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zoneseg-exporter",
        description="Embed email lines with a frozen multilingual transformer.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("serve", help="run the HTTP embedding service")
    s.add_argument("--model", default=DEFAULT_MODEL, help="model name or local path")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8091)

    e = sub.add_parser("export", help="embed a corpus into an embedding file")
    e.add_argument("--model", default=DEFAULT_MODEL, help="model name or local path")
    e.add_argument("--corpus", required=True, help="corpus JSONL to embed")
    e.add_argument("--out", required=True, help="output embedding file")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        serve(args.host, args.port, args.model)
        return 0
    stats = export_file(args.corpus, args.out, LineEmbedder(args.model))
    print(
        f"wrote {stats['rows']} rows (dim {stats['dim']}) for {stats['emails']} emails; "
        f"{stats['truncated_lines']} lines truncated"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
