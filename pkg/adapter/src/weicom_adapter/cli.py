"""Command line for batch embedding extraction."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .encoders import ClipEncoder
from .extract import DEFAULT_TEMPLATE, AdapterConfig, extract


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weicom-embed",
        description=(
            "Encode an annotated image directory and a text list with a "
            "CLIP-style checkpoint, writing WCEM/JSONL files for weicom ingest."
        ),
    )
    parser.add_argument("--checkpoint", required=True, help="model id or local path")
    parser.add_argument("--images", required=True, help="image root directory")
    parser.add_argument(
        "--annotations", required=True,
        help="CSV with header id,class,attr:NAME[,attr:NAME...]",
    )
    parser.add_argument(
        "--texts", required=True, help="text list file, one string per line"
    )
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--batch-size", type=int, default=16)
    parser.add_argument(
        "--template", default=DEFAULT_TEMPLATE,
        help="prompt template with one {} placeholder (default: bare value)",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        texts = [
            line.strip()
            for line in Path(args.texts).read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
        config = AdapterConfig(
            image_root=Path(args.images),
            annotations=Path(args.annotations),
            texts=tuple(texts),
            out_dir=Path(args.out),
            template=args.template,
            batch_size=args.batch_size,
        )
        encoder = ClipEncoder(args.checkpoint, batch_size=args.batch_size)
        out = extract(config, encoder)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote corpus inputs to {out}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
