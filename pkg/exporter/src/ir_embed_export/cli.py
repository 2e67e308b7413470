"""export-embeddings --encoder <name> --images <dir> --out <file> [--batch N]

Encoders: "random-cnn" (hermetic, weights-free) or "hf:<model-name>" for a
pretrained Hugging Face vision model (DINOv2-class). Exit codes: 0 success,
2 when the encoder cannot be loaded or arguments are unusable.
"""
from __future__ import annotations

import argparse
import sys

from .encoders import EncoderError
from .export import ExportConfig, export_embeddings


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="export-embeddings", description=__doc__)
    parser.add_argument("--encoder", required=True)
    parser.add_argument("--images", required=True, help="directory scanned recursively")
    parser.add_argument("--out", required=True, help="output manifest JSON path")
    parser.add_argument("--batch", type=int, default=8)
    parser.add_argument("--device", default="cpu")
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        config = ExportConfig(
            encoder_name=args.encoder,
            image_dir=args.images,
            output_path=args.out,
            device=args.device,
            batch_size=args.batch,
        )
        result = export_embeddings(config)
    except (EncoderError, NotADirectoryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"exported {len(result.entries)} embeddings "
          f"({len(result.skipped)} skipped) -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
