"""Command-line interface.

    ir-evalkit degrade    --manifest m.json --out lq/
    ir-evalkit train-niqe --corpus imgs/ --out pristine.json
    ir-evalkit evaluate   --manifest m.json --pristine pristine.json --out report/
    ir-evalkit sweep      --manifest m.json --out sweep/ [--pristine ...] [--sigmas 1,4,20]
    ir-evalkit tradeoff   --records report/records.csv --out tradeoff/ [--metas metas.json]

Exit codes: 0 success, 1 per-entry evaluation failures, 2 usage or manifest
errors. IR_EVALKIT_SEED provides the base seed when --seed is absent.
"""
from __future__ import annotations

import argparse
import json
import sys

from ..analysis import ModelMeta
from ..errors import EvalkitError, ManifestError
from .commands import (
    DEFAULT_SWEEP_SIGMAS,
    cmd_degrade,
    cmd_evaluate,
    cmd_sweep,
    cmd_tradeoff,
    cmd_train_niqe,
)
from .manifest import resolve_base_seed


def _parse_sigmas(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad sigma list {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty sigma list")
    return values


def _load_metas(path: str) -> dict[str, ModelMeta]:
    with open(path) as fh:
        doc = json.load(fh)
    metas = {}
    for name, raw in doc.items():
        metas[name] = ModelMeta(
            model_name=name,
            param_count=int(raw["param_count"]),
            latency_ms=float(raw["latency_ms"]) if raw.get("latency_ms") is not None else None,
        )
    return metas


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ir-evalkit",
        description="Distortion / perception / alignment benchmark for image restoration.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("degrade", help="synthesize LQ images from a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("train-niqe", help="train the pristine perception model")
    p.add_argument("--corpus", required=True, help="directory of clean PNG images")
    p.add_argument("--out", required=True, help="output model JSON path")

    p = sub.add_parser("evaluate", help="evaluate restorations listed in a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--pristine", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--backend", choices=["builtin", "embeddings", "ssim"], default=None)
    p.add_argument("--gamma-threshold", type=float, default=None)
    p.add_argument("--force-mode", choices=["gt", "lq"], default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("sweep", help="identity-restorer curves over blur levels")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--pristine", default=None)
    p.add_argument("--backend", choices=["builtin", "ssim"], default=None)
    p.add_argument("--sigmas", type=_parse_sigmas,
                   default=list(DEFAULT_SWEEP_SIGMAS),
                   help="comma-separated blur levels (default 1,2,4,8,12,16,20)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("tradeoff", help="tradeoff planes and Pareto fronts from records")
    p.add_argument("--records", required=True, help="records.csv from evaluate")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--metas", default=None,
                   help="JSON of per-model {param_count, latency_ms} for the resource table")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0

    try:
        if args.command == "degrade":
            return cmd_degrade(args.manifest, args.out,
                               resolve_base_seed(args.seed), args.jobs)
        if args.command == "train-niqe":
            return cmd_train_niqe(args.corpus, args.out)
        if args.command == "evaluate":
            return cmd_evaluate(
                args.manifest, args.pristine, args.out,
                backend_override=args.backend,
                gamma_threshold=args.gamma_threshold,
                force_mode=args.force_mode,
                base_seed=resolve_base_seed(args.seed),
                jobs=args.jobs,
            )
        if args.command == "sweep":
            return cmd_sweep(
                args.manifest, args.out,
                sigmas=args.sigmas,
                pristine_path=args.pristine,
                backend_override=args.backend,
                base_seed=resolve_base_seed(args.seed),
                jobs=args.jobs,
            )
        if args.command == "tradeoff":
            metas = _load_metas(args.metas) if args.metas else None
            return cmd_tradeoff(args.records, args.out, metas)
        parser.error(f"unknown command {args.command}")
    except ManifestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EvalkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
