"""Command-line entry: one verb per pipeline stage.

Every verb takes --config and optional --seed / --out overrides; stage
errors exit nonzero with the failing stage named.
"""

from __future__ import annotations

import argparse
import sys

from . import pipeline


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cariparse")
    sub = ap.add_subparsers(dest="verb", required=True)
    for verb in (
        "prepare",
        "train-shape",
        "train-texture",
        "synthesize",
        "train-parser",
        "evaluate",
        "run-ablation",
        "make-toy-data",
    ):
        sp = sub.add_parser(verb)
        sp.add_argument("--config", required=True, help="run config (INI)")
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument("--out", default=None, help="override the workspace directory")
        if verb in ("synthesize", "train-parser", "evaluate"):
            sp.add_argument(
                "--arm",
                action="append",
                default=None,
                help="arm name; may repeat (synthesize default: all)",
            )
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = pipeline.load_pipeline_config(
            args.config, seed_override=args.seed, workspace_override=args.out
        )
        if args.verb == "make-toy-data":
            pipeline.cmd_make_toy_data(cfg)
        elif args.verb == "prepare":
            pipeline.cmd_prepare(cfg)
        elif args.verb == "train-shape":
            pipeline.cmd_train_shape(cfg)
        elif args.verb == "train-texture":
            pipeline.cmd_train_texture(cfg)
        elif args.verb == "synthesize":
            arms = args.arm or list(pipeline.SYNTH_ARMS)
            pipeline.cmd_synthesize(cfg, arms)
        elif args.verb == "train-parser":
            for arm in args.arm or list(pipeline.PARSER_ARMS):
                pipeline.cmd_train_parser(cfg, arm)
        elif args.verb == "evaluate":
            for arm in args.arm or list(pipeline.PARSER_ARMS):
                pipeline.cmd_evaluate(cfg, arm)
        elif args.verb == "run-ablation":
            pipeline.cmd_run_ablation(cfg)
    except Exception as e:  # noqa: BLE001 - CLI boundary
        print(f"cariparse {args.verb}: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
