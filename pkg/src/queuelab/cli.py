"""Command-line entry point: run, validate, list-models."""

from __future__ import annotations

import argparse
import os
import sys

from .config import (
    MODEL_NAMES,
    MODEL_SUMMARIES,
    ConfigError,
    parse_config,
)
from .runners import run_experiment


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="queuelab",
        description="Monte-Carlo experiments on queueing models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment config")
    run_p.add_argument("config", help="path to config file")
    run_p.add_argument("--seed", type=int, default=None,
                       help="override the config's seed")
    run_p.add_argument("--reps", type=int, default=None,
                       help="override the config's replications")
    run_p.add_argument("--out", default=None,
                       help="override the output CSV path")
    run_p.add_argument("--threads", type=int, default=None,
                       help="worker processes (default: available cores)")

    val_p = sub.add_parser("validate", help="check a config without running")
    val_p.add_argument("config", help="path to config file")

    sub.add_parser("list-models", help="list available models")
    return parser


def _load(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _resolve_out(cfg_out, flag_out, model):
    out = flag_out or cfg_out or f"{model}.csv"
    if not os.path.isabs(out):
        base = os.environ.get("QUEUELAB_OUT_DIR")
        if base:
            out = os.path.join(base, out)
    return out


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "list-models":
        for name in MODEL_NAMES:
            print(f"{name:15s} {MODEL_SUMMARIES[name]}")
        return 0

    try:
        text = _load(args.config)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    if args.command == "validate":
        try:
            cfg = parse_config(text)
        except ConfigError as e:
            for err in e.errors:
                print(err, file=sys.stderr)
            return 2
        print(f"ok: model={cfg.model} replications={cfg.replications}")
        return 0

    overrides = {"seed": args.seed, "replications": args.reps,
                 "out": args.out}
    try:
        cfg = parse_config(text, overrides=overrides)
    except ConfigError as e:
        for err in e.errors:
            print(err, file=sys.stderr)
        return 2

    out = _resolve_out(cfg.out, args.out, cfg.model)
    threads = args.threads if args.threads else (os.cpu_count() or 1)
    base_dir = os.path.dirname(os.path.abspath(args.config))
    try:
        manifest = run_experiment(cfg, out, threads=threads,
                                  base_dir=base_dir)
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(f"wrote {manifest['rows']} rows to {out}")
    print(f"manifest: {out}.manifest.json (sha256 {manifest['csv_sha256'][:16]}...)")
    if manifest["errors"]:
        for err in manifest["errors"]:
            print(err, file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
