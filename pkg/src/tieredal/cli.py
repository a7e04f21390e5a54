"""Command-line experiment runner and service launcher.

``tieredal run ...`` executes experiments and writes one results JSON per run;
``tieredal serve ...`` starts the live labeling session service;
``tieredal convert-csv ...`` converts a CSV dataset to the binary format.
The subcommand defaults to ``run`` when the first argument is a flag.
"""

from __future__ import annotations

import argparse
import os
import sys

from .data import import_csv, save_dataset
from .errors import TieredALError
from .model import TrainConfig
from .orchestrate import ExperimentConfig, run_experiment

OUT_DIR_ENV = "TIEREDAL_OUT_DIR"


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--al-strategy", choices=["badge", "entropy"], default="entropy")
    p.add_argument("--auto-assign-strategy", choices=["highest_confidence"],
                   default="highest_confidence")
    p.add_argument("--b1", type=int, default=10, help="hard (AL) budget per round")
    p.add_argument("--b2", type=int, default=10, help="intermediate (SMI) budget")
    p.add_argument("--b3", type=int, default=10, help="easy (auto-label) budget")
    p.add_argument("--dataset", default="blobs",
                   help="'blobs' for synthetic data, or a .tald/.csv path")
    p.add_argument("--human-correct-strategy", choices=["logdetmi"],
                   default="logdetmi")
    p.add_argument("--num-partitions", type=int, default=1)
    p.add_argument("--rounds", type=int, default=8)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--seed-size", type=int, default=40)
    p.add_argument("--thread-count", type=int, default=1)
    p.add_argument("--method", choices=["clarifier", "al_suggest", "al_plain"],
                   default="clarifier")
    p.add_argument("--c-a", type=float, default=3.0)
    p.add_argument("--c-v", type=float, default=1.0)
    p.add_argument("--out-dir", default="results")
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--blob-classes", type=int, default=20)
    p.add_argument("--blob-per-class", type=int, default=60)
    p.add_argument("--blob-dim", type=int, default=8)
    p.add_argument("--blob-spread", type=float, default=2.0)
    p.add_argument("--test-fraction", type=float, default=0.25)
    p.add_argument("--epochs", type=int, default=40, help="max training epochs")
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--stop-train-acc", type=float, default=0.99)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tieredal")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment")
    _add_run_flags(run_p)

    serve_p = sub.add_parser("serve", help="start the labeling session service")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8421)
    serve_p.add_argument("--dataset", default="blobs")
    serve_p.add_argument("--out-dir", default="sessions")
    serve_p.add_argument("--blob-classes", type=int, default=5)
    serve_p.add_argument("--blob-per-class", type=int, default=40)
    serve_p.add_argument("--blob-dim", type=int, default=4)
    serve_p.add_argument("--blob-spread", type=float, default=2.0)

    conv_p = sub.add_parser("convert-csv", help="convert CSV to the binary format")
    conv_p.add_argument("csv_path")
    conv_p.add_argument("out_path")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    dataset_path = None if args.dataset == "blobs" else args.dataset
    return ExperimentConfig(
        dataset_path=dataset_path,
        blob_classes=args.blob_classes,
        blob_per_class=args.blob_per_class,
        blob_dim=args.blob_dim,
        blob_spread=args.blob_spread,
        test_fraction=args.test_fraction,
        seed_size=args.seed_size,
        b1=args.b1, b2=args.b2, b3=args.b3,
        rounds=args.rounds,
        method=args.method,
        al_strategy=args.al_strategy,
        auto_assign_strategy=args.auto_assign_strategy,
        human_correct_strategy=args.human_correct_strategy,
        num_partitions=args.num_partitions,
        thread_count=args.thread_count,
        c_a=args.c_a, c_v=args.c_v,
        train=TrainConfig(lr0=args.lr, t_max=args.epochs,
                          stop_train_acc=args.stop_train_acc),
        rng_seed=args.rng_seed,
        runs=args.runs,
    )


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0].startswith("-"):
        argv = ["run"] + argv
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "convert-csv":
        try:
            save_dataset(import_csv(args.csv_path), args.out_path)
        except (TieredALError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        return 0

    out_dir = os.environ.get(OUT_DIR_ENV, args.out_dir)

    if args.command == "serve":
        from .service import serve
        try:
            serve(args.host, args.port, args, out_dir)
        except (TieredALError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        return 0

    try:
        cfg = config_from_args(args)
    except TieredALError as exc:
        parser.error(str(exc))  # exits 2
    try:
        run_experiment(cfg, out_dir=out_dir)
    except (TieredALError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
