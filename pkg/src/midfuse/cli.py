"""Command-line entry point: ``midfuse {gen,partition,run,reproduce}``."""

from __future__ import annotations

import argparse
import logging
import sys

from .bench.config import ExperimentConfig
from .bench.report import TABLE1_HEADER, emit, emit_table1, format_table, table1
from .bench.studies import run_study
from .errors import ConfigError, MidfuseError
from .synth import D_SWEEP, ExampleSpec, sample_dataset, write_csv
from .views import PARTITION_METHODS, build_partition

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

# panel -> (study, example); rows 1/3 are means, rows 2/4 the per-run spread
FIG2_PANELS = {
    "a": ("kernel_cls", 1), "b": ("nn_cls", 1), "c": ("clustering", 3),
    "d": ("kernel_cls", 1), "e": ("nn_cls", 1), "f": ("clustering", 3),
    "g": ("kernel_cls", 2), "h": ("nn_cls", 2), "i": ("clustering", 4),
    "j": ("kernel_cls", 2), "k": ("nn_cls", 2), "l": ("clustering", 4),
}


def _add_sweep_args(p, config=True):
    if config:
        p.add_argument("--config", help="JSON file with ExperimentConfig fields")
    p.add_argument("--full", action="store_true", help="full dimension sweep including d=2400")
    p.add_argument("--workers", type=int, help="parallel (d, run) units")
    p.add_argument("--seed", type=int, help="seed base (run r uses seed + r)")
    p.add_argument("--runs", type=int, help="resamples per d")
    p.add_argument("--budget", type=int, help="random-search trials per cell")
    p.add_argument("--d", type=int, nargs="+", dest="d_list", help="explicit dimension list")
    p.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="midfuse", description="Multi-view fusion for HDLSS data.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write a synthetic dataset as CSV")
    gen.add_argument("--example", type=int, required=True, choices=(1, 2, 3, 4))
    gen.add_argument("--d", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--split", choices=("train", "test"), default="train")
    gen.add_argument("--out", required=True, help="CSV path")

    part = sub.add_parser("partition", help="partition the features of a synthetic dataset, write JSON")
    part.add_argument("--example", type=int, required=True, choices=(1, 2, 3, 4))
    part.add_argument("--d", type=int, required=True)
    part.add_argument("--method", choices=PARTITION_METHODS, required=True)
    part.add_argument("--views", type=int, default=5)
    part.add_argument("--seed", type=int, default=0, help="dataset seed")
    part.add_argument("--partition-seed", type=int, default=0)
    part.add_argument("--out", help="JSON path (stdout when omitted)")

    run = sub.add_parser("run", help="run one study")
    run.add_argument("--study", required=True)
    run.add_argument("--example", type=int, required=True)
    _add_sweep_args(run)

    rep = sub.add_parser("reproduce", help="rerun a published table or figure panel")
    rep_sub = rep.add_subparsers(dest="target", required=True)
    t1 = rep_sub.add_parser("table1", help="view recovery ARI on Example 2")
    _add_sweep_args(t1, config=False)
    f2 = rep_sub.add_parser("fig2", help="one panel of the fusion comparison figure")
    f2.add_argument("--panel", required=True, choices=sorted(FIG2_PANELS))
    _add_sweep_args(f2, config=False)
    return parser


def _resolve(study, example, args, config_path=None) -> ExperimentConfig:
    data = {}
    if config_path:
        data = ExperimentConfig.from_json(config_path).to_dict()
    data["study"] = study
    data["example_id"] = example
    if args.full:
        data["d_list"] = list(D_SWEEP)
    if args.d_list:
        data["d_list"] = args.d_list
    for flag, key in (("workers", "workers"), ("seed", "seed_base"), ("runs", "runs"), ("budget", "budget")):
        value = getattr(args, flag)
        if value is not None:
            data[key] = value
    data["output"] = args.out
    return ExperimentConfig.from_dict(data)


def _run(config: ExperimentConfig, out: str, show_table1: bool = False):
    records, trials = run_study(config)
    paths = emit(records, out, config, trials)
    if show_table1:
        paths["table1"] = emit_table1(records, out)
        rows = [[m, len(s.values), f"{s.mean:.4g}", f"{s.std:.4g}", f"{s.median:.4g}"] for m, s in table1(records)]
        print(format_table(rows, TABLE1_HEADER))
    for kind, path in paths.items():
        print(f"{kind}: {path}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "gen":
            ds = sample_dataset(ExampleSpec(args.example, args.d), args.seed)
            write_csv(ds, args.out, args.split)
        elif args.command == "partition":
            ds = sample_dataset(ExampleSpec(args.example, args.d, n_test_per_class=0), args.seed)
            text = build_partition(args.method, ds.X_train, args.views, args.partition_seed).to_json()
            if args.out:
                with open(args.out, "w") as fh:
                    fh.write(text + "\n")
            else:
                print(text)
        elif args.command == "run":
            _run(_resolve(args.study, args.example, args, args.config), args.out)
        elif args.target == "table1":
            _run(_resolve("view_recovery", 2, args), args.out, show_table1=True)
        else:
            study, example = FIG2_PANELS[args.panel]
            _run(_resolve(study, example, args), args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (MidfuseError, ValueError) as exc:
        # bad command-line values (e.g. d not divisible by 5) are config errors too
        if args.command in ("gen", "partition"):
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
