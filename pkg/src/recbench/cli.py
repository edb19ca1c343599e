"""Command line entry point: ``recbench run config.yml --out results/``.

Exit codes: 0 success, 1 configuration or usage error, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

from . import __version__
from .config import ConfigError, describe, load_config
from .experiment import ExperimentError, run_experiment
from .metrics import METRICS
from .recommenders import MODELS
from .reporting import ReportError, write_reports

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def build_parser():
    p = _Parser(prog="recbench", description="Config-driven recommender experiments.")
    p.add_argument("--version", action="version", version=f"recbench {__version__}")
    p.add_argument("--list-models", action="store_true", help="print registered models")
    p.add_argument("--list-metrics", action="store_true", help="print registered metrics")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    p.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    run = sub.add_parser("run", help="run an experiment")
    run.add_argument("config", nargs="?", help="YAML experiment file")
    run.add_argument("--out", default="results", help="output directory (default: results)")
    run.add_argument("--seed", type=int, help="override the configured random_seed")
    run.add_argument("--dump-splits", metavar="DIR", help="also write every split as TSV")
    run.add_argument("--validate-only", action="store_true",
                     help="parse and check the configuration, print the plan, do not run")
    run.add_argument("--workers", type=int, default=1,
                     help="threads for independent tuning trials (results do not change)")
    run.add_argument("--list-models", action="store_true", dest="list_models_run",
                     help=argparse.SUPPRESS)
    run.add_argument("--list-metrics", action="store_true", dest="list_metrics_run",
                     help=argparse.SUPPRESS)

    syn = sub.add_parser("synthesize", help="write a synthetic dataset")
    syn.add_argument("out_dir")
    syn.add_argument("--users", type=int, default=300)
    syn.add_argument("--items", type=int, default=400)
    syn.add_argument("--profile", type=int, default=40, help="mean profile size")
    syn.add_argument("--seed", type=int, default=0)
    return p


def _setup_logging(verbose, quiet):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logger = logging.getLogger("recbench")
    logger.handlers[:] = []
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(message)s"))
    logger.addHandler(handler)
    logger.setLevel(level)
    logger.propagate = False


def _missing_files(cfg):
    paths = [cfg.data.dataset_path, cfg.data.train_path, cfg.data.test_path]
    if cfg.data.side_information is not None:
        paths.append(cfg.data.side_information.attribute_path)
    paths += [c.clustering_file for c in cfg.evaluation.complex_metrics]
    return [p for p in paths if p is not None and not os.path.exists(cfg.resolve(p))]


def _run(args):
    if args.config is None:
        print("recbench run: error: the config path is required", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        if args.seed < 0:
            print("configuration error: --seed must be >= 0", file=sys.stderr)
            return EXIT_CONFIG
        cfg = cfg.with_seed(args.seed)
    if args.workers < 1:
        print("configuration error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    missing = _missing_files(cfg)
    if args.validate_only:
        print(describe(cfg))
        for p in missing:
            print(f"warning: data file not found: {p}")
        print("configuration OK")
        return EXIT_OK
    if missing:
        print(f"error: data file not found: {cfg.resolve(missing[0])}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        result = run_experiment(cfg, workers=args.workers, dump_splits_to=args.dump_splits)
        write_reports(result, args.out)
    except (ExperimentError, ReportError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    failed = [m.name for m in result.models.values() if not m.ok]
    for name in failed:
        print(f"model {name} failed: {result.models[name].error}", file=sys.stderr)
    if len(failed) == len(result.models):
        return EXIT_RUNTIME
    return EXIT_OK


def _synthesize(args):
    from .synthetic import group_structured, write_synthetic
    data = group_structured(n_users=args.users, n_items=args.items,
                            mean_profile=args.profile, seed=args.seed)
    for key, path in write_synthetic(data, args.out_dir).items():
        print(f"{key}\t{path}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_CONFIG
    _setup_logging(args.verbose, args.quiet)
    if args.list_models or getattr(args, "list_models_run", False):
        print("\n".join(MODELS))
        return EXIT_OK
    if args.list_metrics or getattr(args, "list_metrics_run", False):
        print("\n".join(METRICS))
        return EXIT_OK
    if args.command == "run":
        return _run(args)
    if args.command == "synthesize":
        return _synthesize(args)
    parser.print_help()
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
