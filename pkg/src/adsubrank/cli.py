"""Command-line entry point.

Exit codes: 0 success, 2 configuration or usage error, 3 data error,
4 oracle dominance violation.
"""

from __future__ import annotations

import argparse
import logging
import sys
from fractions import Fraction

from . import bench
from .datasets import SynParams, gen_syn, ingest_movielens, mir_instance_from_ratings, \
    odt_instance_from_ratings
from .exceptions import AdsubError, ConfigError, DataError
from .formats import dump_instance, load_instance

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_ORACLE = 0, 2, 3, 4


def _gen(args):
    eps = Fraction(args.eps) if args.eps else None
    dump_instance(gen_syn(SynParams(args.k, eps)), args.output)
    return EXIT_OK


def _ingest(args):
    matrix = ingest_movielens(args.data, threshold=args.rating_threshold)
    if args.app == "mir":
        inst = mir_instance_from_ratings(matrix, K_rule=args.threshold_rule or "full", seed=args.seed)
    else:
        inst = odt_instance_from_ratings(matrix, t_rule=args.threshold_rule or "1", seed=args.seed)
    dump_instance(inst, args.output)
    print(f"{matrix.users} users, {matrix.items} items, {matrix.n_memberships} memberships",
          file=sys.stderr)
    return EXIT_OK


def _run(args):
    if args.config:
        cfg = bench.load_config(args.config)
    else:
        if not args.instance or not args.alg:
            raise ConfigError("--instance/--alg", "needed when --config is absent")
        src = args.instance
        if not (src.startswith("syn:") or src == "ml100k"):
            src = "file:" + src
        seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else [0]
        cfg = bench.ExperimentConfig(
            source=src, algorithms=args.alg.split(","), app=args.app, data=args.data,
            threshold_rule=args.threshold_rule, distribution=args.dist, seeds=seeds,
            master_seed=args.master_seed, ml_runs=args.ml_runs, output=args.out,
            json_output=args.json, workers=args.workers, timing=not args.no_timing)
    report = bench.cmd_run(cfg)
    report.write()
    print(report.table())
    return EXIT_OK


def _oracle(args):
    summary = bench.cmd_oracle_compare(args.n, args.m, args.trials, args.seed,
                                       apps=tuple(args.apps.split(",")), out=sys.stdout)
    return EXIT_OK if summary.ok else EXIT_ORACLE


def _interactive(args):
    inst = load_instance(args.instance)
    result = bench.cmd_interactive(inst, args.alg)
    return EXIT_OK if result.outcome in ("covered", "quit") else EXIT_DATA


def build_parser():
    p = argparse.ArgumentParser(prog="adsubrank", description="Adaptive submodular ranking tools")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic instance")
    g.add_argument("kind", choices=["syn"])
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--eps", help="rational, e.g. 1/1024 (default 2^-(k+3))")
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=_gen)

    i = sub.add_parser("ingest", help="convert a ratings file into an instance")
    i.add_argument("kind", choices=["ml100k"])
    i.add_argument("--data", required=True, help="path to u.data")
    i.add_argument("--app", choices=["mir", "odt"], required=True)
    i.add_argument("--threshold-rule", help="mir: full or [a,b); odt: 1 or [a,b)")
    i.add_argument("--rating-threshold", type=int, default=3)
    i.add_argument("--seed", type=int, default=0)
    i.add_argument("-o", "--output", required=True)
    i.set_defaults(func=_ingest)

    r = sub.add_parser("run", help="run algorithms and report expected costs")
    r.add_argument("--config")
    r.add_argument("--instance", help="instance JSON, syn:<k> or ml100k")
    r.add_argument("--alg", help="comma-separated algorithm ids")
    r.add_argument("--dist", default="native", help="native, uniform or powerlaw:<alpha>")
    r.add_argument("--seeds", help="comma-separated permutation seeds")
    r.add_argument("--master-seed", type=int, default=0)
    r.add_argument("--ml-runs", type=int, default=25)
    r.add_argument("--app", choices=["mir", "odt"])
    r.add_argument("--data")
    r.add_argument("--threshold-rule")
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--no-timing", action="store_true", help="write wall_ms as 0 (byte-stable CSV)")
    r.add_argument("--out", help="CSV output path")
    r.add_argument("--json", help="JSON report path")
    r.set_defaults(func=_run)

    o = sub.add_parser("oracle", help="compare the greedy policy with the exact optimum")
    o.add_argument("--n", type=int, required=True)
    o.add_argument("--m", type=int, required=True)
    o.add_argument("--trials", type=int, default=100)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--apps", default="odt,mir,ecd")
    o.set_defaults(func=_oracle)

    s = sub.add_parser("interactive", help="answer feedback questions at the terminal")
    s.add_argument("--instance", required=True)
    s.add_argument("--alg", default="adsub")
    s.set_defaults(func=_interactive)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (AdsubError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
