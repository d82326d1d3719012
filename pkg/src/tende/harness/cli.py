"""Command-line entry point.

Subcommands: simulate, estimate, benchmark, santafe, selftest.  Exit codes:
0 success, 2 bad arguments (argparse), 3 I/O failure, 4 numeric failure.
A flat key=value --config file supplies defaults; explicit flags win.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from ..estimators import EstimatorConfig, transfer_entropy
from ..score_model import NumericError, TrainConfig
from ..systems import read_series, write_series
from .config import load_kv_config
from .results import ResultRow, append_rows
from .santafe import run_santafe
from .selftest import run_selftest
from .suites import (SUITES, informative_direction, make_generator, run_suite,
                     system_truth)

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4

SYSTEMS = ("joint", "linear_gaussian")


def _str2bool(v: str) -> bool:
    if v.lower() in ("1", "true", "yes", "on"):
        return True
    if v.lower() in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {v!r}")


def _n_workers() -> int:
    try:
        return max(1, int(os.environ.get("TENDE_THREADS", "1")))
    except ValueError:
        return 1


def _add_system_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--coupling", type=float, default=None,
                   help="coupling strength (default: 0.5 joint, 0 linear)")
    p.add_argument("--rho", type=float, default=0.9,
                   help="mixing weight of the joint system")
    p.add_argument("--redundant", type=int, default=0,
                   help="extra independent noise channels per series")
    p.add_argument("--replicates", type=int, default=1,
                   help="independent system copies stacked columnwise")
    p.add_argument("--transform", choices=("half_cube", "gauss_cdf"), default=None,
                   help="marginal transform applied to every channel")


def _add_run_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, default=1, help="source past lags")
    p.add_argument("--ell", type=int, default=1, help="target own-past lags")
    p.add_argument("--approach", choices=("c", "j"), default="c")
    p.add_argument("--option", type=int, choices=(1, 2), default=1)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--mc-draws", type=int, default=10,
                   help="time draws per data point during estimation")
    p.add_argument("--n-seeds", type=int, default=5)
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--batch-size", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--standardize", type=_str2bool, default=True)
    p.add_argument("--holdout", type=float, default=0.0,
                   help="fraction held out of training and used for estimation")
    p.add_argument("--out-dir", default="runs")


def _system_coupling(args) -> float:
    if args.coupling is not None:
        return args.coupling
    return 0.5 if args.system == "joint" else 0.0


def _configs(args) -> tuple[EstimatorConfig, TrainConfig]:
    est = EstimatorConfig(approach=args.approach, option=args.option,
                          sigma=args.sigma,
                          mc_time_draws_per_point=args.mc_draws, seed=args.seed)
    train = TrainConfig(approach=args.approach, epochs=args.epochs,
                        batch_size=args.batch_size, seed=args.seed,
                        standardize=args.standardize,
                        holdout_fraction=args.holdout)
    return est, train


def cmd_simulate(args) -> int:
    gen = make_generator(args.system, _system_coupling(args), args.t_len,
                         args.redundant, args.replicates, args.transform)
    pair = gen(np.random.default_rng(args.seed))
    write_series(pair, args.out)
    print(f"wrote {pair.t_len} steps ({pair.x.shape[1]}+{pair.y.shape[1]} channels) "
          f"to {args.out}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    est_cfg, train_cfg = _configs(args)
    if args.series:
        try:
            series = read_series(args.series)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
        system, param, truths = Path(args.series).stem, 0.0, {}
        n_samples = series.t_len - max(args.k, args.ell)
    else:
        coupling = _system_coupling(args)
        n_samples = args.n_samples
        series = make_generator(args.system, coupling,
                                n_samples + max(args.k, args.ell),
                                args.redundant, args.replicates, args.transform)
        system = args.system if args.transform is None else \
            f"{args.system}_{args.transform}"
        param = coupling
        truths = {}
        if args.redundant == 0 and args.replicates == 1:
            truths = {d: system_truth(args.system, coupling, d)
                      for d in ("x_to_y", "y_to_x")}
    directions = ("x_to_y", "y_to_x") if args.direction == "both" else (args.direction,)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for direction in directions:
        est = transfer_entropy(series, args.k, args.ell, direction, est_cfg,
                               train_cfg, n_seeds=args.n_seeds,
                               n_workers=_n_workers())
        truth = truths.get(direction)
        rows = [ResultRow(system=system, n_samples=n_samples, param=param,
                          direction=direction, variant=f"{args.approach}{args.option}",
                          seed=i, estimate=v, truth=truth, wall_time_s=w)
                for i, (v, w) in enumerate(zip(est.per_seed_values,
                                               est.per_seed_wall_times))]
        append_rows(out_dir / "results.csv", rows)
        extra = "" if truth is None else f"  (truth {truth:.4f})"
        print(f"TE {direction}: {est.value:.4f} +/- {est.std_dev:.4f} nats{extra}")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    est_cfg, train_cfg = _configs(args)
    run_suite(args.suite, args.out_dir, est_cfg, train_cfg,
              n_seeds=args.n_seeds, n_workers=_n_workers())
    print(f"suite '{args.suite}' written to {args.out_dir}")
    return EXIT_OK


def cmd_santafe(args) -> int:
    est_cfg, train_cfg = _configs(args)
    try:
        columns = tuple(int(c) for c in args.columns.split(","))
        if len(columns) != 3:
            raise ValueError("need exactly three column indices")
    except ValueError as exc:
        print(f"error: bad --columns: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        run_santafe(args.input, args.out_dir, columns=columns, k_max=args.k_max,
                    ell=args.ell, n_seeds=args.n_seeds, est_cfg=est_cfg,
                    train_cfg=train_cfg, n_workers=_n_workers())
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"analysis written to {args.out_dir}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    return EXIT_OK if run_selftest() else EXIT_NUMERIC


def build_parser(file_defaults: dict[str, str]) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tende",
        description="Transfer entropy estimation via denoising diffusion "
                    "score matching")
    parser.add_argument("--config", help="key=value defaults file")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_flag(p):
        p.add_argument("--config", help="key=value defaults file")

    p_sim = sub.add_parser("simulate", help="write a synthetic series file")
    p_sim.add_argument("--system", choices=SYSTEMS, required=True)
    p_sim.add_argument("--t-len", type=int, default=10000)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", required=True)
    _add_system_params(p_sim)
    add_config_flag(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_est = sub.add_parser("estimate", help="estimate transfer entropy")
    src = p_est.add_mutually_exclusive_group(required=True)
    src.add_argument("--series", help="series file from 'simulate'")
    src.add_argument("--system", choices=SYSTEMS,
                     help="generate fresh data per seed instead")
    p_est.add_argument("--n-samples", type=int, default=10000)
    p_est.add_argument("--direction", choices=("x_to_y", "y_to_x", "both"),
                       default="both")
    _add_system_params(p_est)
    _add_run_params(p_est)
    add_config_flag(p_est)
    p_est.set_defaults(func=cmd_estimate)

    p_bench = sub.add_parser("benchmark", help="run a named sweep suite")
    p_bench.add_argument("--suite", choices=sorted(SUITES), required=True)
    _add_run_params(p_bench)
    add_config_flag(p_bench)
    p_bench.set_defaults(func=cmd_benchmark)

    p_sf = sub.add_parser("santafe", help="respiration/heart lag analysis")
    p_sf.add_argument("--input", required=True,
                      help="whitespace-delimited multichannel recording")
    p_sf.add_argument("--columns", default="0,1,2",
                      help="file columns holding heart,resp,oxygen")
    p_sf.add_argument("--k-max", type=int, default=5)
    _add_run_params(p_sf)
    p_sf.set_defaults(ell=2)  # condition on one second of own past by default
    add_config_flag(p_sf)
    p_sf.set_defaults(func=cmd_santafe)

    p_self = sub.add_parser("selftest", help="run fast built-in checks")
    add_config_flag(p_self)
    p_self.set_defaults(func=cmd_selftest)

    if file_defaults:
        for action in sub.choices.values():
            known = {a.dest for a in action._actions}
            usable = {k: v for k, v in file_defaults.items() if k in known}
            action.set_defaults(**usable)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    file_defaults: dict[str, str] = {}
    if known.config:
        try:
            file_defaults = load_kv_config(known.config)
        except (OSError, ValueError) as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return EXIT_IO
    parser = build_parser(file_defaults)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
