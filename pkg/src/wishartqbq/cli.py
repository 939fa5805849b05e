"""Command-line entry point.

Commands::

    wishart-qbq moment-convergence [--grid 1,10,...]
    wishart-qbq sgd-compare [--iters N --gamma G --cond C --norm S --stride K]
    wishart-qbq moment-check [--identity]

CSV outputs start with ``# key=value`` metadata lines followed by the header.
Everything written is a function of the flags, so repeated invocations are
byte-identical.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import logging
import sys

from .errors import ConfigError, WishartQBQError
from .experiments import (
    DEFAULT_GRID,
    Experiment,
    ExperimentConfig,
    asgd_wins,
    loglog_slope,
    moment_check,
    moment_convergence,
    run_seeds,
    sgd_compare,
)
from .sgd import Method, SgdConfig

log = logging.getLogger("wishartqbq")

CONVERGENCE_HEADER = ["m", "mean_rel_err", "std_rel_err"]
SGD_HEADER = ["method", "iter", "grad_norm", "dist_opt", "noise_mean_err", "cov_dist"]

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4


def _grid(text):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}")


def _u64(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser():
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--n", type=int, default=10, help="dimension (default: 10)")
    shared.add_argument("--k", type=int, default=3, help="Wishart degrees of freedom (default: 3)")
    shared.add_argument("--seed", type=_u64, default=42, help="base seed (default: 42)")
    shared.add_argument("--runs", type=int, default=10, help="independent runs (default: 10)")
    shared.add_argument("--out", default=None, help="output path (default: stdout)")

    parser = argparse.ArgumentParser(
        prog="wishart-qbq",
        description="Expected Wishart quadratic forms and SGD noise experiments.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moment-convergence", parents=[shared],
                       help="Monte Carlo relative error of E(QBQ) versus sample count")
    p.add_argument("--grid", type=_grid, default=DEFAULT_GRID,
                   help="comma-separated sample counts (default: 1,10,100,1000,10000,100000)")

    p = sub.add_parser("sgd-compare", parents=[shared],
                       help="SGD versus averaged SGD on random quadratic functions")
    p.add_argument("--iters", type=int, default=100_000, help="iterations (default: 100000)")
    p.add_argument("--gamma", type=float, default=1e-3, help="step length (default: 0.001)")
    p.add_argument("--cond", type=float, default=5.0, help="condition number of A (default: 5)")
    p.add_argument("--norm", type=float, default=1.0, help="spectral norm of A (default: 1)")
    p.add_argument("--stride", type=int, default=1000, help="record every N iterations (default: 1000)")

    p = sub.add_parser("moment-check", parents=[shared],
                       help="self-test: all closed-form E(QBQ) paths agree")
    p.add_argument("--identity", action="store_true", help="use Sigma = I and B = I instead of random matrices")
    return parser


def config_from_args(args) -> ExperimentConfig:
    if args.runs < 1:
        raise ConfigError(f"--runs must be positive, got {args.runs}")
    common = dict(n=args.n, k=args.k, seeds=run_seeds(args.seed, args.runs), output_path=args.out)
    if args.command == "moment-convergence":
        return ExperimentConfig(Experiment.MOMENT_CONVERGENCE, sample_grid=args.grid, **common)
    if args.command == "sgd-compare":
        try:
            sgd = SgdConfig(step_length=args.gamma, max_iters=args.iters, record_stride=args.stride)
        except WishartQBQError as exc:
            raise ConfigError(str(exc)) from exc
        return ExperimentConfig(Experiment.SGD_COMPARE, sgd=sgd, norm=args.norm, cond=args.cond, **common)
    return ExperimentConfig(Experiment.MOMENT_CHECK, identity=args.identity, **common)


@contextlib.contextmanager
def _open_out(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _fmt(v):
    return repr(float(v))


def _metadata(fh, items):
    for key, value in items:
        fh.write(f"# {key}={value}\n")


def _base_meta(args):
    return [("command", args.command), ("n", args.n), ("k", args.k), ("seed", args.seed), ("runs", args.runs)]


def cmd_moment_convergence(cfg: ExperimentConfig, args):
    with _open_out(cfg.output_path) as fh:
        rows = moment_convergence(cfg)
        _metadata(fh, _base_meta(args) + [
            ("grid", ",".join(map(str, cfg.sample_grid))),
            ("sampling", "nested"),
            ("error_norm", "spectral"),
            ("std", "population"),
        ])
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CONVERGENCE_HEADER)
        for r in rows:
            w.writerow([r.m, _fmt(r.mean_rel_err), _fmt(r.std_rel_err)])
    if len(rows) > 1:
        slope = loglog_slope([r.m for r in rows], [r.mean_rel_err for r in rows])
        print(f"log-log slope of mean relative error: {slope:.3f}", file=sys.stderr)
    return EXIT_OK


def cmd_sgd_compare(cfg: ExperimentConfig, args):
    with _open_out(cfg.output_path) as fh:
        runs = sgd_compare(cfg)
        _metadata(fh, _base_meta(args) + [
            ("iters", cfg.sgd.max_iters),
            ("gamma", _fmt(cfg.sgd.step_length)),
            ("cond", _fmt(cfg.cond)),
            ("norm", _fmt(cfg.norm)),
            ("stride", cfg.sgd.record_stride),
            ("layout", "run-major; rows of run r follow those of run r-1; iter restarts per run and method"),
            ("rows_per_run", 2 * len(runs[0][Method.SGD].records)),
        ])
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SGD_HEADER)
        for run in runs:
            for method in (Method.SGD, Method.ASGD):
                for r in run[method].records:
                    w.writerow([method.value, r.iter, _fmt(r.grad_norm), _fmt(r.dist_opt),
                                _fmt(r.noise_mean_err), _fmt(r.cov_dist)])
    wins = asgd_wins(runs)
    print(f"ASGD lower and steadier than SGD in {sum(wins)}/{len(wins)} runs", file=sys.stderr)
    return EXIT_OK


def cmd_moment_check(cfg: ExperimentConfig, args):
    with _open_out(cfg.output_path) as fh:
        results = moment_check(cfg)
        passed = sum(r.passed for r in results)
        fh.write(f"moment-check n={cfg.n} k={cfg.k} runs={len(results)} "
                 f"{'identity' if cfg.identity else 'random'} threshold=1e-10\n")
        for r in results:
            line = (f"stream={r.seed.stream_id} max_path_err={r.max_path_err:.3e} "
                    f"second_moment_err={r.second_moment_err:.3e} {'PASS' if r.passed else 'FAIL'}")
            if cfg.n == 1:
                line += " " + " ".join(f"{k}={v[0, 0]:.17g}" for k, v in r.values.items())
            fh.write(line + "\n")
        worst = max(max(r.max_path_err, r.second_moment_err) for r in results)
        fh.write(f"max error {worst:.3e}: {passed}/{len(results)} PASS\n")
        fh.write(("PASS" if passed == len(results) else "FAIL") + "\n")
    return EXIT_OK if passed == len(results) else EXIT_FAIL


COMMANDS = {
    "moment-convergence": cmd_moment_convergence,
    "sgd-compare": cmd_sgd_compare,
    "moment-check": cmd_moment_check,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        log.info("running %s", args.command)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"error[config]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return EXIT_IO
    except WishartQBQError as exc:
        print(f"error[{exc.category}]: {exc}", file=sys.stderr)
        return EXIT_CONFIG if isinstance(exc, ValueError) else EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
