"""Command-line interface: verification sweeps, experiments, and point-set export."""

import argparse
import sys

from .experiments import (
    ConfigError,
    ExperimentConfig,
    emit_report,
    run_experiment,
    spiral_experiment,
)
from .generators import SPIRAL_SCALE, spiral_points
from .io import save_matrix
from .verify import run_verify

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rpchol",
        description="Pivoted partial Cholesky low-rank approximation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the randomized verification sweeps")
    p.add_argument("--sweep", type=int, default=200, help="suite size (0 skips all checks)")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("run", help="run an experiment described by a JSON config")
    p.add_argument("--config", required=True, help="path to the JSON config")

    p = sub.add_parser("spiral", help="run the six-rule spiral-kernel comparison")
    p.add_argument("--config", help="optional JSON config overriding the defaults")
    p.add_argument("--out", help="output path (defaults to the config's, else stdout)")
    p.add_argument("--format", choices=("csv", "markdown"))

    p = sub.add_parser("points", help="write the spiral point set as CSV")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--scale", type=float, default=SPIRAL_SCALE)

    return parser


def _cmd_verify(args):
    results, passed = run_verify(sweep=args.sweep, seed=args.seed)
    if not results:
        print("warning: no checks run (sweep size 0)")
        return EXIT_OK
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.name:<{width}}  {status}  {r.detail}")
        if not r.passed and r.failure is not None:
            path = f"rpchol-failure-{r.name}.txt"
            try:
                save_matrix(r.failure, path)
                print(f"{'':<{width}}  reproduction matrix written to {path}")
            except (ValueError, OSError):
                pass
    print(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def _cmd_run(args):
    config = ExperimentConfig.from_json_file(args.config)
    report = run_experiment(config)
    text = emit_report(report)
    if report.config.out:
        print(f"report written to {report.config.out}")
    else:
        print(text, end="")
    return EXIT_OK


def _cmd_spiral(args):
    if args.config:
        config = ExperimentConfig.from_json_file(args.config)
        report = spiral_experiment(config)
    else:
        report = spiral_experiment()
    text = emit_report(report, fmt=args.format, path=args.out)
    if args.out or report.config.out:
        print(f"report written to {args.out or report.config.out}")
    else:
        print(text, end="")
    return EXIT_OK


def _cmd_points(args):
    if args.n < 1 or args.n % 2 != 0:
        raise ConfigError(f"n: must be a positive even count, got {args.n}")
    half = args.n // 2
    pts = spiral_points(
        n_total=args.n, cluster_split=(half, args.n - half), scale=args.scale, rng=args.seed
    )
    pts.to_csv(args.out)
    print(f"{pts.count} points written to {args.out}")
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    handlers = {
        "verify": _cmd_verify,
        "run": _cmd_run,
        "spiral": _cmd_spiral,
        "points": _cmd_points,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    console_main()
