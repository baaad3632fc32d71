"""Command line entry point: ``qgbasis <experiment> [options]``.

Exit codes: 0 success, 1 validation error, 2 numerical failure, 3 budget refusal.
"""
import argparse
import logging
import sys
import time

from ..errors import BudgetExceeded, NumericalError, ValidationError
from . import config as config_mod
from . import experiments
from .output import format_cell, write_csv

log = logging.getLogger("qgbasis")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_BUDGET = 0, 1, 2, 3

# experiment-specific flags: (flag, dest, type, nargs)
PARAM_FLAGS = {
    "dirichlet": [("--gammas", "gammas", float, "+"), ("--Ns", "Ns", int, "+")],
    "babenko": [("--alpha", "alpha", float, None), ("--maxfreq", "maxfreq", int, None),
                ("--Ns", "Ns", int, "+"), ("--samples", "samples", int, None),
                ("--sign-trials", "sign_trials", int, None)],
    "pair": [("--alphas", "alphas", float, "+"), ("--Ns", "Ns", int, "+")],
    "th2": [("--alpha", "alpha", float, None), ("--kmax", "kmax", int, None),
            ("--trials", "qg_trials", int, None)],
    "seqspace": [("--Nmax", "Nmax", int, None), ("--kmax", "kmax", int, None)],
    "bounds": [("--K-max", "K_max", float, None), ("--K-points", "K_points", int, None)],
    "olevskii-build": [("--inner", "inner", str, None), ("--alpha", "alpha", float, None),
                       ("--kmax", "kmax", int, None)],
    "kn": [("--gram", "gram", str, None), ("--Ns", "Ns", int, "+"),
           ("--budget", "budget", int, None), ("--mode", "mode", str, None)],
    "selftest": [],
}


def _u64(text):
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML config document")
    common.add_argument("--seed", type=_u64, help="master seed (unsigned 64-bit)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--threads", type=int, help="worker threads")
    common.add_argument("--csv", dest="csv", action="store_true", default=None,
                        help="write CSV tables (default)")
    common.add_argument("--no-csv", dest="csv", action="store_false")
    common.add_argument("--svg", dest="svg", action="store_true", default=None,
                        help="also render SVG figures")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="qgbasis",
                                     description="Quasi-greedy basis experiments.")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name, flags in PARAM_FLAGS.items():
        sp = sub.add_parser(name, parents=[common])
        for flag, dest, typ, nargs in flags:
            sp.add_argument(flag, dest=f"param_{dest}", type=typ, nargs=nargs)
    return parser


def _print_summary(result, elapsed):
    print(f"experiment={result.experiment}")
    for k in sorted(result.summary):
        print(f"  {k} = {format_cell(result.summary[k])}")
    for name, f in sorted(result.fits.items()):
        print(f"  fit[{name}]: {f.model} exponent={f.exponent:.6g} "
              f"constant={f.constant:.6g} r2={f.r2:.6g}")
    print(f"  elapsed_s = {elapsed:.3f}")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    params = {k[6:]: v for k, v in vars(args).items() if k.startswith("param_")}
    common = {"seed": args.seed, "out": args.out, "threads": args.threads,
              "csv": args.csv, "svg": args.svg}
    try:
        cfg = config_mod.build_config(args.experiment, args.config, common, params)
        t0 = time.perf_counter()
        result = experiments.run(cfg)
        elapsed = time.perf_counter() - t0
        _print_summary(result, elapsed)
        if cfg.csv:
            for p in write_csv(result, cfg.out):
                print(f"  wrote {p}")
        if cfg.svg and result.figures:
            from .plotting import write_svg
            for p in write_svg(result, cfg.out):
                print(f"  wrote {p}")
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except BudgetExceeded as exc:
        print(f"budget refused: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    if args.experiment == "selftest" and not result.summary.get("passed"):
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
