"""``subband-adapt`` command line.

Exit codes: 0 success, 1 validation/parse/I-O error, 2 numerical failure.
"""

import argparse
import sys

import numpy as np

from . import config as config_mod
from .errors import NotPositiveDefinite, ParseError, ValidationError
from .filterbank import design_bank, validate_bank
from .presets import PRESETS, run_preset
from .signals import gen_target
from .sim import THREADS_ENV, convergence_metrics, run_ensemble

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERIC = 2


def _add_threads(p):
    p.add_argument(
        "--threads",
        default=None,
        help=f"worker threads, integer or 'auto' (fallback: ${THREADS_ENV}, else 1)",
    )


def _add_overrides(p):
    p.add_argument(
        "-s", "--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
        help="override a config value; may be repeated",
    )


def build_parser():
    parser = argparse.ArgumentParser(prog="subband-adapt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one Monte-Carlo experiment and write its MSE curve")
    p.add_argument("config", nargs="?", help="experiment file ([section] key = value)")
    _add_overrides(p)
    p.add_argument("-o", "--output", required=True, help="CSV file for the curve")
    p.add_argument("--threshold", type=float, default=-20.0, help="dB level for the convergence report")
    _add_threads(p)

    p = sub.add_parser("preset", help="reproduce one of the figure experiment grids")
    p.add_argument("name", choices=PRESETS)
    p.add_argument("--scale", type=float, default=0.1, help="fraction of 1000 runs (default 0.1)")
    p.add_argument("-o", "--output-dir", required=True)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--samples", type=int, default=20000)
    _add_threads(p)

    p = sub.add_parser("design-bank", help="design a pseudo-QMF analysis bank and export it")
    p.add_argument("-M", "--bands", type=int, required=True)
    p.add_argument("-N", "--length", type=int, default=None, help="filter length (default by M)")
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("gen-target", help="generate a synthetic target impulse response")
    p.add_argument("kind", help="quasi-sparse | sparse | dispersive")
    p.add_argument("-L", "--length", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nonzeros", type=int, default=8)
    p.add_argument("--decay", type=float, default=32.0)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("validate", help="check a config file and report its analysis bank")
    p.add_argument("config", nargs="?")
    _add_overrides(p)
    return parser


def _cmd_run(args):
    cfg = config_mod.parse_config(args.config, args.overrides)
    curve = run_ensemble(cfg, args.threads)
    curve.to_csv(args.output)
    m = convergence_metrics(curve, args.threshold)
    reached = "never" if m.samples_to_threshold is None else f"at sample {m.samples_to_threshold}"
    print(f"wrote {args.output} ({len(curve)} samples, {cfg.num_runs} runs)")
    print(f"{args.threshold:g} dB reached {reached}; terminal {m.terminal_db:.2f} dB "
          f"(noise floor {curve.floor_db:.2f} dB)")


def _cmd_preset(args):
    paths = run_preset(
        args.name, args.scale, args.output_dir,
        master_seed=args.seed, num_samples=args.samples, threads=args.threads,
    )
    for path in paths:
        print(path)


def _cmd_design_bank(args):
    bank = design_bank(args.bands, args.length)
    bank.to_csv(args.output)
    report = validate_bank(bank)
    print(f"wrote {args.output} ({bank.filter_len} x {bank.num_bands})")
    print(f"power-complementarity residual: {report.power_complementarity_residual:.6g}")
    print("band peaks (rad): " + " ".join(f"{w:.4f}" for w in report.band_peak_frequencies))


def _cmd_gen_target(args):
    target = gen_target(args.kind, args.length, args.seed, nonzeros=args.nonzeros, decay=args.decay)
    target.to_csv(args.output)
    print(f"wrote {args.output} ({target.length} taps, {np.count_nonzero(target.taps)} nonzero, "
          f"energy {target.energy:.6g})")


def _cmd_validate(args):
    cfg = config_mod.parse_config(args.config, args.overrides)
    f = cfg.filter
    report = validate_bank(f.bank)
    print(f"variant {f.variant.value}: L={f.length} M={f.num_bands} N={f.filter_len} "
          f"mu={f.params.mu:g} delta={f.params.delta:g} tau={f.params.tau:g}")
    print(f"weighting: {f.weighting}")
    print(f"target: {cfg.target.kind.value}; runs={cfg.num_runs} samples={cfg.num_samples} "
          f"seed={cfg.master_seed}")
    print(f"power-complementarity residual: {report.power_complementarity_residual:.6g}")
    print("band peaks (rad): " + " ".join(f"{w:.4f}" for w in report.band_peak_frequencies))
    print("invariants: ok")


COMMANDS = {
    "run": _cmd_run,
    "preset": _cmd_preset,
    "design-bank": _cmd_design_bank,
    "gen-target": _cmd_gen_target,
    "validate": _cmd_validate,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except (ValidationError, ParseError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        where = f" ({exc.filename})" if exc.filename else ""
        print(f"error: {exc.strerror or exc}{where}", file=sys.stderr)
        return EXIT_INVALID
    except (NotPositiveDefinite, FloatingPointError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
