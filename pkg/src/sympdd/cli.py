"""Command line interface.

    sympdd <homogenize|suppress|eulerian|verify|fock-check>
           [--config FILE] [--n N] [--ns N] [--ne-max N] [--k X]
           [--tau LIST] [--t X] [--trials N] [--seed N] [--out PATH]

Flags override config-file values.  Exit codes: 0 success, 1 verification
failure, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from .experiments import (ExperimentConfig, UsageError, config_from_mapping,
                          parse_config_text, run_eulerian, run_fock_check,
                          run_homogenization_sweep, run_suppression_sweep,
                          run_verify)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3

MODES = ("homogenize", "suppress", "eulerian", "verify", "fock-check")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sympdd",
        description=("Batch simulations of random dynamical decoupling, "
                     "homogenization and decoherence suppression for "
                     "quadratic bosonic systems."))
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        p = sub.add_parser(mode)
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--n", type=int, help="number of modes")
        p.add_argument("--ns", type=int, help="system modes (suppress)")
        p.add_argument("--ne-max", dest="ne_max", type=int,
                       help="largest environment size (suppress)")
        p.add_argument("--k", type=float, help="entry scale of the random model")
        p.add_argument("--tau", help="pulse spacing, comma-separated list for sweeps")
        p.add_argument("--t", type=float, help="total evolution time")
        p.add_argument("--trials", type=int, help="Monte Carlo trajectories per point")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--reps", type=int, help="cycle repetitions (eulerian)")
        p.add_argument("--quick", action="store_true",
                       help="reduced-size verification profile")
        p.add_argument("--out", help="output path (CSV / schedule)")
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    mapping = {}
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                mapping = parse_config_text(fh.read())
        except OSError as exc:
            raise UsageError(f"cannot read config file: {exc}") from exc
    for key in ("n", "ns", "ne_max", "k", "tau", "t", "trials", "seed", "reps"):
        value = getattr(args, key, None)
        if value is not None:
            mapping[key] = str(value)
    if args.quick:
        mapping["quick"] = "true"
    return config_from_mapping(args.mode, mapping, out=args.out)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        if args.mode == "homogenize":
            path = run_homogenization_sweep(cfg)
            print(f"wrote {path}")
            return EXIT_OK
        if args.mode == "suppress":
            path = run_suppression_sweep(cfg)
            print(f"wrote {path}")
            return EXIT_OK
        if args.mode == "eulerian":
            summary = run_eulerian(cfg)
            print(f"wrote {summary['schedule']}")
            print(f"cycle length {summary['cycle_length']}, tau {summary['tau']:.6g}")
            print(f"averaged rotation rate {summary['lambda']:.12g}, "
                  f"symmetric residual {summary['sym_residual']:.3e}")
            for reps, dev in summary["deviations"].items():
                print(f"deviation from homogenized rotation at N={reps}: {dev:.6e}")
            return EXIT_OK
        if args.mode == "verify":
            results = run_verify(cfg)
        else:
            results = run_fock_check(cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO

    failures = 0
    for item in results:
        status = "PASS" if item["ok"] else "FAIL"
        detail = f"  ({item['detail']})" if item["detail"] else ""
        print(f"{status} {item['name']}{detail}")
        failures += not item["ok"]
    print(f"{len(results) - failures}/{len(results)} checks passed")
    return EXIT_OK if failures == 0 else EXIT_VERIFY_FAILED


if __name__ == "__main__":
    sys.exit(main())
