"""Command-line interface: run, fit, validate.

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys

from hamsim.config import ConfigError, build_config, load_config, parse_value
from hamsim.experiments import run_experiment, run_fit, write_output
from hamsim.pauli import TermListParseError


def _parse_overrides(pairs) -> dict:
    overrides = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        key, _, text = pair.partition("=")
        overrides[key.strip()] = parse_value(key.strip(), text)
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hamsim",
        description="Hamiltonian-simulation benchmark laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a configured experiment")
    run.add_argument("config", help="experiment config file")
    run.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="KEY=VALUE", help="override a config key")
    run.add_argument("--out", help="output CSV path")
    run.add_argument("--jobs", type=int, default=1,
                     help="parallel worker processes")

    fit = sub.add_parser("fit", help="fit coefficient magnitudes of a term list")
    fit.add_argument("term_list", help="term-list file")
    fit.add_argument("--tail-quantile", type=float, default=-1.0,
                     help="fit the Pareto shape on the tail above this quantile")
    fit.add_argument("--out", help="optional output CSV path")

    val = sub.add_parser("validate", help="check a config file")
    val.add_argument("config", help="experiment config file")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "validate":
            load_config(args.config)
            print("ok")
            return 0
        if args.command == "fit":
            overrides = {"experiment": "fit-coefficients",
                         "input_files": [args.term_list],
                         "tail_quantile": args.tail_quantile}
            if args.out:
                overrides["output"] = args.out
            config = build_config({}, overrides)
            try:
                records = run_fit(config)
            except (OSError, TermListParseError, ValueError) as exc:
                print(f"error: {exc}", file=sys.stderr)
                return 2
            for r in records:
                print(f"{r.source}: L={r.term_count} n_qubits={r.n_qubits} "
                      f"sigma2={r.sigma2_log:.6g} pareto_a={r.pareto_shape:.6g}")
            if args.out:
                write_output(config, records)
                print(f"wrote {args.out}")
            return 0
        # run
        overrides = _parse_overrides(args.overrides)
        if args.out:
            overrides["output"] = args.out
        config = load_config(args.config, overrides)
        try:
            records = run_experiment(config, jobs=max(args.jobs, 1))
            path = write_output(config, records)
        except (OSError, ValueError, RuntimeError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        print(f"wrote {path} ({len(records)} records)")
        return 0
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


def entry_point() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry_point()
