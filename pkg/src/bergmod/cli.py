"""Command-line entry point: one subcommand per scenario.

Exit status is 0 when every check passes, 1 when a tolerance or an
expected verdict fails, and 2 for unusable input (bad config, invalid
boundary point, degenerate varieties).
"""

import argparse
import csv
import datetime
import json
import os
import sys

import numpy as np

from . import __version__
from .errors import BergmodError
from .io import ConfigError, dumps_report, load_config
from .scenarios import RUNNERS, worker_count

EXIT_OK, EXIT_FAILED, EXIT_INPUT = 0, 1, 2


def _ladder(text):
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"ladder must be comma-separated numbers, got {text!r}")
    if not values or any(not 0 < v < 1 for v in values):
        raise argparse.ArgumentTypeError("ladder entries must lie in (0, 1)")
    return values


def build_parser():
    parser = argparse.ArgumentParser(prog="bergmod", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="scenario", required=True)
    for name in RUNNERS:
        p = sub.add_parser(name, help=f"run the {name} scenario")
        p.add_argument("--config", metavar="PATH", help="JSON config (defaults are used for missing keys)")
        p.add_argument("--out", metavar="DIR", default=".", help="directory for the report and sweep CSV")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--ladder", type=_ladder, help='rho_max ladder, e.g. "0.9,0.99,0.999"')
    return parser


def header():
    return {
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "version": __version__,
        "numpy": np.__version__,
    }


def write_outputs(name, result, out_dir):
    """Write ``<name>.json`` and, if the scenario has one, ``<name>_sweep.csv``."""
    os.makedirs(out_dir, exist_ok=True)
    report = {
        "header": header(),
        "scenario": name,
        "results": result.results,
        "status": {"ok": result.ok, "failures": result.failures},
    }
    path = os.path.join(out_dir, f"{name}.json")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_report(report))
    paths = [path]
    if result.sweep_rows is not None:
        sweep = os.path.join(out_dir, f"{name}_sweep.csv")
        with open(sweep, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, quoting=csv.QUOTE_MINIMAL)
            writer.writerow(result.sweep_header)
            writer.writerows(result.sweep_rows)
        paths.append(sweep)
    return paths


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        worker_count()
        config = load_config(args.config) if args.config else {}
        config_scenario = config.get("scenario", args.scenario)
        if config_scenario != args.scenario:
            raise ConfigError(f"config is for {config_scenario!r}, not {args.scenario!r}")
        config["scenario"] = args.scenario
        if args.seed is not None:
            config["seed"] = args.seed
        if args.ladder is not None:
            config["ladder"] = args.ladder
        result = RUNNERS[args.scenario](config)
    except (BergmodError, ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"bergmod {args.scenario}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    for path in write_outputs(args.scenario, result, args.out):
        print(path)
    for failure in result.failures:
        print(f"FAIL {failure}", file=sys.stderr)
    return EXIT_OK if result.ok else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
