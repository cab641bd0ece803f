"""Command-line entry point: ``cggibbs <command> --config FILE [--set key=value]...``.

The config file is INI-style: one ``key = value`` per line under a section
named after the command, e.g.::

    [sweep-scaling]
    d_grid = 2^4..2^9
    sweeps = 200
    out_dir = results/sweep

Exit codes: 0 success, 1 invalid configuration or input, 2 a checked
inequality failed, 3 runtime error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys

from . import experiments
from .data_io import DataFormatError

EXIT_OK, EXIT_CONFIG, EXIT_CHECK, EXIT_RUNTIME = 0, 1, 2, 3


def read_config(path, command: str) -> dict:
    parser = configparser.ConfigParser(interpolation=None)
    if path is not None:
        with open(path) as fh:
            parser.read_file(fh)
    if parser.has_section(command):
        return dict(parser.items(command))
    return {}


def apply_overrides(values: dict, overrides) -> dict:
    out = dict(values)
    for item in overrides or ():
        key, sep, val = item.partition("=")
        if not sep or not key.strip():
            raise experiments.ConfigError(f"--set expects key=value, got {item!r}")
        out[key.strip()] = val.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cggibbs", description="Coordinate-wise Gibbs benchmarks.")
    p.add_argument("command", choices=sorted(experiments.COMMANDS))
    p.add_argument("--config", help="INI file with a section named after the command")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config value (repeatable)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    cls, fn = experiments.COMMANDS[args.command]
    try:
        values = apply_overrides(read_config(args.config, args.command), args.set)
        cfg = experiments.build_config(cls, values)
    except (experiments.ConfigError, OSError, configparser.Error) as exc:
        print(f"cggibbs: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        summary = fn(cfg)
    except experiments.CheckFailed as exc:
        print(f"cggibbs: check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except (experiments.ConfigError, DataFormatError) as exc:
        print(f"cggibbs: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - map anything else to the runtime exit code
        logging.getLogger(__name__).debug("failure", exc_info=True)
        print(f"cggibbs: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if args.command != "theory-check":
        print(json.dumps(summary, indent=1, default=experiments._json_default))
    else:
        print(f"theory-check: {len(summary['instances'])} instances, all pass")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
