"""
Command-line front end.

Subcommands:
  gen-constellation --config F --out F     orbital-element CSV
  track --config F --pair-seed N --out DIR single-pass traces + trajectory
  campaign --config F [--trials N] --out DIR pooled CDFs over many pairs
  cdf --in DIR --out F                     rebuild CDFs from exported traces

Exit codes: 0 success, 2 bad configuration, 3 no visible satellite pair,
4 I/O failure.  Any scalar config key can be overridden via environment
variables (see config module).
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import __version__
from .config import load_scenario
from .errors import ConfigError, NoVisiblePairError
from .harness import (
    cdfs_from_trace_dir,
    export_campaign,
    export_cdfs,
    export_constellation_csv,
    export_pass,
    run_campaign,
    run_pass_detailed,
)
from .orbits import generate_constellation

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_PAIR = 3
EXIT_IO = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdxtrack",
        description="Full-duplex beam tracking simulator for LEO ground terminals",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-constellation", help="write the constellation's orbital elements")
    p.add_argument("--config", required=True, help="scenario TOML or manifest JSON")
    p.add_argument("--out", required=True, help="output CSV path")

    p = sub.add_parser("track", help="run one pass and export its traces")
    p.add_argument("--config", required=True)
    p.add_argument("--pair-seed", type=int, required=True, help="seed selecting the satellite pair")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("campaign", help="run many passes and export pooled CDFs")
    p.add_argument("--config", required=True)
    p.add_argument("--trials", type=int, default=None, help="override campaign.trials")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("cdf", help="pool trace CSVs from a directory into a CDF CSV")
    p.add_argument("--in", dest="in_dir", required=True, help="directory holding trace_*.csv files")
    p.add_argument("--out", required=True, help="output CSV path")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "gen-constellation":
            scenario = load_scenario(args.config)
            con = generate_constellation(scenario.shells, scenario.constellation_seed)
            export_constellation_csv(args.out, con)
        elif args.command == "track":
            scenario = load_scenario(args.config)
            result = run_pass_detailed(scenario, args.pair_seed)
            export_pass(result, args.out, scenario)
        elif args.command == "campaign":
            scenario = load_scenario(args.config)
            if args.trials is not None:
                if args.trials < 1:
                    raise ConfigError("--trials must be >= 1")
                scenario = replace(scenario, trials=args.trials)
            result = run_campaign(scenario)
            export_campaign(result, args.out, scenario)
            for i, msg in result.failures:
                print(f"trial {i} skipped: {msg}", file=sys.stderr)
        elif args.command == "cdf":
            try:
                summaries = cdfs_from_trace_dir(args.in_dir)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            export_cdfs(summaries, args.out)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NoVisiblePairError as exc:
        print(f"no visible pair: {exc}", file=sys.stderr)
        return EXIT_NO_PAIR
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
