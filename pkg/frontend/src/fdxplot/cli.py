"""fdxplot: render figures from fdxtrack CSV exports.

  fdxplot trace --in DIR --out FILE [--metrics ...]   per-pass time traces
  fdxplot cdf   --in DIR --out FILE [--metrics ...]   pooled empirical CDFs

`trace` reads every trace_*.csv under DIR (one panel per metric, one line per
scheme, dashed 0 dB reference on the INR panel).  `cdf` reads DIR/cdf.csv
(or DIR itself when it is a file) and draws step curves.  Output format
follows the --out suffix: .png or .svg.
"""
from __future__ import annotations

import argparse
import sys

from . import __version__
from .figures import FigureSpec, render_cdf, render_trace
from .io import METRICS


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fdxplot", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for kind, default_help in (
        ("trace", "inr_db sinr_dl_db"),
        ("cdf", "inr_db snr_dl_db sinr_dl_db"),
    ):
        p = sub.add_parser(kind, help=f"render the {kind} figure")
        p.add_argument("--in", dest="in_dir", required=True, help="exported CSV directory")
        p.add_argument("--out", required=True, help="output image (.png or .svg)")
        p.add_argument(
            "--metrics",
            nargs="+",
            default=[],
            metavar="METRIC",
            help=f"panels to draw, among: {' '.join(METRICS)} (default: {default_help})",
        )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    spec_args = dict(in_dir=args.in_dir, kind=args.command, out_path=args.out, metrics=tuple(args.metrics))
    try:
        spec = FigureSpec(**spec_args)
        if args.command == "trace":
            render_trace(spec)
        else:
            render_cdf(spec)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
