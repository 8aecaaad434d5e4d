"""rkfigures render --figure <kind> --in <csv...> --out <path> [--style <file>]

Emits <out>.png and <out>.svg.  Exits 2 on schema mismatches or missing
inputs, 4 on I/O failures.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import FIGURE_KINDS, render
from .schemas import SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rkfigures")
    subs = parser.add_subparsers(dest="command", required=True)
    cmd = subs.add_parser("render", help="render one figure kind")
    cmd.add_argument("--figure", required=True, choices=sorted(FIGURE_KINDS))
    cmd.add_argument("--in", dest="inputs", nargs="+", required=True)
    cmd.add_argument("--out", required=True, help="output path base (no suffix)")
    cmd.add_argument("--style", help="matplotlib style file")
    cmd.add_argument("--fit", dest="fit_path",
                     help="optional FitResult JSON overlay (magic figure)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out_base = args.out
    for suffix in (".png", ".svg"):
        if out_base.endswith(suffix):
            out_base = out_base[: -len(suffix)]
    try:
        for path in args.inputs:
            if not Path(path).exists():
                raise SchemaError(f"input file {path} does not exist")
        written = render(
            args.figure, args.inputs, out_base,
            style=args.style, fit_path=args.fit_path,
        )
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: i/o: {exc}", file=sys.stderr)
        return 4
    for path in written:
        print(path, file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
