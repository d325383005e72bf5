"""Command line: render one figure kind from one results CSV."""

from __future__ import annotations

import argparse
import sys

from scora_plots.render import KINDS, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scora-plots",
        description="Render mean curves with 95% CI bands from experiment CSVs.",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    cmd = commands.add_parser("render", help="render one figure")
    cmd.add_argument("--kind", required=True, choices=sorted(KINDS))
    cmd.add_argument("--in", dest="input_csv", required=True, help="results CSV path")
    cmd.add_argument("--out", dest="output_image", required=True, help="image path")
    cmd.add_argument("--group-by", help="override the curve grouping column")
    return parser


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    spec = FigureSpec(
        input_csv=args.input_csv,
        kind=args.kind,
        output_image=args.output_image,
        group_by=args.group_by,
    )
    try:
        path = render(spec)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


def main():
    sys.exit(cli_main())
