"""`render-figures --in <dir> --out <dir> [--figure <id>] [--fmt png|svg]`

Renders every known panel whose dataset is present in the input directory.
Exit codes: 0 success, 1 rendering failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys

from .panels import panels_for
from .render import RenderError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="render-figures",
        description="Render magnon-sense figure datasets to static images")
    parser.add_argument("--in", dest="in_dir", required=True,
                        help="directory of figure-data CSVs")
    parser.add_argument("--out", dest="out_dir", required=True,
                        help="directory for rendered images")
    parser.add_argument("--figure", default=None,
                        help="restrict to one figure id (fig2..fig5)")
    parser.add_argument("--fmt", choices=("png", "svg"), default="png")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        panels = panels_for(args.figure)
    except KeyError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    written = []
    for panel in panels:
        try:
            written.append(render(panel, args.in_dir, args.out_dir, args.fmt))
        except RenderError as exc:
            print(f"render error [{panel.name}]: {exc}", file=sys.stderr)
            return 1
    print(f"rendered {len(written)} panel(s) to {args.out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
