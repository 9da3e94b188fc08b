"""Render one figure per invocation from a JSON spec."""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .figspec import PlotsError, load_spec
from .render import FORMATS, render


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="outpostlab-plots",
        description="draw a figure from outpostlab CSV/JSON outputs",
    )
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("--spec", required=True, help="JSON figure spec")
    ap.add_argument("--out", help="output image path (overrides the spec)")
    ap.add_argument(
        "--format", choices=FORMATS, dest="fmt",
        help="svg unless the output path says otherwise",
    )
    ap.add_argument("--dpi", type=int, default=150, help="raster resolution for png")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        path = render(load_spec(args.spec), out=args.out, fmt=args.fmt, dpi=args.dpi)
    except (PlotsError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"figure written to {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
