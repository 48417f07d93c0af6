"""Command-line front ends: render-region and render-verify."""

from __future__ import annotations

import argparse
import glob
import sys

from .render import RegionFormatError, render_region, render_verify_summary


def main_region(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render-region", description="Render a rate-region CSV into a figure."
    )
    parser.add_argument("--in", dest="inp", required=True, help="RegionCurve CSV path")
    parser.add_argument("--out", required=True, help="output image (svg/png)")
    parser.add_argument("--title", default=None)
    args = parser.parse_args(argv)
    try:
        summary = render_region(args.inp, args.out, title=args.title)
    except RegionFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        f"wrote {args.out} (outer={summary['outer_points']}, "
        f"inner={summary['inner_points']}, markers={len(summary['markers'])})"
    )
    return 0


def main_verify(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render-verify", description="Summarize verification reports as a bar chart."
    )
    parser.add_argument("--in", dest="inp", required=True,
                        help="report JSON path or glob, e.g. 'reports/*.json'")
    parser.add_argument("--out", required=True, help="output image (svg/png)")
    args = parser.parse_args(argv)
    paths = sorted(glob.glob(args.inp)) or [args.inp]
    try:
        summary = render_verify_summary(paths, args.out)
    except RegionFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out} ({len(summary['families'])} families)")
    return 0


if __name__ == "__main__":
    sys.exit(main_region())
