"""CLI: figures <kind> --in <csv...> --out <path>."""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, FigureParseError, FigureSpec, render


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="figures", description=__doc__)
    ap.add_argument("kind", choices=KINDS)
    ap.add_argument("--in", dest="inputs", nargs="+", required=True, help="input CSV file(s)")
    ap.add_argument("--out", required=True, help="output image path")
    ap.add_argument("--logy", action="store_true", help="log scale for profile values")
    ns = ap.parse_args(argv)
    try:
        spec = FigureSpec(
            kind=ns.kind, inputs=ns.inputs, output=ns.out, style={"logy": ns.logy}
        )
        summary = render(spec)
    except FigureParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(" ".join(f"{k}={v}" for k, v in sorted(summary.items())))
    return 0


if __name__ == "__main__":
    sys.exit(main())
