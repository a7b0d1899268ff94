"""CLI: python -m fair_nrm_plots --csv results.csv --out figures/ [--kinds ...]"""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, EmptySelectionError, SchemaError, render_all


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fair_nrm_plots",
        description="Render regret and fairness figures from a fair-nrm CSV",
    )
    parser.add_argument("--csv", required=True, help="experiment CSV path")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument(
        "--kinds", nargs="+", default=sorted(KINDS), choices=sorted(KINDS),
        help="figure kinds to render (default: all)",
    )
    parser.add_argument("--gamma", default=None, help="gamma_label filter (default: first)")
    parser.add_argument("--format", default="png", choices=["png", "svg"])
    args = parser.parse_args(argv)

    try:
        paths = render_all(args.csv, args.kinds, args.out, gamma_label=args.gamma, fmt=args.format)
    except (SchemaError, EmptySelectionError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in paths:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
