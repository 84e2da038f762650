"""covertjam-plot: turn sweep CSVs into figures."""

import argparse
import sys

from .render import DEFAULT_GROUP_KEYS, METRICS, ColumnError, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covertjam-plot",
        description="Plot covertness or BER curves from attack-sweep CSV files",
    )
    parser.add_argument("--csv", nargs="+", required=True, help="input CSV file(s)")
    parser.add_argument("--metric", required=True, choices=METRICS)
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--group-by", default=",".join(DEFAULT_GROUP_KEYS),
                        help="comma-separated grouping columns (one curve per group)")
    parser.add_argument("--title", default="")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    keys = tuple(k.strip() for k in args.group_by.split(",") if k.strip())
    spec = FigureSpec(csv_paths=tuple(args.csv), metric=args.metric,
                      out_path=args.out, group_keys=keys, title=args.title)
    try:
        out = render(spec)
    except (ColumnError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
