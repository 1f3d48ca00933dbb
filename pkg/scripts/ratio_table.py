"""Multiplicative gap: GF against the promoted static tree on weak (2, r) instances."""

import argparse
from pathlib import Path

from gflab.experiments import cmd_ratio_table, render


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--r", type=int, nargs="+", default=[1, 2, 3, 4, 5, 6, 7, 8])
    ap.add_argument("--reps", type=int, default=10_000)
    ap.add_argument("--closed-only", type=int, nargs="*", default=[12, 20, 40])
    ap.add_argument("--out", default="results/ratio_table.csv")
    args = ap.parse_args()
    rows = cmd_ratio_table(args.r, args.reps, max_queries=10 ** 9, closed_only=tuple(args.closed_only))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(render(rows, "csv"))
    for row in rows:
        print(f"r={row['r']:>2}  n={row['n']:>6}  ratio={row['ratio_float'] or '-':<20} "
              f"limit={float(row['ratio_limit_float']):.6f}")


if __name__ == "__main__":
    main()
