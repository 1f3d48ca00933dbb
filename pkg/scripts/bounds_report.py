"""GF cost next to Wilber's bound, the optimal static tree and the promoted tree."""

import argparse
from pathlib import Path

from gflab.experiments import bounds_report, render


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--max-nodes", type=int, default=63)
    ap.add_argument("--out", default="results/bounds.csv")
    args = ap.parse_args()
    rows = bounds_report(args.seed, args.count, args.max_nodes)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(render(rows, "csv"))
    print(render(rows, "csv"), end="")


if __name__ == "__main__":
    main()
