"""Run the invariant sweep and print one line per check; exit 1 on any failure."""

import argparse
import sys

from gflab.experiments import cmd_verify


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--level", choices=("fast", "full"), default="full")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    results = cmd_verify(args.level, seed=args.seed)
    for r in results:
        print(f"{'PASS' if r.ok else 'FAIL'}  {r.name:<26} {r.detail}")
    sys.exit(0 if all(r.ok for r in results) else 1)


if __name__ == "__main__":
    main()
