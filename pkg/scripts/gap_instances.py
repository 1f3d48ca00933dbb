"""Build the subsequence and reversal instances and report GF's cost ratios."""

import argparse
from fractions import Fraction

from gflab.enforce import build_reversal_instance, build_subsequence_instance
from gflab.experiments import ratio_limit
from gflab.gf import gf_serve


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--r", type=int, default=6)
    ap.add_argument("--reps", type=int, default=10_000)
    ap.add_argument("--export", default=None, help="stem for .bin/.json dumps of both instances")
    args = ap.parse_args()
    sub = build_subsequence_instance(args.r, args.reps)
    t0 = sub.trees["T0"]
    full = gf_serve(t0, sub.sequence, keep_steps=False)[0]
    part = gf_serve(t0, sub.marked_sequence(), keep_steps=False)[0]
    rev = build_reversal_instance(args.r, args.reps)
    fwd = gf_serve(t0, rev.sequence, keep_steps=False)[0]
    bwd = gf_serve(t0, rev.sequence.reversed(), keep_steps=False)[0]
    print(f"n={sub.n}  limit {float(ratio_limit(args.r)):.6f}")
    print(f"subsequence  cost(X')/cost(X)     = {float(Fraction(part.total, full.total)):.6f}")
    print(f"reversal     cost(rev X)/cost(X)  = {float(Fraction(bwd.total, fwd.total)):.6f}")
    if args.export:
        sub.export(f"{args.export}_subsequence")
        rev.export(f"{args.export}_reversal")


if __name__ == "__main__":
    main()
