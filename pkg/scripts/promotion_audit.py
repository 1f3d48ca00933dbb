"""Measured promotion of (k, r)-trees next to the two closed-form recurrences.

The lemma recurrence charges the spliced leftmost node of each B_i at weight
2^-r; in the built tree that node sits at depth r-1, so its promotion is worth
2^-(r-1). The scheme recurrence uses the larger weight and matches exactly.
"""

import argparse
import csv
import sys

from gflab.patterns import (KrTreeSpec, build_kr_tree, predicted_promotion_scheme,
                            predicted_promotion_strong, promote_kr, promotion_main_term,
                            strong_alpha)


def main():
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--k", type=int, nargs="+", default=[2, 3, 4, 5])
    ap.add_argument("--r-max", type=int, default=6)
    args = ap.parse_args()
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["k", "r", "measured", "lemma", "scheme", "delta", "alpha_r", "lemma_ok", "scheme_ok"])
    for k in args.k:
        for r in range(args.r_max + 1):
            _, rep = promote_kr(build_kr_tree(KrTreeSpec(k, r)))
            lemma, scheme = predicted_promotion_strong(k, r), predicted_promotion_scheme(k, r)
            delta = rep.average - promotion_main_term(k, r)
            w.writerow([k, r, rep.average, lemma, scheme, delta, strong_alpha(k) ** r,
                        rep.average == lemma, rep.average == scheme])


if __name__ == "__main__":
    main()
