"""Effective eigenvalues against excitation number, with the large-c power-law fit."""
import argparse
import csv
import sys
from fractions import Fraction

import numpy as np

from tavis_lab import BlockSpec, HalfInt, full_eigensystem


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--r", default="12.5")
    ap.add_argument("--c-max-factor", type=int, default=20, help="sweep c from -r to this multiple of r")
    ap.add_argument("--jlist", default="0,1,2,5")
    args = ap.parse_args()
    r = HalfInt.of(args.r)
    js = [int(j) for j in args.jlist.split(",")]
    cs = [r.fraction() * -1 + k for k in range(int((args.c_max_factor + 1) * r.fraction()) + 1)]
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["c", "j", "q"])
    tail = []
    for c in cs:
        spec = BlockSpec(r, c)
        q = full_eigensystem(spec).spectrum.q
        for j in js:
            if j < q.size:
                w.writerow([str(Fraction(c)), j, repr(float(q[j]))])
        if c >= 10 * r.fraction():
            tail.append((float(c), float(q[0])))
    if len(tail) > 2:
        c, q0 = np.array(tail).T
        slope = np.polyfit(np.log(c), np.log(q0), 1)[0]
        print(f"# ground-state exponent for c >= 10r: {slope:.4f}", file=sys.stderr)


if __name__ == "__main__":
    main()
