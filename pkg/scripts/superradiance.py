"""Mean photon number after N excited molecules start in an empty cavity."""
import argparse
import csv
import sys

import numpy as np

from tavis_lab.dynamics import superradiant_vacuum_EmEp


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, nargs="+", default=[1, 2, 4, 8])
    ap.add_argument("--kappa", type=float, default=1.0)
    ap.add_argument("--t-max", type=float, default=10.0, help="in units of 1/|kappa|")
    ap.add_argument("--samples", type=int, default=201)
    args = ap.parse_args()
    t = np.linspace(0, args.t_max / args.kappa, args.samples)
    series = [superradiant_vacuum_EmEp(N, t, args.kappa).values for N in args.N]
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["t"] + [f"N={N}" for N in args.N])
    for i, ti in enumerate(t):
        w.writerow([repr(float(ti))] + [repr(float(s[i])) for s in series])


if __name__ == "__main__":
    main()
