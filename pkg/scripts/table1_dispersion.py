"""Ground-state photon dispersion: exact solver vs the four limiting forms."""
import argparse
import math

from tavis_lab import BlockSpec, full_eigensystem
from tavis_lab.approx import diffeq_sigma2

COLUMNS = [
    ("c = -r + eps", 200, -180, lambda r, c: (c + r) / 4),
    ("r >> c", 400, 20, lambda r, c: r / math.sqrt(3) * (1 + 2 * c / (math.sqrt(3) * r)) / math.sqrt(6)),
    ("r = c", 300, 300, lambda r, c: 4 * c / 3 / (2 * math.sqrt(3))),
    ("c >> r", 10, 1000, lambda r, c: r / 2),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.parse_args()
    print(f"{'regime':<14} {'r':>6} {'c':>6} {'exact':>10} {'continuum':>10} {'limit':>10} {'rel':>7}")
    for name, r, c, limit in COLUMNS:
        spec = BlockSpec(r, c)
        exact = full_eigensystem(spec).n_var[0]
        lim = limit(r, c)
        print(f"{name:<14} {r:>6} {c:>6} {exact:>10.4f} {diffeq_sigma2(spec):>10.4f} {lim:>10.4f} "
              f"{abs(exact - lim) / lim:>7.3f}")


if __name__ == "__main__":
    main()
