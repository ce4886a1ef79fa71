"""How far each approximate spectrum sits from the exact one, on representative blocks."""
import argparse

import numpy as np

from tavis_lab import BlockSpec, DomainError, full_eigensystem
from tavis_lab import approx

BLOCKS = [(25, 2500), (5, 25), (12.5, 127.5), (127.5, -102.5), (50, 0), (10, 5)]
METHODS = {
    "diffeq": approx.diffeq,
    "avgfield": approx.avgfield_closed,
    "avgfield-poly": approx.avgfield_spectrum_poly,
    "modtlm": approx.modtlm,
    "modtlm-corr": lambda s: approx.modtlm(s, corrected=True),
    "avgtlm": approx.avgtlm_spectrum,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--states", type=int, default=4, help="compare the lowest this many states")
    args = ap.parse_args()
    print(f"{'block':<16}" + "".join(f"{m:>14}" for m in METHODS))
    for r, c in BLOCKS:
        spec = BlockSpec(r, c)
        q = full_eigensystem(spec).spectrum.q
        cells = []
        for build in METHODS.values():
            try:
                res = build(spec)
            except DomainError:
                cells.append(f"{'-':>14}")
                continue
            k = min(args.states, res.q.size)
            dev = np.max(np.abs(res.q[:k] - q[:k])) / abs(q[0])
            cells.append(f"{dev:>14.2e}")
        print(f"{f'r={r} c={c}':<16}" + "".join(cells))


if __name__ == "__main__":
    main()
