"""Finite-difference deviation of the exact derivatives as the step shrinks.

Prints deviation(h) and the ratio deviation(2h)/deviation(h) for each
catalog spec and quantity. Second-order truncation shows up as a ratio of
4 until roundoff (about eps/h) takes over; metrics that are polynomial of
degree two or less have no truncation error at all and show a ratio of
about 1 throughout.

    python scripts/fd_convergence.py --seed 0
"""

import argparse

import numpy as np

from tangentlift import oracle
from tangentlift.sampling import sample_bundle_points
from tangentlift.specfile import CATALOG, catalog_spec

STEPS = [1e-3 / 2**k for k in range(8)]


def first_interior(spec, seed, h):
    for q in sample_bundle_points(spec, 64, seed):
        lo = np.array([a for a, _ in spec.domain])
        hi = np.array([b for _, b in spec.domain])
        if np.all(q.x - h >= lo) and np.all(q.x + h <= hi) and np.all(np.abs(q.y) + h <= spec.fiber[1]):
            return q
    raise RuntimeError("no interior sample")


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    for sname in CATALOG:
        spec = catalog_spec(sname)
        q = first_interior(spec, args.seed, max(STEPS))
        for quantity in oracle.FD_QUANTITIES:
            devs = [oracle.finite_difference_audit(spec, quantity, q, h).max_deviation for h in STEPS]
            print(f"{sname} / {quantity}")
            for k, (h, d) in enumerate(zip(STEPS, devs)):
                ratio = devs[k - 1] / d if k and d > 0 else float("nan")
                print(f"    h={h:9.3e}  deviation={d:10.3e}  ratio={ratio:6.2f}")


if __name__ == "__main__":
    main()
