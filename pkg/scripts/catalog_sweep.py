"""Per-engine residual table for every catalog field and lift.

For each (spec, field, lift) prints the largest Lie-derivative residual seen
by the closed-form blocks, the generic assembly and the coordinate oracle,
plus the Killing verdict of each. Disagreements are marked with ``*``.

    python scripts/catalog_sweep.py --points 50 --seed 0
"""

import argparse

from tangentlift import killing as kl
from tangentlift.specfile import CATALOG, catalog_spec


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--points", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"{'spec':<15}{'field':<12}{'lift':<11}{'closed-form':>12}{'assembled':>12}{'oracle':>12}  killing(cf/or)")
    for sname in CATALOG:
        spec = catalog_spec(sname)
        for name in spec.vector_fields:
            c = kl.classify_field(spec, name, args.points, args.seed)
            for kind, la in c.lifts.items():
                cf, asm, ora = (la.max_abs(k) for k in ("lie_closed_sym", "lie_assembled", "lie_oracle"))
                flags = c.killing[kind]
                mark = "" if flags["closed"] == flags["oracle"] else " *"
                print(f"{sname:<15}{name:<12}{kind:<11}{cf:12.3e}{asm:12.3e}{ora:12.3e}  "
                      f"{'yes' if flags['closed'] else 'no'}/{'yes' if flags['oracle'] else 'no'}{mark}")
            for a in c.audits:
                print(f"{'':<15}{'':<12}{a.theorem:<11}{a.verdict}")


if __name__ == "__main__":
    main()
