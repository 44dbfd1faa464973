"""Gauss-Manin ranks by level and per-fiber stabilization levels d(s).

For every member of the curated family prints the R-ranks of the relative
H^0 at levels 1..L and, for each point c, the smallest level from which the
fiber dimension no longer changes (up to L).

    python3 scripts/stabilization_table.py [--extra-levels 1]
"""

import argparse

from stratkit.families import curated_family
from stratkit.gaussmanin import RelativeSplit, gm_pushforward, h0_fiber_scan

SPLIT = RelativeSplit(("x",), ("s",))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--extra-levels", type=int, default=0,
                    help="also try levels above the curated one (limited by the tower length)")
    args = ap.parse_args()
    print(f"{'member':<22}{'L':>3}{'D':>3}  {'ranks':<14}{'stable':<8}d(s) by point")
    for m in curated_family():
        L = min(m.level + args.extra_levels, m.tower.length)
        gm = gm_pushforward(m.tower, SPLIT, L, m.degree_cap)
        rows = h0_fiber_scan(m.tower, SPLIT, L, m.degree_cap)
        ds = " ".join(f"{r.point}:{r.stabilization_level}" for r in rows)
        print(f"{m.name:<22}{L:>3}{m.degree_cap:>3}  {str(gm.ranks):<14}{str(gm.stabilized):<8}{ds}")


if __name__ == "__main__":
    main()
