"""Search relative-mode towers on (x | s) for jumps of the fiber dimension.

For each random relative tower the truncated H^0 of every fiber s = c is
computed at fixed (L, D).  A row is a "jump" when the dimensions are not
constant in c.  The search only records what it finds; semicontinuity is
not asserted for relative towers.

    python3 scripts/jump_experiment.py --p 2 --count 200 --level 1 --degree 2 [--tsv out.tsv]
"""

import argparse
import random

from stratkit.families import relative_family_tower
from stratkit.gaussmanin import RelativeSplit, h0_fiber_scan
from stratkit.generators import random_unimodular
from stratkit.linalg import matrix_str
from stratkit.tower import Tower

SPLIT = RelativeSplit(("x",), ("s",))


def random_relative_tower(rng, p, rank, length, max_deg):
    sig = tuple(random_unimodular(rng, p, ("x", "s"), rank, max_deg) for _ in range(length))
    return Tower(p, ("x",), ("s",), "relative", rank, sig)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=int, default=2)
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--rank", type=int, default=2)
    ap.add_argument("--length", type=int, default=1)
    ap.add_argument("--max-deg", type=int, default=2)
    ap.add_argument("--level", type=int, default=1)
    ap.add_argument("--degree", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tsv", help="write one row per tower: index, dimensions by point, jump flag")
    args = ap.parse_args()

    rng = random.Random(args.seed)
    towers = [("crafted", relative_family_tower(args.p, [["1", "x*s"], ["0", "1"]], mode="relative"))]
    towers += [(f"random-{i}", random_relative_tower(rng, args.p, args.rank, args.length, args.max_deg))
               for i in range(args.count)]
    lines = ["tower\t" + "\t".join(f"s={c}" for c in range(args.p)) + "\tjump\tspecial_dominates"]
    jumps = violations = 0
    for name, t in towers:
        if args.level > t.length:
            continue
        dims = [r.dimension for r in h0_fiber_scan(t, SPLIT, args.level, args.degree)]
        jump = len(set(dims)) > 1
        dominates = dims[0] >= max(dims[1:]) if len(dims) > 1 else True
        jumps += jump
        violations += not dominates
        lines.append(f"{name}\t" + "\t".join(map(str, dims)) + f"\t{int(jump)}\t{int(dominates)}")
        if jump and name != "crafted" and jumps <= 3:
            print(f"jump in {name}: dims {dims}, S_0 = {matrix_str(t.sigmas[0])}")
    print(f"p={args.p} L={args.level} D={args.degree}: {len(towers)} towers, {jumps} with a jump, "
          f"{violations} where s=0 is not the largest")
    if args.tsv:
        with open(args.tsv, "w") as fh:
            fh.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
