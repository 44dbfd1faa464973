"""Base change and maximal pulled-back subobject over the curated family.

One line per member: GM rank, fiber dimensions at every point, whether the
evaluated generators span the fiber sections, and whether E_S equals E.

    python3 scripts/curated_basechange.py
"""

from stratkit.families import curated_family
from stratkit.gaussmanin import RelativeSplit, base_change_check, maximal_pullback_sub

SPLIT = RelativeSplit(("x",), ("s",))


def main():
    print(f"{'member':<22}{'p':>2}{'rank':>5}  {'fiber dims':<12}{'base change':<13}{'E_S = E':<9}fiber checks")
    bad = 0
    for m in curated_family():
        rep = base_change_check(m.tower, SPLIT, m.level, m.degree_cap)
        sub = maximal_pullback_sub(m.tower, SPLIT, m.level, m.degree_cap)
        dims = ",".join(str(pt.fiber_dimension) for pt in rep.points)
        checks = "ok" if all(ok for _, ok in sub.fiber_checks) else "FAIL"
        bad += rep.status != "ok" or checks != "ok"
        print(f"{m.name:<22}{m.tower.p:>2}{sub.gm.rank:>5}  {dims:<12}{rep.status:<13}{str(sub.is_everything):<9}{checks}")
    print(f"{bad} member(s) with a finding")


if __name__ == "__main__":
    main()
