"""Rewrite the expected outputs of the golden CLI cases.

Only run this after checking by hand that a changed output is correct; the
golden files are the regression oracle for ``strat selftest``.

    python3 scripts/regenerate_goldens.py [--check]
"""

import argparse
import sys

from stratkit.cli import run
from stratkit.selftest import GOLDEN_DIR, _resolve, load_cases


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--check", action="store_true", help="only report differences")
    args = ap.parse_args()
    changed = 0
    for case in load_cases():
        code, out, _ = run([_resolve(a) for a in case["argv"]])
        path = GOLDEN_DIR / case["expected"]
        old = path.read_text() if path.exists() else None
        if code != case["exit"]:
            print(f"{case['name']}: exit {code}, case list says {case['exit']}")
            changed += 1
        if old != out:
            changed += 1
            print(f"{case['name']}: {'differs' if old is not None else 'new'}")
            if not args.check:
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(out)
    print(f"{changed} difference(s)")
    return 1 if (args.check and changed) else 0


if __name__ == "__main__":
    sys.exit(main())
