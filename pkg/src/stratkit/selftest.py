"""Bundled golden cases for ``strat selftest``.

``golden/cases.json`` lists CLI invocations with their expected exit code and
expected stdout file; arguments naming ``.json`` files are resolved inside the
golden directory.  A handful of oracle cases recompute known values directly.
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path
from typing import Dict, List, Optional

GOLDEN_DIR = Path(__file__).parent / "golden"


def _resolve(arg: str) -> str:
    return str(GOLDEN_DIR / arg) if arg.endswith(".json") and not arg.startswith("-") else arg


def load_cases() -> List[Dict]:
    return json.loads((GOLDEN_DIR / "cases.json").read_text())


def run_case(case: Dict) -> Dict:
    from .cli import run

    argv = [_resolve(a) for a in case["argv"]]
    code, out, _ = run(argv)
    expected_path = GOLDEN_DIR / case["expected"]
    if not expected_path.exists():
        return {"name": case["name"], "passed": False, "detail": f"missing golden {case['expected']}"}
    expected = expected_path.read_text()
    if code != case["exit"]:
        return {"name": case["name"], "passed": False, "detail": f"exit {code}, expected {case['exit']}"}
    if out != expected:
        return {"name": case["name"], "passed": False, "detail": "output differs from golden"}
    return {"name": case["name"], "passed": True, "detail": ""}


# oracle cases ---------------------------------------------------------------

def _oracle_lucas():
    from .arith import lucas_binomial

    for p in (2, 3, 5, 7):
        for m in range(21):
            for n in range(21):
                if lucas_binomial((m,), (n,), p) != math.comb(m, n) % p:
                    return f"C({m},{n}) mod {p}"
    return ""


def _oracle_pcurvature():
    from .arith import parse_poly
    from .connection import Connection, p_curvature

    V = ("x",)
    c = Connection(2, V, (), 1, ((((parse_poly("x", V, 2)),),),))
    psi = p_curvature(c)[0][0][0]
    return "" if psi == parse_poly("x^2 + 1", V, 2) else f"psi = {psi}"


def _oracle_truncation():
    from .tower import Tower, truncated_h0

    t = Tower.unit(2, ("x",), length=2)
    for L in (1, 2):
        for D in range(9):
            expect = sum(1 for m in range(D + 1) if all(math.comb(m, n) % 2 == 0 for n in range(1, 2 ** L)))
            got = truncated_h0(t, L, D).dimension
            if got != expect:
                return f"L={L} D={D}: {got} != {expect}"
    return ""


def _oracle_gm_pullback():
    from .arith import parse_poly
    from .gaussmanin import RelativeSplit, gm_pushforward, pullback
    from .tower import Tower, gauge_equivalent

    V = ("s",)
    P = lambda s: parse_poly(s, V, 3)
    M = Tower(3, V, (), "absolute", 2, (((P("1"), P("s")), (P("0"), P("1"))), ((P("1"), P("2*s^2")), (P("0"), P("1")))))
    t = pullback(M, ("x",))
    gm = gm_pushforward(t, RelativeSplit.of(t), 2, 0)
    if not gm.stabilized or gauge_equivalent(M, gm.tower) is None:
        return "GM of a pullback is not equivalent to the base tower"
    return ""


ORACLES = {
    "oracle-lucas": ("arith", _oracle_lucas),
    "oracle-pcurvature": ("connection", _oracle_pcurvature),
    "oracle-truncation": ("tower", _oracle_truncation),
    "oracle-gm-pullback": ("gm", _oracle_gm_pullback),
}


def run_selftest(filter_text: Optional[str] = None) -> List[Dict]:
    # goldens record the default caps; a user override must not turn them into failures
    saved = os.environ.pop("STRAT_MAX_DEGREE", None)
    try:
        return _run(filter_text)
    finally:
        if saved is not None:
            os.environ["STRAT_MAX_DEGREE"] = saved


def _run(filter_text):
    results = []
    try:
        cases = load_cases()
    except (OSError, ValueError) as exc:
        return [{"name": "cases.json", "passed": False, "detail": f"unreadable case list: {exc}"}]
    for case in cases:
        if filter_text and filter_text not in case["name"] and filter_text != case.get("group"):
            continue
        try:
            results.append(run_case(case))
        except Exception as exc:  # a corrupted golden must be reported, not crash the run
            results.append({"name": case["name"], "passed": False, "detail": f"{type(exc).__name__}: {exc}"})
    for name, (group, fn) in ORACLES.items():
        if filter_text and filter_text not in name and filter_text != group:
            continue
        try:
            detail = fn()
        except Exception as exc:
            detail = f"{type(exc).__name__}: {exc}"
        results.append({"name": name, "passed": not detail, "detail": detail})
    return results
