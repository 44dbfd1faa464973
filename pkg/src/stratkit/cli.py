"""``strat``: command-line front end.

Every command prints a Report (``--format json`` or ``text``; both carry the
same fields) and exits 0 (ok), 1 (validation or mathematical error) or 2
(inconclusive: a degree or level cap was reached).  Output never contains
timestamps or absolute paths, so repeated runs are byte-identical.
"""

from __future__ import annotations

import argparse
import hashlib
import io as _stdio
import json
import sys
from contextlib import redirect_stderr
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Sequence

from . import io
from .arith import parse_poly
from .config import current_caps
from .connection import p_curvature
from .errors import InconclusiveError, ParseError, StratError, ValidationError
from .gaussmanin import (
    base_change_check, external_product, fiber_restrict, gm_pushforward, h0_fiber_scan,
    maximal_pullback_sub, scan_tsv,
)
from .linalg import is_zero_matrix, matrix_str
from .tower import descend_tower, dual, level1_connection, tensor, truncated_h0, validate

@dataclass
class Report:
    command: str
    input_digest: str
    parameters: Dict
    findings: Dict = field(default_factory=dict)
    status: str = "ok"

    def as_dict(self):
        return {
            "command": self.command,
            "input_digest": self.input_digest,
            "parameters": self.parameters,
            "findings": self.findings,
            "status": self.status,
        }

    def to_json(self) -> str:
        return io.dumps(self.as_dict())

    def to_text(self) -> str:
        lines = [f"command: {self.command}", f"status: {self.status}", f"input_digest: {self.input_digest}",
                 "parameters:"]
        for k, v in self.parameters.items():
            lines.append(f"  {k}: {json.dumps(v)}")
        lines.append("findings:")
        for k, v in self.findings.items():
            lines.append(f"  {k}: {json.dumps(v)}")
        return "\n".join(lines) + "\n"

    @property
    def exit_code(self) -> int:
        if self.status == "ok":
            return 0
        if self.status == "inconclusive":
            return 2
        return 1


_PARAMETER_FLAGS = ("index", "vector", "levels", "level", "degree", "max_degree", "at", "filter")


def _parameters(args) -> Dict:
    params = {k: getattr(args, k) for k in _PARAMETER_FLAGS if hasattr(args, k)}
    caps = current_caps()
    params["caps"] = {"degree_cap": caps.degree_cap, "max_prime": caps.max_prime}
    return params


def _digest(paths: Sequence[str]) -> str:
    h = hashlib.sha256()
    for p in paths:
        h.update(Path(p).read_bytes())
    return h.hexdigest()


def _load(path) -> io.Bundle:
    b = io.parse_bundle(path)
    if b.tower is not None:
        validate(b.tower)
    return b


def _tower(path):
    b = _load(path)
    if b.tower is None:
        raise ValidationError("this command expects a tower file")
    return b


def _vecs(vectors):
    return [[str(f) for f in v] for v in vectors]


def _parse_index(text: str):
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise ParseError(f"bad index {text!r}") from exc


def _maybe_write(args, obj):
    if getattr(args, "output", None):
        Path(args.output).write_text(io.dumps(obj))


# --------------------------------------------------------------------------
# commands: each returns (findings, status)
# --------------------------------------------------------------------------

def cmd_validate(args):
    t = _tower(args.file).tower
    rep = validate(t)
    return {
        "checks": [{"name": n, "ok": ok, "detail": d} for n, ok, d in rep.checks],
        "composite_frame": matrix_str(rep.frame),
        "frame_det": rep.frame_det,
        "length": t.length,
        "rank": t.rank,
    }, "ok"


def cmd_action(args):
    t = _tower(args.file).tower
    n = _parse_index(args.index)
    if args.vector is not None:
        v = tuple(parse_poly(x, t.variables, t.p) for x in args.vector.split(","))
        return {"result": [str(f) for f in t.action(n, v)]}, "ok"
    return {"matrix": matrix_str(t.action_matrix(n))}, "ok"


def cmd_pcurvature(args):
    b = _load(args.file)
    c = b.connection if b.connection is not None else level1_connection(b.tower)
    psi = p_curvature(c)
    return {"p_curvature": [matrix_str(m) for m in psi], "zero": all(is_zero_matrix(m) for m in psi)}, "ok"


def cmd_descend(args):
    b = _load(args.file)
    source = b.connection if b.connection is not None else b.tower.stratification(args.levels)
    t = descend_tower(source, args.levels, args.max_degree)
    obj = io.tower_to_obj(t)
    _maybe_write(args, obj)
    return {"tower": obj}, "ok"


def cmd_h0(args):
    t = _tower(args.file).tower
    h = truncated_h0(t, args.level, args.degree)
    return {"dimension": h.dimension, "basis": _vecs(h.basis)}, "ok"


def _split_of(args):
    b = _tower(args.file)
    return io.resolve_split(b)


def cmd_gm(args):
    t, split = _split_of(args)
    gm = gm_pushforward(t, split, args.level, args.degree, args.max_degree)
    findings = {"ranks": gm.ranks, "stabilized": gm.stabilized, "rank": gm.rank}
    if gm.tower is not None:
        obj = io.tower_to_obj(gm.tower, embedding=gm.embedding)
        findings["gm"] = obj
        _maybe_write(args, obj)
    return findings, "ok" if gm.stabilized else "inconclusive"


def cmd_fiber(args):
    t, split = _split_of(args)
    ft = fiber_restrict(t, split, args.at % t.p)
    obj = io.tower_to_obj(ft)
    _maybe_write(args, obj)
    return {"tower": obj}, "ok"


def cmd_scan(args):
    t, split = _split_of(args)
    rows = h0_fiber_scan(t, split, args.level, args.degree)
    tsv = scan_tsv(rows)
    if args.tsv:
        Path(args.tsv).write_text(tsv)
    table = [{"point": r.point, "dimension": r.dimension, "d": r.stabilization_level} for r in rows]
    return {"table": table, "tsv": tsv}, "ok"


def cmd_basechange(args):
    t, split = _split_of(args)
    rep = base_change_check(t, split, args.level, args.degree)
    points = [{"point": q.point, "gm_dimension": q.gm_dimension, "fiber_dimension": q.fiber_dimension,
               "result": "equal" if q.equal else "unequal"} for q in rep.points]
    return {"points": points, "stabilized": rep.stabilized, "ranks": rep.ranks}, rep.status


def cmd_maxsub(args):
    t, split = _split_of(args)
    sub = maximal_pullback_sub(t, split, args.level, args.degree)
    findings = {
        "ranks": sub.gm.ranks,
        "stabilized": sub.gm.stabilized,
        "embedding": _vecs(sub.embedding),
        "equals_E": sub.is_everything,
        "fiber_checks": [{"point": c, "result": "equal" if ok else "unequal"} for c, ok in sub.fiber_checks],
    }
    if sub.gm.tower is not None:
        findings["gm"] = io.tower_to_obj(sub.gm.tower, embedding=sub.embedding)
    ok = sub.gm.stabilized and all(ok for _, ok in sub.fiber_checks)
    return findings, "ok" if ok else "inconclusive"


def _binary(fn):
    def run(args):
        a = _tower(args.file).tower
        b = _tower(args.other).tower
        t = fn(a, b)
        obj = io.tower_to_obj(t)
        _maybe_write(args, obj)
        return {"tower": obj}, "ok"
    return run


def cmd_dual(args):
    t = dual(_tower(args.file).tower)
    obj = io.tower_to_obj(t)
    _maybe_write(args, obj)
    return {"tower": obj}, "ok"


def cmd_selftest(args):
    from .selftest import run_selftest

    results = run_selftest(args.filter)
    failed = [r["name"] for r in results if not r["passed"]]
    return {"cases": results, "failed": failed, "total": len(results)}, "ok" if not failed else "error:selftest"


# --------------------------------------------------------------------------
# argument parsing and dispatch
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "text"], default=argparse.SUPPRESS,
                        help="report format (default json)")
    parser = argparse.ArgumentParser(prog="strat", description="Stratified bundles over F_p.",
                                     parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, files=1, help=""):
        sp = sub.add_parser(name, parents=[common], help=help)
        sp.add_argument("file")
        if files == 2:
            sp.add_argument("other")
        sp.set_defaults(func=fn)
        return sp

    def levels(sp):
        sp.add_argument("--level", type=int, required=True)
        sp.add_argument("--degree", type=int, required=True)

    add("validate", cmd_validate, help="check a tower file")
    sp = add("action", cmd_action, help="matrix of nabla(D_n), or its value on --vector")
    sp.add_argument("--index", required=True)
    sp.add_argument("--vector")
    add("pcurvature", cmd_pcurvature, help="p-curvature of a connection (or of a tower's level-1 connection)")
    sp = add("descend", cmd_descend, help="Frobenius tower from a connection or a tower's stratification")
    sp.add_argument("--levels", type=int, required=True)
    sp.add_argument("--max-degree", type=int, default=None)
    sp.add_argument("--output")
    levels(add("h0", cmd_h0, help="truncated horizontal sections"))
    sp = add("gm", cmd_gm, help="0-th Gauss-Manin tower on the base line")
    levels(sp)
    sp.add_argument("--max-degree", type=int, default=None)
    sp.add_argument("--output")
    sp = add("fiber", cmd_fiber, help="restrict to the fiber s = c")
    sp.add_argument("--at", type=int, required=True)
    sp.add_argument("--output")
    sp = add("scan", cmd_scan, help="fiber dimensions of truncated H^0 over all F_p-points")
    levels(sp)
    sp.add_argument("--tsv")
    levels(add("basechange", cmd_basechange, help="compare GM generators with fiber sections"))
    for name, fn in (("tensor", _binary(tensor)), ("external", _binary(external_product))):
        add(name, fn, files=2).add_argument("--output")
    add("dual", cmd_dual).add_argument("--output")
    levels(add("maxsub", cmd_maxsub, help="maximal subobject pulled back from the base"))
    sp = sub.add_parser("selftest", parents=[common], help="re-run the bundled golden cases")
    sp.add_argument("--filter", default=None)
    sp.set_defaults(func=cmd_selftest, file=None)
    return parser


def run(argv: Sequence[str]) -> tuple:
    """Execute a command; returns (exit code, stdout text, stderr text)."""
    parser = build_parser()
    err = _stdio.StringIO()
    try:
        with redirect_stderr(err):
            args = parser.parse_args(list(argv))
    except SystemExit as exc:
        # malformed flags are a validation error; exit code 2 is reserved for "inconclusive"
        return (0 if not exc.code else 1), "", err.getvalue()
    fmt = getattr(args, "format", "json")
    files = [f for f in (getattr(args, "file", None), getattr(args, "other", None)) if f]
    try:
        digest = _digest(files) if files else ""
    except OSError as exc:
        report = Report(args.command, "", {}, {"message": f"cannot read input: {exc.strerror}"}, "error:io")
    else:
        params = _parameters(args)
        try:
            findings, status = args.func(args)
            report = Report(args.command, digest, params, findings, status)
        except InconclusiveError as exc:
            report = Report(args.command, digest, params, {"kind": exc.kind, "message": str(exc)}, "inconclusive")
        except StratError as exc:
            report = Report(args.command, digest, params, {"kind": exc.kind, "message": str(exc)},
                            f"error:{exc.kind}")
    out = report.to_json() if fmt == "json" else report.to_text()
    return report.exit_code, out, ("" if report.status == "ok" else report.to_text())


def main(argv: Optional[Sequence[str]] = None) -> int:
    code, out, err = run(sys.argv[1:] if argv is None else argv)
    sys.stdout.write(out)
    if err:
        sys.stderr.write(err)
    return code


if __name__ == "__main__":
    sys.exit(main())
