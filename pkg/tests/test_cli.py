import json
import shutil
import subprocess
import sys

import pytest

from stratkit import io, selftest
from stratkit.cli import run
from stratkit.errors import ParseError, ValidationError

GOLDEN = selftest.GOLDEN_DIR


def g(name):
    return str(GOLDEN / name)


def test_h0_identity_reports_dimension():
    code, out, err = run(["h0", g("identity_rank2.json"), "--level", "2", "--degree", "3"])
    rep = json.loads(out)
    assert code == 0 and err == ""
    assert rep["findings"]["dimension"] == 2
    assert rep["status"] == "ok"
    assert rep["parameters"]["level"] == 2 and rep["parameters"]["degree"] == 3
    assert set(rep) == {"command", "input_digest", "parameters", "findings", "status"}


def test_descend_obstruction_exit_one():
    code, out, err = run(["descend", g("nonflat_rank1.json"), "--levels", "2"])
    assert code == 1
    assert json.loads(out)["status"] == "error:stratification-obstruction"
    assert "stratification-obstruction" in err


def test_cap_hit_exit_two():
    code, out, _ = run(["descend", g("unipotent_conn.json"), "--levels", "1", "--max-degree", "0"])
    assert code == 2 and json.loads(out)["status"] == "inconclusive"


def test_env_cap_exit_two(monkeypatch):
    monkeypatch.setenv("STRAT_MAX_DEGREE", "0")
    code, out, _ = run(["descend", g("unipotent_conn.json"), "--levels", "1"])
    assert code == 2
    assert json.loads(out)["parameters"]["caps"]["degree_cap"] == 0


def test_basechange_pullback_equal():
    code, out, _ = run(["basechange", g("pullback.json"), "--level", "2", "--degree", "0"])
    points = json.loads(out)["findings"]["points"]
    assert code == 0 and [q["result"] for q in points] == ["equal"] * 3


def test_validation_error_names_sigma():
    code, out, _ = run(["validate", g("bad_det.json")])
    assert code == 1 and "sigmas[0]" in json.loads(out)["findings"]["message"]


def test_usage_error_is_not_inconclusive():
    code, _, err = run(["h0", g("identity_rank2.json")])
    assert code == 1 and "required" in err


def test_missing_file():
    code, out, _ = run(["validate", "/nonexistent/tower.json"])
    assert code == 1 and json.loads(out)["status"] == "error:io"


@pytest.mark.parametrize("case", selftest.load_cases(), ids=lambda c: c["name"])
def test_runs_are_byte_identical(case):
    argv = [selftest._resolve(a) for a in case["argv"]]
    assert run(argv) == run(argv)


@pytest.mark.parametrize("argv", [
    ["h0", "unipotent.json", "--level", "2", "--degree", "1"],
    ["gm", "gm_rank2.json", "--level", "3", "--degree", "2"],
    ["descend", "nonflat_rank1.json", "--levels", "2"],
])
def test_text_and_json_carry_same_content(argv):
    argv = [selftest._resolve(a) for a in argv]
    _, js, _ = run(argv + ["--format", "json"])
    _, text, _ = run(argv + ["--format", "text"])
    rep = json.loads(js)
    lines = text.splitlines()
    assert f"command: {rep['command']}" in lines
    assert f"status: {rep['status']}" in lines
    assert f"input_digest: {rep['input_digest']}" in lines
    for k, v in rep["parameters"].items():
        assert f"  {k}: {json.dumps(v)}" in lines
    for k, v in rep["findings"].items():
        assert f"  {k}: {json.dumps(v)}" in lines


def test_selftest_passes():
    code, out, _ = run(["selftest"])
    rep = json.loads(out)
    assert code == 0, rep["findings"]["failed"]
    assert rep["findings"]["total"] >= 30


def test_selftest_filter():
    _, out, _ = run(["selftest", "--filter", "gm"])
    names = [c["name"] for c in json.loads(out)["findings"]["cases"]]
    groups = {c["name"]: c.get("group") for c in selftest.load_cases()}
    groups.update({n: grp for n, (grp, _) in selftest.ORACLES.items()})
    assert names and all("gm" in n or groups[n] == "gm" for n in names)
    assert "h0-identity" not in names


def test_corrupted_golden_is_named(tmp_path, monkeypatch):
    copy = tmp_path / "golden"
    shutil.copytree(GOLDEN, copy)
    target = copy / "expected" / "h0-identity.out"
    target.write_text(target.read_text().replace('"dimension": 2', '"dimension": 3'))
    monkeypatch.setattr(selftest, "GOLDEN_DIR", copy)
    code, out, _ = run(["selftest"])
    assert code == 1
    assert json.loads(out)["findings"]["failed"] == ["h0-identity"]


def test_corrupted_input_is_named(tmp_path, monkeypatch):
    copy = tmp_path / "golden"
    shutil.copytree(GOLDEN, copy)
    (copy / "pullback.json").write_text("{not json")
    monkeypatch.setattr(selftest, "GOLDEN_DIR", copy)
    _, out, _ = run(["selftest"])
    failed = json.loads(out)["findings"]["failed"]
    assert "gm-pullback" in failed and "basechange-pullback" in failed


@pytest.mark.parametrize("name", ["identity_rank2.json", "unipotent.json", "unipotent_y.json", "gm_rank2.json",
                                  "pullback.json", "relative_jump.json", "nonflat_rank1.json",
                                  "unipotent_conn.json"])
def test_parse_serialize_round_trip(name):
    raw = (GOLDEN / name).read_text()
    assert io.serialize_bundle(io.parse_bundle(GOLDEN / name)) == raw


def test_gm_output_file_round_trip(tmp_path):
    out = tmp_path / "gm.json"
    code, _, _ = run(["gm", g("gm_rank2.json"), "--level", "3", "--degree", "2", "--output", str(out)])
    assert code == 0
    b = io.parse_bundle(out)
    assert b.embedding is not None and len(b.embedding) == 2
    assert io.serialize_bundle(b) == out.read_text()


def test_canonicalization_on_load(tmp_path):
    f = tmp_path / "t.json"
    f.write_text(json.dumps({"p": 2, "fiber_vars": ["x"], "base_vars": [], "mode": "absolute", "rank": 1,
                             "sigmas": [[["  3 + 2*x "]]]}))
    assert '["1"]' in io.serialize_bundle(io.parse_bundle(f))


def test_parse_errors():
    with pytest.raises(ParseError, match="/sigmas"):
        io.parse_bundle(GOLDEN / "bad_schema.json")
    with pytest.raises(ValidationError):
        io.parse_bundle(GOLDEN / "bad_prime.json")


def test_scan_tsv(tmp_path):
    out = tmp_path / "scan.tsv"
    code, _, _ = run(["scan", g("relative_jump.json"), "--level", "1", "--degree", "0", "--tsv", str(out)])
    assert code == 0 and out.read_text() == "point\tdimension\n0\t2\n1\t1\n"


def test_gm_unstabilized_exit_two():
    code, out, _ = run(["gm", g("gm_rank2.json"), "--level", "1", "--degree", "2"])
    assert code == 2


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "stratkit.cli", "validate", g("identity_rank2.json")],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["status"] == "ok"
