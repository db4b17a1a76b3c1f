import json
from pathlib import Path

import pytest

from tangentlift import checks
from tangentlift.cli import run
from tangentlift.specfile import CATALOG_DIR

CAT = Path(CATALOG_DIR)


def test_verify_connection_polar(capsys):
    assert run(["verify-connection", str(CAT / "flat_polar.spec"), "--points", "20", "--seed", "7"]) == 0
    out = capsys.readouterr().out
    assert "connection-vs-oracle" in out and "0 failed" in out


def test_classify_rotation_flags_counterexample(tmp_path):
    path = tmp_path / "out.json"
    code = run(["classify", str(CAT / "flat_cartesian.spec"), "--field", "rotation",
                "--points", "50", "--seed", "1", "--json", str(path)])
    assert code == 1
    doc = json.loads(path.read_text())
    verdicts = {a["theorem"]: a["verdict"] for a in doc["audits"]}
    assert verdicts["T2a"] == "counterexample-candidate"
    assert doc["seed"] == 1 and doc["points"] == 50


def test_check_closed_gradient():
    assert run(["check-closed", str(CAT / "flat_cartesian.spec"), "--field", "gradient"]) == 0


def test_check_closed_rotation_fails():
    assert run(["check-closed", str(CAT / "flat_cartesian.spec"), "--field", "rotation", "--points", "5"]) == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["verify-connection", "no/such/file.spec"],
        ["classify", str(CAT / "sphere.spec"), "--field", "nope"],
        ["classify", str(CAT / "sphere.spec")],
        ["verify-connection", str(CAT / "sphere.spec"), "--points", "0"],
        ["verify-paper", "/nonexistent-dir"],
        ["frobnicate"],
    ],
)
def test_input_errors_exit_2(argv):
    with pytest.raises(SystemExit) as info:
        raise SystemExit(run(argv))
    assert info.value.code == 2


def test_bad_spec_file(tmp_path):
    bad = tmp_path / "bad.spec"
    bad.write_text("[manifold]\nname = \"b\"\ndim = 1\ncoords = \"t\"\n[metric]\ng[0][0] = \"t\"\n[domain]\nt = -1, 1\n")
    assert run(["verify-connection", str(bad)]) == 2


def test_tolerance_override(capsys):
    code = run(["verify-connection", str(CAT / "sphere.spec"), "--points", "3", "--tol", "1e-30"])
    assert code == 1


def test_report_json_shape_and_tags(tmp_path):
    path = tmp_path / "r.json"
    run(["classify", str(CAT / "sphere.spec"), "--field", "dphi", "--points", "3", "--json", str(path)])
    doc = json.loads(path.read_text())
    assert list(doc) == ["tool", "version", "spec", "seed", "points", "entries", "audits"]
    for e in doc["entries"]:
        assert e["equation"] in checks.TAGS
        assert set(e) >= {"check", "field", "lift", "max_abs_residual", "tolerance", "verdict"}
    for a in doc["audits"]:
        assert a["theorem"] in checks.TAGS


def test_entry_verdict_relation():
    e = checks.Entry("x", "E3", "s", None, None, 0.5, 1.0)
    assert e.verdict == "pass"
    assert checks.Entry("x", "E3", "s", None, None, 0.5, 1.0, ">=").verdict == "fail"
    with pytest.raises(ValueError):
        checks.Entry("x", "E99", "s", None, None, 0.0, 1.0)


def test_reports_are_deterministic():
    from tangentlift.specfile import catalog_spec

    spec = catalog_spec("hyperbolic")
    a = checks.classify(spec, "dphi", 5, 9).to_json()
    b = checks.classify(spec, "dphi", 5, 9).to_json()
    assert a == b
