import json
import math
import re
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from plapaudit import cli
from plapaudit.report import ANCHORS, CheckRecord, Report, load_schema, record
from plapaudit.suites import DEFAULT_SEED, RunConfig, Tolerances, run_command, unit_rng

DOCS = Path(__file__).resolve().parents[1] / "docs" / "anchors.md"


def _run(capsys, *argv):
    code = cli.run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_record_defaults():
    assert record("x", "plumbing", 1e-10, 1e-9).passed
    assert not record("x", "plumbing", float("nan"), 1e-9).passed
    with pytest.raises(ValueError):
        CheckRecord("x", "no-such-anchor", True, 0.0, 0.0)


def test_report_summary_and_json():
    recs = [record("b", "plumbing", 2.0, 1.0), record("a", "plumbing", np.float64(0.5), 1.0, extra=np.int64(3))]
    rep = Report("verify-bubbles", {"seed": 1}, recs, duration=1.23456)
    s = rep.summary
    assert (s["total"], s["pass"], s["fail"]) == (2, 1, 1)
    assert s["by_anchor"]["plumbing"]["max_measured"] == 2.0
    data = json.loads(rep.to_json())
    assert [r["check_id"] for r in data["records"]] == ["a", "b"]
    assert data["duration_seconds"] == 1.235
    assert "duration_seconds" not in json.loads(rep.to_json(canonical=True))
    assert data["status"] == "fail" and not rep.passed
    assert "failed b" in rep.text_summary()
    jsonschema.validate(data, load_schema())


def test_nonfinite_values_become_null():
    rep = Report("shoot", {}, [record("x", "plumbing", math.inf, 1.0, value=math.nan)])
    data = json.loads(rep.to_json())
    assert data["records"][0]["measured"] is None
    assert data["records"][0]["details"]["value"] is None
    jsonschema.validate(data, load_schema())


def test_every_anchor_documented():
    text = DOCS.read_text()
    documented = set(re.findall(r"^\| `([a-z0-9-]+)` \|", text, flags=re.M))
    assert documented == set(ANCHORS)


def test_unit_rng_independent_of_order():
    a = unit_rng(7, "x").normal(size=3)
    unit_rng(7, "y").normal(size=3)
    assert np.array_equal(a, unit_rng(7, "x").normal(size=3))
    assert not np.array_equal(a, unit_rng(8, "x").normal(size=3))


def test_tolerances_validated():
    with pytest.raises(ValueError):
        Tolerances(identity=0.0)


def test_parse_grid():
    assert cli.parse_grid("4:2,3:1.5:0.5") == ((4, 2.0), (3, 1.5, 0.5))
    with pytest.raises(cli.ConfigError):
        cli.parse_grid("4")


def test_cli_bubbles_pass(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, _, err = _run(capsys, "verify-bubbles", "--out", str(out))
    assert code == 0
    data = json.loads(out.read_text())
    jsonschema.validate(data, load_schema())
    assert data["status"] == "pass" and data["config"]["seed"] == DEFAULT_SEED
    assert "duration_seconds" in data
    assert "verify-bubbles:" in err


def test_cli_single_case_stdout(capsys):
    code, out, _ = _run(capsys, "verify-bubbles", "--n", "5", "--p", "3", "--lam", "2", "--canonical")
    assert code == 0
    data = json.loads(out)
    assert all("n=5,p=3,lam=2" in r["check_id"] for r in data["records"])


@pytest.mark.parametrize(
    "argv,fragment",
    [
        (["verify-bubbles", "--n", "4", "--p", "2", "--lam", "-1"], "--lam"),
        (["verify-bubbles", "--grid", "4:5"], "--grid"),
        (["verify-bubbles", "--grid", "4:x"], "--grid"),
        (["verify-bubbles", "--n", "4"], "--n and --p"),
        (["shoot", "--format", "csv"], "csv"),
        (["shoot", "--tol-ode", "0"], "positive"),
        (["shoot", "--bogus"], "unrecognized"),
        (["nonsense"], "invalid choice"),
    ],
)
def test_cli_config_errors(capsys, argv, fragment):
    code, out, err = _run(capsys, *argv)
    assert code == 2 and out == ""
    assert "configuration error" in err and fragment in err


def test_cli_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"grid": [[4, 2.0, 1.0]], "seed": 5, "tol-identity": 1e-9}))
    code, out, _ = _run(capsys, "verify-bubbles", "--config", str(cfg), "--canonical")
    assert code == 0
    data = json.loads(out)
    assert data["config"]["seed"] == 5 and data["config"]["grid"] == [[4, 2.0, 1.0]]
    code, out, _ = _run(capsys, "verify-bubbles", "--config", str(cfg), "--seed", "9", "--canonical")
    assert json.loads(out)["config"]["seed"] == 9
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"colour": 1}))
    assert _run(capsys, "verify-bubbles", "--config", str(bad))[0] == 2
    bad.write_text("{not json")
    assert _run(capsys, "verify-bubbles", "--config", str(bad))[0] == 2


def test_cli_failure_exit_status(capsys):
    # an impossible slope tolerance turns growth checks into failures
    code, out, _ = _run(capsys, "growth", "--grid", "4:2", "--tol-slope", "1e-9", "--canonical")
    assert code == 1
    data = json.loads(out)
    assert data["status"] == "fail" and data["summary"]["fail"] > 0


def test_cli_exponents_csv(capsys, tmp_path):
    out = tmp_path / "region.csv"
    code, _, _ = _run(capsys, "exponents", "--grid", "4:2", "--resolution", "0.01", "--format", "csv", "--out", str(out))
    lines = out.read_text().splitlines()
    assert lines[0].startswith("n,p,case")
    assert len(lines) > 100
    assert code in (0, 1)


def test_cli_growth_csv(capsys):
    code, out, _ = _run(capsys, "growth", "--grid", "4:2", "--format", "csv")
    header = out.splitlines()[0].split(",")
    assert header[:4] == ["n", "p", "weight", "q"] and "tail_slope" in header


def test_parallel_matches_serial():
    serial = run_command(RunConfig("verify-matrix", jobs=1, fields=2, points=50))
    parallel = run_command(RunConfig("verify-matrix", jobs=3, fields=2, points=50))
    a = [r.to_dict() for r in serial]
    b = [r.to_dict() for r in parallel]
    assert a == b


def test_seed_changes_records():
    a = run_command(RunConfig("verify-identities", grid=((2, 1.5),), fields=1, points=20, seed=1))
    b = run_command(RunConfig("verify-identities", grid=((2, 1.5),), fields=1, points=20, seed=2))
    assert [r.measured for r in a] != [r.measured for r in b]
