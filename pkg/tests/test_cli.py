import json
import subprocess
import sys
from pathlib import Path

import pytest

from loopcert.cli import main
from loopcert.filtered import scenario_write, slack_scenario, tight_scenario
from loopcert.models import builtin_s1, model_write, scale_delta

from conftest import Q


def run(*argv) -> int:
    return main([str(a) for a in argv])


def subprocess_run(*argv, cwd=None):
    return subprocess.run([sys.executable, "-m", "loopcert", *map(str, argv)],
                          capture_output=True, text=True, cwd=cwd)


@pytest.fixture()
def work(tmp_path):
    assert run("builtin", "s1", "--window", 1, "--field", "q", "-o", tmp_path / "s1.model.json") == 0
    return tmp_path


def test_builtin_and_validate(work):
    assert run("validate", work / "s1.model.json") == 0
    rep = json.loads((work / "s1.validate.report.json").read_text())
    assert rep["exit_code"] == 0 and rep["result"]["ok"]
    assert rep["inputs"][0]["file"] == "s1.model.json" and len(rep["inputs"][0]["sha256"]) == 64


def test_certify_then_verify_in_separate_process(work):
    assert run("certify", work / "s1.model.json", "--max-depth", 3) == 0
    rep = json.loads((work / "s1.certify.report.json").read_text())
    assert rep["result"]["status"] == "FOUND" and rep["result"]["certificate"]["length"] == 1
    assert rep["config"]["max_depth"] == 3
    assert rep["model"]["hash"]
    proc = subprocess_run("verify", "s1.model.json", "s1.cert.json", cwd=work)
    assert proc.returncode == 0, proc.stdout + proc.stderr


def test_verify_corrupted_names_step(work):
    run("certify", work / "s1.model.json")
    doc = json.loads((work / "s1.cert.json").read_text())
    vec = doc["letters"][0]["vector"]
    doc["letters"][0]["vector"] = {k: str(2 * int(v)) for k, v in vec.items()}
    (work / "bad.cert.json").write_text(json.dumps(doc))
    assert run("verify", work / "s1.model.json", work / "bad.cert.json") == 1
    rep = json.loads((work / "bad.verify.report.json").read_text())
    assert rep["result"]["valid"] is False and rep["result"]["step"] == 1


def test_delta_zero_exits_one(work):
    model_write(scale_delta(builtin_s1(1, Q), 0), work / "flat.model.json")
    assert run("certify", work / "flat.model.json") == 1
    rep = json.loads((work / "flat.certify.report.json").read_text())
    assert rep["result"]["status"] == "NOT_FOUND_WITHIN_BOUNDS"
    assert not (work / "flat.cert.json").exists()


def test_closure_mode(work):
    assert run("certify", work / "s1.model.json", "--mode", "closure") == 0
    rep = json.loads((work / "s1.certify.report.json").read_text())
    assert rep["result"]["status"] == "FOUND_CLOSURE_ONLY"


def test_product_and_lift(work):
    run("certify", work / "s1.model.json")
    assert run("product", work / "s1.model.json", work / "s1.model.json",
               "-o", work / "t2.model.json") == 0
    assert run("lift", work / "s1.model.json", work / "s1.cert.json", work / "s1.model.json",
               work / "s1.cert.json", "-o", work / "t2.cert.json") == 0
    assert run("verify", work / "t2.model.json", work / "t2.cert.json") == 0
    assert run("certify", work / "t2.model.json", "-o", work / "t2.search.cert.json") == 0


def test_filtered(work):
    for sc, code in ((tight_scenario(), 0), (slack_scenario(), 0)):
        scenario_write(sc, work / f"{sc.name}.scenario.json")
        assert run("filtered", work / f"{sc.name}.scenario.json", "-o", work / f"{sc.name}.json") == code
        rep = json.loads((work / f"{sc.name}.json").read_text())
        assert rep["result"]["certified"]


def test_usage_and_io_errors(work, capsys):
    with pytest.raises(SystemExit) as exc:
        run("certify", work / "s1.model.json", "--bogus")
    assert exc.value.code == 2
    assert run("validate", work / "missing.model.json") == 2
    (work / "junk.model.json").write_text("{not json")
    assert run("validate", work / "junk.model.json") == 2
    doc = json.loads((work / "s1.model.json").read_text())
    del doc["delta"]
    (work / "nodelta.model.json").write_text(json.dumps(doc))
    assert run("validate", work / "nodelta.model.json") == 2
    assert "delta" in capsys.readouterr().err


def test_invalid_model_exits_one_and_names_axiom(work, capsys):
    doc = json.loads((work / "s1.model.json").read_text())
    for row in doc["product"]:
        if row["left"] == "t1" and row["right"] == "t-1":
            row["result"] = {"t0": "2"}
    (work / "broken.model.json").write_text(json.dumps(doc))
    assert run("validate", work / "broken.model.json") == 1
    assert "associativity" in capsys.readouterr().out


def _all_reports(d: Path) -> dict:
    return {p.name: p.read_bytes() for p in sorted(d.glob("*.json"))}


def _pipeline(d: Path, workers: int):
    run("builtin", "s1", "--window", 1, "-o", d / "s1.model.json")
    run("validate", d / "s1.model.json")
    run("certify", d / "s1.model.json", "--workers", workers, "--mode", "both")
    run("product", d / "s1.model.json", d / "s1.model.json", "-o", d / "t2.model.json")
    run("certify", d / "t2.model.json", "--workers", workers)
    run("lift", d / "s1.model.json", d / "s1.cert.json", d / "s1.model.json", d / "s1.cert.json",
        "-o", d / "t2.lift.cert.json")
    run("verify", d / "t2.model.json", d / "t2.lift.cert.json")
    scenario_write(slack_scenario(), d / "slack.scenario.json")
    run("filtered", d / "slack.scenario.json", "-o", d / "slack.report.json")


def test_byte_determinism_across_runs_and_workers(tmp_path):
    outs = []
    for k, w in enumerate((1, 1, 4)):
        d = tmp_path / f"run{k}"
        d.mkdir()
        _pipeline(d, w)
        outs.append(_all_reports(d))
    assert len(outs[0]) >= 10
    assert outs[0] == outs[1] == outs[2]


def test_timing_is_opt_in(work):
    run("certify", work / "s1.model.json", "--timing")
    rep = json.loads((work / "s1.certify.report.json").read_text())
    assert "timing" in rep
    run("certify", work / "s1.model.json")
    assert "timing" not in json.loads((work / "s1.certify.report.json").read_text())
