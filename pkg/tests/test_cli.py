import json
import subprocess
import sys

import pytest

from rmdf.cli import main
from rmdf.examples import EXAMPLES
from rmdf.model import load_spec


@pytest.fixture(scope="module")
def exdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("examples")
    assert main(["examples", str(d)]) == 0
    return d


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_examples_regenerate_every_bundled_spec(exdir):
    for name, build in EXAMPLES.items():
        assert load_spec(exdir / f"{name}.json") == build()


def test_analyze_ingenuity(capsys, exdir):
    code, out, _ = run(capsys, "analyze", exdir / "ingenuity_rmdf.json")
    assert code == 0
    assert "2 modes, all consistent and live" in out


def test_analyze_json_schema(capsys, exdir):
    code, out, _ = run(capsys, "analyze", exdir / "ingenuity_modified.json", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["schema_version"] == 1
    assert data["modes"][0]["hyperperiod_ms"] == "100/1"
    assert data["modes"][0]["repetition"]["Motors"] == 50


def test_check_reports_rule_and_exits_2(capsys, exdir):
    code, out, _ = run(capsys, "check", exdir / "fig9e_r5.json")
    assert code == 2 and "R5" in out
    code, out, _ = run(capsys, "check", exdir / "fig8_rmdf.json")
    assert code == 0 and out.strip() == "OK"


def test_desugar_writes_spec(capsys, exdir, tmp_path):
    target = tmp_path / "out.json"
    code, _, _ = run(capsys, "desugar", exdir / "fig5a_splitter_before.json", "-o", target)
    assert code == 0
    spec = load_spec(target)
    assert sorted(spec.actor_ids) == ["A", "B", "C"]


def test_timing_single_job(capsys, exdir):
    code, out, _ = run(capsys, "timing", exdir / "ingenuity_modified.json", "--actor", "FeatureMatch", "--job", "2", "--format", "json")
    (w,) = json.loads(out)["windows"]
    assert code == 0 and (w["release"], w["deadline"]) == ("2563/75", "184/5")


def test_timing_csv(capsys, exdir):
    code, out, _ = run(capsys, "timing", exdir / "ingenuity_modified.json", "--actor", "Camera", "--format", "csv")
    lines = out.strip().splitlines()
    assert lines[0] == "actor,job,release,deadline,window"
    assert lines[1] == "Camera,1,0/1,7/5,7/5"


def test_feasibility_exit_codes(capsys, exdir, tmp_path):
    code, out, _ = run(capsys, "feasibility", exdir / "ingenuity_modified.json", "--bounds")
    assert code == 0 and "Feasible" in out and "11/15" in out
    data = json.loads((exdir / "ingenuity_modified.json").read_text())
    for a in data["actors"]:
        if a["id"] == "Camera":
            a["wcet_ms"] = "4/5"
    bad = tmp_path / "slow.json"
    bad.write_text(json.dumps(data))
    code, out, _ = run(capsys, "feasibility", bad)
    assert code == 2 and "Infeasible" in out and "Camera job 3" in out


def test_rate_inverse_and_forward(capsys):
    assert run(capsys, "rate", "--seq", "1,1,0")[1].strip() == "rate 2/3 initial_tokens 2/3"
    assert run(capsys, "rate", "--seq", "1,1,0", "--direction", "cons")[1].strip() == "rate 2/3 initial_tokens 0/1"
    assert run(capsys, "rate", "--rate", "2/3", "--init", "1/3")[1].strip() == "1,0,1"
    code, out, _ = run(capsys, "rate", "--seq", "1,1,0,0")
    assert code == 2 and "not generable" in out


def test_simulate_writes_trace(capsys, exdir, tmp_path):
    trace = tmp_path / "t.jsonl"
    code, out, _ = run(capsys, "simulate", exdir / "fig8_rmdf.json", "--hyperperiods", "4", "--modes", "1,2,3,2", "--trace", trace)
    assert code == 0 and "late_retirement  true" in out
    events = [json.loads(x) for x in trace.read_text().splitlines()]
    assert events and {"step", "actor", "job", "channel", "action", "token"} <= set(events[0])


def test_preprocess_reports_no_offline_jobs(capsys, exdir, tmp_path):
    code, out, _ = run(capsys, "preprocess", exdir / "ingenuity_modified.json", "-o", tmp_path / "p.json")
    assert code == 0 and out.strip() == "no offline jobs"


def test_bad_policy_is_a_usage_error(capsys, exdir):
    code, _, err = run(capsys, "preprocess", exdir / "ingenuity_rmdf.json", "--policy", "lane:1")
    assert code == 1 and "malformed policy" in err


def test_malformed_input_exits_1(capsys, tmp_path):
    f = tmp_path / "bad.json"
    f.write_text('{"name": "x", "actors": [], "channels": [{"id": 1}]}')
    assert run(capsys, "analyze", f)[0] == 1
    assert run(capsys, "analyze", tmp_path / "missing.json")[0] == 1


def test_unknown_subcommand_exits_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1


def test_entry_point_runs():
    proc = subprocess.run([sys.executable, "-m", "rmdf.cli", "rate", "--seq", "0,1,1"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "rate 2/3 initial_tokens 0/1"
