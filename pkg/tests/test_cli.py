import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from quizpool.cli import main
from quizpool.scenario import parse_scenario, scenario_from_dict, scenario_hash
from quizpool.config import ConfigError

ROOT = Path(__file__).resolve().parents[1]
CASE2 = ROOT / "scenarios" / "case2_bernoulli.json"


def scenario_dict(**config):
    cfg = {"case": "case2", "ipp": "100", "fee": "1", "cp": "0.75", "ratio": "0.9695"}
    cfg.update(config)
    return {
        "config": cfg,
        "population": {"kind": "bernoulli", "p_win": 0.2},
        "simulation": {"num_players": 500, "seed": 3, "trials": 2},
    }


def write(tmp_path, data, name="s.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return p


# --- scenario parsing ---------------------------------------------------------

def test_parse_valid():
    sc = parse_scenario(CASE2)
    assert str(sc.config.cp) == "0.75" and sc.trials == 100


def test_money_as_micros_equals_decimal_string():
    a = scenario_from_dict(scenario_dict(ipp=100_000_000))
    b = scenario_from_dict(scenario_dict(ipp="100"))
    assert a == b and scenario_hash(a) == scenario_hash(b)


@pytest.mark.parametrize(
    "change, field",
    [
        ({"cp": "1.5"}, "config.cp"),
        ({"case": "case1"}, "config.cp"),
        ({"ipp": 1.5}, "config.ipp"),
        ({"typo": 1}, "config.typo"),
        ({"ratio": "1.2"}, "config.ratio"),
        ({"controller": {"window": 0}}, "config.controller.window"),
    ],
)
def test_parse_errors_name_field(change, field):
    with pytest.raises(ConfigError) as exc:
        scenario_from_dict(scenario_dict(**change))
    assert exc.value.field == field


def test_cp_message():
    with pytest.raises(ConfigError, match=r"config.cp: must lie in \(0,1\]"):
        scenario_from_dict(scenario_dict(cp="1.5"))


def test_unknown_top_level():
    d = scenario_dict()
    d["extra"] = {}
    with pytest.raises(ConfigError):
        scenario_from_dict(d)


# --- commands -------------------------------------------------------------------

def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_schedule_table(capsys):
    code, out, _ = run(capsys, "schedule", "--pool", "100", "--fee", "1", "--ratio", "0.9695", "--case", "case1")
    assert code == 0
    rows = [l for l in out.splitlines() if l.strip() and l.split()[0].isdigit()]
    assert len(rows) == 37 and rows[-1].split()[1] == "1.000048"
    assert "sum:      68.211568" in out


def test_schedule_json_case2(capsys):
    code, out, _ = run(capsys, "schedule", "--case", "case2", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["capacity"] == 46 and len(doc["rewards"]) == 46
    assert doc["floor"]["micros"] == 750_000


def test_schedule_no_viable(capsys):
    code, _, err = run(capsys, "schedule", "--pool", "1", "--case", "case1")
    assert code == 1 and "no viable schedule" in err


def test_optimize(capsys):
    code, out, _ = run(capsys, "optimize", "--case", "case1", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["capacity"] == 37 and doc["ratio"] == "0.9695"
    code, out, _ = run(capsys, "optimize", "--case", "case2", "--json")
    assert json.loads(out)["capacity"] == 49
    code, _, err = run(capsys, "optimize", "--pool", "1", "--case", "case1")
    assert code == 1 and "no viable schedule" in err


def test_bad_cp_is_usage_error(capsys):
    code, _, err = run(capsys, "schedule", "--case", "case1", "--cp", "0.75")
    assert code == 2 and "cp" in err


def test_simulate_deterministic(tmp_path, capsys):
    sc = write(tmp_path, scenario_dict())
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(capsys, "simulate", "--scenario", str(sc), "--seed", "9", "--out", str(a))[0] == 0
    assert run(capsys, "simulate", "--scenario", str(sc), "--seed", "9", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert doc["schema_version"] == 1 and doc["seed"] == 9
    assert doc["scenario_hash"] == scenario_hash(scenario_from_dict(doc["scenario"]))
    assert len(doc["reports"]) == 2


def test_report_money_roundtrip(tmp_path, capsys):
    from quizpool.money import Money

    sc = write(tmp_path, scenario_dict())
    out = tmp_path / "r.json"
    run(capsys, "simulate", "--scenario", str(sc), "--out", str(out))
    for rep in json.loads(out.read_text())["reports"]:
        for key in ("total_payout", "profit", "final_pool", "min_pool"):
            assert Money.of(rep[key]["display"]).micros == rep[key]["micros"]


@pytest.mark.parametrize(
    "content, needle",
    [(None, "not found"), ("{not json", "line 1"), (json.dumps(scenario_dict(cp="1.5")), "config.cp")],
)
def test_simulate_validation_exit_2(tmp_path, capsys, content, needle):
    p = tmp_path / "bad.json"
    if content is not None:
        p.write_text(content)
    code, _, err = run(capsys, "simulate", "--scenario", str(p))
    assert code == 2 and needle in err


def test_sweep_csv(tmp_path, capsys):
    sc = write(tmp_path, scenario_dict())
    out = tmp_path / "sweep.csv"
    code, _, _ = run(capsys, "sweep", "--scenario", str(sc), "--param", "cp=0.5:1.0:0.25", "--out", str(out))
    rows = list(csv.DictReader(out.open()))
    assert code == 0 and len(rows) == 3
    assert [r["capacity"] for r in rows] == ["59", "46", ""]
    assert rows[2]["error"].startswith("config.cp")


def test_sweep_bad_param(tmp_path, capsys):
    sc = write(tmp_path, scenario_dict())
    code, _, _ = run(capsys, "sweep", "--scenario", str(sc), "--param", "cp")
    assert code == 2


def test_replay_roundtrip_and_truncation(tmp_path, capsys):
    sc = write(tmp_path, scenario_dict(case="case3"))
    log = tmp_path / "ev.jsonl"
    run(capsys, "simulate", "--scenario", str(sc), "--events", str(log), "--out", str(tmp_path / "r.json"))
    code, out, _ = run(capsys, "replay", str(log))
    assert code == 0 and json.loads(out)["winners"] > 0
    lines = log.read_text().splitlines(keepends=True)
    (tmp_path / "cut.jsonl").write_text("".join(lines[:6] + lines[7:]))
    code, _, err = run(capsys, "replay", str(tmp_path / "cut.jsonl"))
    assert code == 1 and "CorruptLog: missing seq 7" in err


def test_replay_missing_file(capsys):
    assert run(capsys, "replay", "/nonexistent/log.jsonl")[0] == 2


def test_argparse_usage_exit_code():
    proc = subprocess.run([sys.executable, "-m", "quizpool.cli", "bogus"], capture_output=True)
    assert proc.returncode == 2
