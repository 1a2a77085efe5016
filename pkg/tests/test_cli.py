import json
import subprocess
import sys

import pytest

from srds.cli import main

SAT_CNF = "p cnf 3 2\n1 2 -3 0\n-1 2 3 0\n"
UNSAT_CNF = "p cnf 3 8\n" + "".join(f"{a} {b} {c} 0\n" for a in (1, -1) for b in (2, -2) for c in (3, -3))


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, (json.loads(out.out) if out.out.strip() else None), out.err


def test_ba_report(capsys, tmp_path):
    trace = tmp_path / "t.jsonl"
    code, rep, _ = run(capsys, "ba", "--preset", "n16", "--adversary", "equivocator", "--reps", "2",
                       "--trace", str(trace))
    assert code == 0
    assert rep["agreement_rate"] == 1.0 and rep["forged_accepts"] == 0
    rows = [json.loads(line) for line in trace.read_text().splitlines()]
    assert rows and {"round", "from", "to", "bytes"} <= rows[0].keys()


def test_reports_are_reproducible(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"preset": "n16", "adversary": "tree_staler", "seed": "abc"}))
    a = run(capsys, "ba", "--config", str(cfg))
    b = run(capsys, "ba", "--config", str(cfg))
    assert a[0] == 0 and a[1] == b[1]


def test_flags_override_config(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"preset": "n16", "reps": 3}))
    code, rep, _ = run(capsys, "ba", "--config", str(cfg), "--reps", "1")
    assert code == 0 and rep["config"]["reps"] == 1 and rep["config"]["preset"] == "n16"


@pytest.mark.parametrize("argv", [
    ["ba", "--reps", "0"],
    ["ba", "--preset", "n17"],
    ["robustness", "--adversary", "replay"],
    ["nosuchverb"],
    ["reduce"],
])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_unknown_config_key(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"preset": "n16", "colour": "blue"}))
    assert run(capsys, "ba", "--config", str(cfg))[0] == 2
    cfg.write_text("{not json")
    assert run(capsys, "ba", "--config", str(cfg))[0] == 2


def test_games(capsys):
    code, rep, _ = run(capsys, "robustness", "--n", "64", "--t", "21", "--reps", "2", "--adversary", "garbage")
    assert code == 0 and rep["counts"]["verdict-1"] == 2
    code, rep, _ = run(capsys, "forgery", "--n", "64", "--t", "21", "--reps", "2", "--adversary", "replay",
                       "--scheme", "pcd")
    assert code == 0 and rep["counts"]["verdict-1"] == 0


def test_tree_and_attack(capsys):
    code, rep, _ = run(capsys, "tree", "--preset", "n64", "--t", "19")
    assert code == 0 and rep["validation"]["valid"]
    code, rep, _ = run(capsys, "attack", "--n", "64", "--reps", "3")
    assert code == 0 and rep["reps"] == 3


def test_reduce_and_solve(capsys, tmp_path):
    sat, unsat = tmp_path / "s.cnf", tmp_path / "u.cnf"
    sat.write_text(SAT_CNF)
    unsat.write_text(UNSAT_CNF)
    code, rep, _ = run(capsys, "reduce", "--cnf", str(sat))
    assert code == 0 and rep["instance"]["n"] == 14
    inst = tmp_path / "i.json"
    inst.write_text(json.dumps(rep["instance"]))
    code, rep, _ = run(capsys, "solve", "--cnf", str(sat), "--ell", "3")
    assert code == 0 and rep["witness"] and rep["formula_satisfiable"]
    code, rep, _ = run(capsys, "solve", "--cnf", str(unsat))
    assert code == 0 and rep["witness"] is None and not rep["formula_satisfiable"]
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"instance": str(inst)}))
    code, rep, _ = run(capsys, "solve", "--config", str(cfg))
    assert code == 0 and rep["n"] == 14
    bad = tmp_path / "b.cnf"
    bad.write_text("p cnf 3 1\n1 -1 2 0\n")
    assert run(capsys, "reduce", "--cnf", str(bad))[0] == 2
    assert run(capsys, "reduce", "--cnf", str(tmp_path / "missing.cnf"))[0] == 2


def test_sample(capsys):
    code, rep, _ = run(capsys, "sample", "--n", "10", "--reps", "2")
    assert code == 0 and rep["solvable"] == 2


def test_metrics(capsys, tmp_path):
    cfg = tmp_path / "m.json"
    cfg.write_text(json.dumps({"presets": ["n16", "n64"]}))
    code, rep, _ = run(capsys, "metrics", "--config", str(cfg))
    assert code == 0 and set(rep["presets"]) == {"n16", "n64"}
    assert "ratio" in rep["growth"]


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "srds", "tree", "--preset", "n16"],
                         capture_output=True, text=True, check=False)
    assert out.returncode == 0 and json.loads(out.stdout)["validation"]["valid"]
