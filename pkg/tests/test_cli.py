import csv
import json
import subprocess
import sys

import pytest

from mmwalbp.cli import main
from report_schema import check_raw_csv, check_report_dir


@pytest.fixture
def manifest(tmp_path):
    path = tmp_path / "s4.json"
    assert main(["generate", "--source", "small", "--models", "4", "--seed", "3", "--out", str(path)]) == 0
    return path


def test_generate(manifest, capsys):
    data = json.loads(manifest.read_text())
    assert data["n"] == 20 and data["generation"]["master_seed"] == 3
    assert data["generation"]["n_models"] == 4


def test_generate_usage_errors(tmp_path, capsys):
    assert main(["generate", "--source", "small", "--models", "3", "--out", str(tmp_path / "x.json")]) == 1
    assert main(["generate", "--source", "small", "--models", "3", "--plan", "1,2", "--out", str(tmp_path / "x.json")]) == 1
    code = main(["generate", "--source", "small", "--models", "3", "--plan", "1,2,3", "--seed", "1",
                 "--out", str(tmp_path / "x.json")])
    assert code == 0


def test_generate_data_error(tmp_path, capsys):
    bad = tmp_path / "bad.alb"
    bad.write_text("<number of tasks>\n1\n<weird>\n")
    assert main(["generate", "--source", str(bad), "--out", str(tmp_path / "x.json")]) == 2
    assert main(["generate", "--source", str(tmp_path / "nope.alb"), "--out", str(tmp_path / "x.json")]) == 2


def test_argparse_errors_exit_1():
    with pytest.raises(SystemExit) as info:
        main(["solve"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 1


def test_solve_and_validate(manifest, tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["solve", str(manifest), "--algo", "fss-sar", "--iters", "10", "--pop", "8", "--seed", "1",
                 "--out-dir", str(out)])
    assert code == 0
    sol = json.loads((out / "s4.solution.json").read_text())
    assert sol["config"]["algorithm"] == "fss-sar" and sol["config"]["seed"] == 1
    trace = list(csv.DictReader(open(out / "s4.trace.csv")))
    assert len(trace) == 11
    assert "Workstation 1" in (out / "s4.gantt.txt").read_text()
    capsys.readouterr()
    assert main(["validate", str(out / "s4.solution.json"), str(manifest)]) == 0
    assert "valid" in capsys.readouterr().out

    sol["workstations"][0]["workplaces"][0]["tasks"][0]["end"] += 5000
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps(sol))
    assert main(["validate", str(broken), str(manifest)]) == 3
    assert "violation" in capsys.readouterr().out


def test_solve_draws_and_prints_seed(manifest, tmp_path, capsys):
    assert main(["solve", str(manifest), "--algo", "pso", "--iters", "2", "--pop", "4", "--out-dir", str(tmp_path)]) == 0
    printed = capsys.readouterr().out
    seed = int(printed.split("seed: ")[1].split()[0])
    assert json.loads((tmp_path / "s4.solution.json").read_text())["config"]["seed"] == seed


def test_solve_rejects_bad_pso(manifest, tmp_path, capsys):
    assert main(["solve", str(manifest), "--algo", "pso", "--c1", "1", "--c2", "1", "--out-dir", str(tmp_path)]) == 1
    assert "c1 + c2 >= 4" in capsys.readouterr().err
    assert main(["solve", str(manifest), "--algo", "pso", "--w-scale", "5", "--out-dir", str(tmp_path)]) == 1


def test_solve_with_config_file(manifest, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"algorithm": "fss-v", "population": 5, "iterations": 3, "seed": 9}))
    assert main(["solve", str(manifest), "--config", str(cfg), "--out-dir", str(tmp_path), "--prefix", "run"]) == 0
    assert json.loads((tmp_path / "run.solution.json").read_text())["config"]["seed"] == 9
    assert main(["solve", str(manifest), "--config", str(cfg), "--algo", "pso", "--out-dir", str(tmp_path)]) == 1


def test_solve_bad_manifest(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["solve", str(bad), "--algo", "pso", "--seed", "1", "--out-dir", str(tmp_path)]) == 2


def test_experiment_and_report(manifest, tmp_path, capsys):
    raw = tmp_path / "raw.csv"
    code = main(["experiment", str(manifest), "--runs", "4", "--group", "2", "--iters", "3", "--pop", "5",
                 "--seed", "0", "--out", str(raw), "--workers", "1", "--report-dir", str(tmp_path / "rep")])
    assert code == 0
    assert len(check_raw_csv(raw)) == 12
    check_report_dir(tmp_path / "rep")
    capsys.readouterr()
    assert main(["report", str(raw), "--group", "2", "--out-dir", str(tmp_path / "rep2")]) == 0
    assert "F_ref" in capsys.readouterr().out
    check_report_dir(tmp_path / "rep2")
    assert main(["report", str(raw), "--group", "3", "--out-dir", str(tmp_path / "rep3")]) == 0


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "mmwalbp", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "generate" in out.stdout
