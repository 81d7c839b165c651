from __future__ import annotations

import json
import shutil

import pytest

from robust_mrcpsp.bench import RunRecord, write_records
from robust_mrcpsp.bench import experiment
from robust_mrcpsp.bench.cli import EXIT_CONFIG, EXIT_OK, EXIT_PARTIAL, main
from robust_mrcpsp.oracle import example_instance
from robust_mrcpsp.psplib import bundled_dir, to_json


@pytest.fixture
def example_json(tmp_path):
    path = tmp_path / "example.json"
    path.write_text(to_json(example_instance()))
    return path


def test_solve_prints_solution(example_json, tmp_path, capsys):
    trace = tmp_path / "trace.csv"
    code = main(["solve", str(example_json), "-g", "2", "-m", "benders", "--trace", str(trace)])
    assert code == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["worst_case_makespan"] == 15
    assert out["status"] == "optimal"
    assert out["critical_path"][0] == 0 and out["critical_path"][-1] == 6
    assert trace.read_text().startswith("t,LB,UB,eta,V,modes,path")


def test_solve_compact_on_psplib_file(capsys):
    code = main(["solve", str(bundled_dir("j10") / "j1010_1.mm"), "-g", "0"])
    assert code == EXIT_OK
    assert json.loads(capsys.readouterr().out)["worst_case_makespan"] == 17


def test_solve_missing_file():
    assert main(["solve", "/nonexistent/x.mm"]) == EXIT_CONFIG


def test_oracle_example(capsys):
    assert main(["oracle", "example", "-g", "2"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["worst_case_makespan"] == 15
    assert out["selection"] == [[3, 2]]


def test_oracle_refuses_large_instances(capsys):
    assert main(["oracle", str(bundled_dir("j10") / "j1010_1.mm")]) == EXIT_CONFIG


def test_export_lp(example_json, tmp_path, capsys):
    assert main(["export-lp", str(example_json), "-g", "1"]) == EXIT_OK
    text = capsys.readouterr().out
    assert text.startswith("\\ compact_example_G1\nMinimize")
    out = tmp_path / "master.lp"
    assert main(["export-lp", str(example_json), "--model", "master", "--full", "-o", str(out)]) == EXIT_OK
    master = out.read_text()
    assert " obj: eta" in master and " fix_" in master


def test_sweep_config_error(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("gammas = 0\n")
    assert main(["sweep", str(cfg)]) == EXIT_CONFIG
    cfg.write_text(f"instances_dir = {tmp_path / 'missing'}\n")
    assert main(["sweep", str(cfg)]) == EXIT_CONFIG


def test_sweep_partial_failure(tmp_path, monkeypatch, capsys):
    inst_dir = tmp_path / "inst"
    inst_dir.mkdir()
    shutil.copy(bundled_dir("j10") / "j1010_1.mm", inst_dir)

    def broken(*args, **kwargs):
        raise RuntimeError("solver exploded")

    monkeypatch.setattr(experiment, "solve_compact", broken)
    cfg = tmp_path / "run.cfg"
    cfg.write_text("instances_dir = inst\nmethods = compact benders\ngammas = 0\noutput = out.csv\n")
    assert main(["sweep", str(cfg), "-q"]) == EXIT_PARTIAL
    text = (tmp_path / "out.csv").read_text()
    assert "solver exploded" in text and "optimal" in text


def _results(path):
    rows = []
    for inst, base in (("a", 10), ("b", 20)):
        for g, inc in ((0, 0), (1, 3), (2, 4)):
            rows.append(RunRecord(inst, "compact", g, "optimal", base + inc, base + inc, 0.0, 1.0 + g, instance_set="s"))
            rows.append(RunRecord(inst, "benders", g, "optimal", base + inc, base + inc, 0.0, 2.0 + g, 2, 1.0, instance_set="s"))
    rows.append(RunRecord("c", "benders", 2, "feasible", 30, 25.0, 16.6667, 7200.0, 9, 800.0, instance_set="s"))
    rows.append(RunRecord("c", "compact", 2, "optimal", 30, 30.0, 0.0, 50.0, instance_set="s"))
    write_records(path, rows)


def test_report_writes_tables_and_figures(tmp_path, capsys):
    res = tmp_path / "results.csv"
    _results(res)
    out = tmp_path / "report"
    assert main(["report", str(res), "-d", str(out)]) == EXIT_OK
    names = {p.name for p in out.iterdir()}
    assert {"summary.csv", "objective_means.csv", "monotonicity.csv", "gap_curve.csv", "profile.csv"} <= names
    assert {"profile.png", "gap_curve.png", "objective_means.png"} <= names
    assert all((out / n).stat().st_size > 0 for n in names)
    assert (out / "profile.png").read_bytes()[:4] == b"\x89PNG"


def test_report_without_plots(tmp_path):
    res = tmp_path / "results.csv"
    _results(res)
    assert main(["report", str(res), "--no-plots"]) == EXIT_OK
    assert not list(tmp_path.glob("*.png"))
    assert (tmp_path / "summary.csv").exists()


def test_report_on_missing_file(tmp_path):
    assert main(["report", str(tmp_path / "none.csv")]) == EXIT_CONFIG
