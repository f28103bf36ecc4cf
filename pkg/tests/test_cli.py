import json

import numpy as np
import pytest

from pilotforge.cli import main

BENCH_JSON = {
    "cells": 2,
    "users_per_cell": 4,
    "pilot_length": 3,
    "targets": [[0.91, 0.74, 0.64, 0.23], [0.94, 0.82, 0.45, 0.10]],
    "gamma_hat": [[0.92, 0.75, 0.65, 0.24], [0.95, 0.85, 0.50, 0.29]],
}


@pytest.fixture
def scenario_file(tmp_path):
    p = tmp_path / "bench.scenario"
    p.write_text(json.dumps(BENCH_JSON))
    return p


def run(*argv):
    return main([str(a) for a in argv])


def test_design_writes_expected_files(tmp_path, scenario_file):
    out = tmp_path / "run"
    assert run("design", "--scenario", scenario_file, "--scheme", "gwbe", "--out", out) == 0
    names = {p.name for p in out.iterdir()}
    assert {"pilots.csv", "alpha.csv", "power.csv", "run.manifest"} <= names


def test_design_all_schemes(tmp_path, scenario_file):
    out = tmp_path / "run"
    assert run("design", "--scenario", scenario_file, "--scheme", "all", "--out", out) == 0
    names = {p.name for p in out.iterdir()}
    assert {"pilots_gwbe.csv", "pilots_wbe.csv", "pilots_fos.csv"} <= names


def test_idempotent_csv_output(tmp_path, scenario_file):
    out = tmp_path / "run"
    run("design", "--scenario", scenario_file, "--scheme", "gwbe", "--out", out)
    first = {p.name: p.read_bytes() for p in out.iterdir() if p.suffix == ".csv"}
    run("design", "--scenario", scenario_file, "--scheme", "gwbe", "--out", out)
    second = {p.name: p.read_bytes() for p in out.iterdir() if p.suffix == ".csv"}
    assert first == second


def test_feasibility_failure_exits_2(tmp_path, capsys):
    bad = dict(BENCH_JSON, targets=[[2.0, 0.9, 0.8, 0.7]] * 2)
    bad.pop("gamma_hat")
    p = tmp_path / "bad.scenario"
    p.write_text(json.dumps(bad))
    code = run("design", "--scenario", p, "--scheme", "gwbe", "--out", tmp_path / "o")
    assert code == 2
    err = capsys.readouterr().err
    assert "tau/L" in err or "1/(L-1)" in err


def test_validation_failure_exits_2(tmp_path, capsys):
    p = tmp_path / "broken.scenario"
    p.write_text("{not json")
    assert run("design", "--scenario", p, "--out", tmp_path / "o") == 2
    assert "parse error" in capsys.readouterr().err


def test_unknown_flag_exits_64(capsys):
    with pytest.raises(SystemExit) as exc:
        run("design", "--nonsense", "--out", "x")
    assert exc.value.code == 64


def test_min_antennas_command(tmp_path, scenario_file, capsys):
    out = tmp_path / "m"
    assert run(
        "min-antennas", "--scenario", scenario_file, "--scheme", "all",
        "--mu", "0.9", "--out", out,
    ) == 0
    lines = (out / "minant.csv").read_text().splitlines()
    assert lines[0] == "scheme,mu,cell,user,m_min_user,m_min_network"
    assert len(lines) == 1 + 3 * 8
    stdout = capsys.readouterr().out
    assert "network minimum" in stdout


def test_max_sinr_fig3_sweep(tmp_path):
    out = tmp_path / "s"
    assert run(
        "max-sinr", "--family", "fig3", "--K", "4..6", "--scheme", "gwbe", "--out", out
    ) == 0
    rows = (out / "maxsinr.csv").read_text().splitlines()[1:]
    assert len(rows) == 3
    first = rows[0].split(",")
    assert first[0] == "gwbe" and first[2] == "users_per_cell"
    assert abs(float(first[4]) - 0.76) < 0.01


def test_repro_figure_6(tmp_path, scenario_file):
    out = tmp_path / "f6"
    assert run("repro", "--figure", "6", "--scenario", scenario_file, "--mu", "0.9", "--out", out) == 0
    text = (out / "minant.csv").read_text()
    assert text.count("\n") == 1 + 3 * 8
    for scheme in ("gwbe", "wbe", "fos"):
        assert scheme in text


def test_repro_figure_2_boundary(tmp_path, scenario_file):
    out = tmp_path / "f2"
    assert run("repro", "--figure", "2", "--scenario", scenario_file, "--grid", "7", "--out", out) == 0
    lines = (out / "boundary.csv").read_text().splitlines()
    assert lines[0] == "scheme,gamma_a,gamma_b,gamma_c"
    assert len(lines) == 1 + 3 * 7 * 7


def test_montecarlo_command(tmp_path, scenario_file):
    out = tmp_path / "mc"
    assert run(
        "montecarlo", "--scenario", scenario_file, "--scheme", "gwbe",
        "--antennas", "50", "--realizations", "60", "--seed", "7", "--out", out,
    ) == 0
    lines = (out / "mc.csv").read_text().splitlines()
    header = "scheme,antennas,realizations,seed,cell,user,theta_empirical,stderr,theta_analytic,rel_error"
    assert lines[0] == header
    assert len(lines) == 9
    row = lines[1].split(",")
    assert row[1:4] == ["50", "60", "7"]
    assert float(row[9]) < 0.25


def test_region_volume_command(tmp_path, scenario_file):
    out = tmp_path / "v"
    assert run(
        "region-volume", "--scenario", scenario_file, "--scheme", "all",
        "--realizations", "20000", "--seed", "3", "--out", out,
    ) == 0
    lines = (out / "region.csv").read_text().splitlines()
    assert lines[0] == "scheme,samples,seed,volume,stderr"
    vols = {r.split(",")[0]: float(r.split(",")[3]) for r in lines[1:]}
    assert vols["gwbe"] >= vols["wbe"] >= 0.0
    assert vols["gwbe"] >= vols["fos"] >= 0.0


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        run("--version")
    assert exc.value.code == 0
    assert "pilotforge" in capsys.readouterr().out


def test_thread_env_validated(monkeypatch, tmp_path, scenario_file, capsys):
    monkeypatch.setenv("PILOTFORGE_THREADS", "zero")
    assert run("design", "--scenario", scenario_file, "--out", tmp_path / "o") == 2
    assert "PILOTFORGE_THREADS" in capsys.readouterr().err
    monkeypatch.setenv("PILOTFORGE_THREADS", "4")
    assert run("design", "--scenario", scenario_file, "--out", tmp_path / "o") == 0


def test_default_scenario_used_when_omitted(tmp_path):
    out = tmp_path / "d"
    assert run("capacity", "--scheme", "gwbe", "--out", out) == 0
    manifest = json.loads((out / "run.manifest").read_text())
    assert manifest["scenario"]["cells"] == 2
