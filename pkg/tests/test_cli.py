"""Tests for the command-line interface: exit codes, files, determinism."""

import json
from pathlib import Path

import numpy as np
import pytest

import hermclt.cli as cli
from hermclt.bounds import BoundCheck
from hermclt.oracle import OracleComparison

DENSITY_DIR = Path(__file__).resolve().parent.parent / "densities"


def density_arg(name):
    return str(DENSITY_DIR / f"{name}.json")


def test_check_passes_certified_density(capsys):
    code = cli.main(["check", "--density", density_arg("quartic025")])
    out = capsys.readouterr().out
    assert code == 0
    assert "overall: pass" in out
    assert "h2b: pass" in out


def test_check_fails_inadmissible_density(capsys):
    code = cli.main(["check", "--density", density_arg("quartic050")])
    out = capsys.readouterr().out
    assert code == 3
    assert "overall: fail" in out


def test_check_json_format(capsys):
    code = cli.main(
        ["check", "--density", density_arg("mixed24"), "--format", "json"]
    )
    payload = json.loads(capsys.readouterr().out)
    assert code == 0
    assert payload[0]["K"] == 2
    assert payload[0]["overall"] is True
    assert payload[0]["h1prime"]["status"] == "fail"


def test_check_gaussian(capsys):
    code = cli.main(["check", "--density", density_arg("gauss")])
    out = capsys.readouterr().out
    assert code == 0
    assert "gaussian innovation" in out


def test_missing_density_file_is_io_error(capsys):
    code = cli.main(["check", "--density", "no-such-file.json"])
    assert code == 1


def test_not_a_density_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"coeffs": [1, 2]}')
    assert cli.main(["check", "--density", str(bad)]) == 2
    worse = tmp_path / "worse.json"
    worse.write_text('{"coeffs": [0.5]}')
    assert cli.main(["check", "--density", str(worse)]) == 2


def test_run_writes_contracted_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    code = cli.main(
        ["run", "--density", density_arg("quartic025"), "--out", str(out),
         "--n-max", "60", "--no-plots"]
    )
    assert code == 0
    lines = (out / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "n,a_n,chi2,envelope,tail_dropped"
    assert len(lines) == 61
    first = lines[1].split(",")
    assert first[0] == "1" and first[2] == "0.25"
    summary = json.loads((out / "summary.json").read_text())
    assert set(summary) == {
        "r", "K", "N", "a_phi", "n0", "slope", "slope_target",
        "sup_scaled_chi2", "er_violations", "tail_max", "note",
    }
    assert summary["r"] == 3.0
    assert summary["n0"] == 4
    assert summary["er_violations"] == 0
    assert summary["slope_target"] == -1.0
    assert abs(summary["slope"] - summary["slope_target"]) < 0.15
    assert (out / "er_margins.csv").exists()
    assert (out / "plot_loglog.csv").exists()
    assert not (out / "trajectory.png").exists()


def test_run_renders_figure_by_default(tmp_path):
    out = tmp_path / "run"
    code = cli.main(
        ["run", "--density", density_arg("quartic025"), "--out", str(out),
         "--n-max", "40"]
    )
    assert code == 0
    png = (out / "trajectory.png").read_bytes()
    assert png[:8] == b"\x89PNG\r\n\x1a\n"


def test_run_byte_deterministic(tmp_path):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    for out in (out_a, out_b):
        code = cli.main(
            ["run", "--density", density_arg("quartic025"), "--out", str(out),
             "--n-max", "80", "--seed", "11"]
        )
        assert code == 0
    for name in ("trajectory.csv", "summary.json", "plot_loglog.csv",
                 "er_margins.csv", "trajectory.png"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), name


def test_run_json_format(tmp_path):
    out = tmp_path / "run"
    code = cli.main(
        ["run", "--density", density_arg("quartic025"), "--out", str(out),
         "--n-max", "30", "--format", "json", "--no-plots"]
    )
    assert code == 0
    rows = json.loads((out / "trajectory.json").read_text())
    assert len(rows) == 30
    assert rows[0]["n"] == 1
    assert rows[0]["chi2"] == 0.25


def test_run_gaussian_reports_zero_distance(tmp_path):
    out = tmp_path / "run"
    code = cli.main(
        ["run", "--density", density_arg("gauss"), "--out", str(out),
         "--n-max", "30", "--no-plots"]
    )
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["r"] is None
    assert summary["slope"] is None
    assert "identically zero" in summary["note"]


def test_run_low_rate_order_suppresses_fit(tmp_path):
    out = tmp_path / "run"
    code = cli.main(
        ["run", "--density", density_arg("x2"), "--out", str(out),
         "--n-max", "30", "--no-plots"]
    )
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["slope"] is None
    assert "no rate claim" in summary["note"]


def test_run_round_robin(tmp_path):
    out = tmp_path / "run"
    code = cli.main(
        ["run", "--density", density_arg("quartic025"),
         "--density", density_arg("quartic020"), "--out", str(out),
         "--n-max", "120", "--no-plots"]
    )
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert abs(summary["slope"] - summary["slope_target"]) < 0.15


def test_run_tight_slope_tolerance_fails(tmp_path):
    out = tmp_path / "run"
    code = cli.main(
        ["run", "--density", density_arg("quartic025"), "--out", str(out),
         "--slope-tol", "1e-6", "--no-plots"]
    )
    assert code == 4


def test_run_flags_win_over_config(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({
        "densities": [density_arg("quartic025")],
        "n_max": 50,
        "plots": False,
    }))
    out = tmp_path / "run"
    code = cli.main(
        ["run", "--config", str(config), "--out", str(out), "--n-max", "25"]
    )
    assert code == 0
    lines = (out / "trajectory.csv").read_text().splitlines()
    assert len(lines) == 26


def test_config_unknown_key_is_error(tmp_path):
    config = tmp_path / "config.json"
    config.write_text('{"densitiees": ["x.json"]}')
    assert cli.main(["run", "--config", str(config)]) == 1


def test_bad_window_is_usage_error(tmp_path):
    code = cli.main(
        ["run", "--density", density_arg("quartic025"), "--window", "60:20",
         "--out", str(tmp_path), "--no-plots"]
    )
    assert code == 1


def test_bad_a_grid_is_usage_error(tmp_path):
    code = cli.main(
        ["verify", "--density", density_arg("quartic025"), "--a-grid", "1.5",
         "--out", str(tmp_path), "--no-plots"]
    )
    assert code == 1


def test_run_bound_violation_exit(tmp_path, monkeypatch):
    def fake_margins(trajectory):
        check = BoundCheck(lhs=2.0, rhs=1.0, margin=-1.0, holds=False,
                           context={"a": 0.9})
        return [(5, check)]

    monkeypatch.setattr(cli, "er_margins", fake_margins)
    out = tmp_path / "run"
    code = cli.main(
        ["run", "--density", density_arg("quartic025"), "--out", str(out),
         "--n-max", "30", "--no-plots"]
    )
    assert code == 5
    summary = json.loads((out / "summary.json").read_text())
    assert summary["er_violations"] == 1


def test_verify_certified_density(tmp_path):
    out = tmp_path / "verify"
    code = cli.main(
        ["verify", "--density", density_arg("quartic025"), "--out", str(out),
         "--a-grid", "0.5,0.9,0.95", "--no-plots"]
    )
    assert code == 0
    lines = (out / "verify_quartic025.csv").read_text().splitlines()
    assert lines[0] == "bound,a,lhs,rhs,margin,status,note"
    assert any(",skipped," in line for line in lines[1:]), "a=0.5 sits below the threshold"
    assert not any(",fail," in line for line in lines[1:])


def test_verify_gaussian_spot_checks_only(tmp_path):
    out = tmp_path / "verify"
    code = cli.main(
        ["verify", "--density", density_arg("gauss"), "--out", str(out),
         "--no-plots"]
    )
    assert code == 0
    body = (out / "verify_gauss.csv").read_text()
    assert "poincare" in body
    assert "gershgorin" not in body


def test_verify_inadmissible_density_exit(tmp_path):
    code = cli.main(
        ["verify", "--density", density_arg("x2"), "--out", str(tmp_path),
         "--no-plots"]
    )
    assert code == 3


def test_verify_renders_margin_figure(tmp_path):
    out = tmp_path / "verify"
    code = cli.main(
        ["verify", "--density", density_arg("quartic025"), "--out", str(out),
         "--a-grid", "0.9,0.95"]
    )
    assert code == 0
    assert (out / "margins_quartic025.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_verify_violation_exit(tmp_path, monkeypatch):
    def fake_chain(phi, a, dim):
        bad = BoundCheck(lhs=2.0, rhs=1.0, margin=-1.0, holds=False,
                         context={"stage": "norm-vs-rows"})
        good = BoundCheck(lhs=1.0, rhs=2.0, margin=1.0, holds=True,
                          context={"stage": "rows-vs-factor"})
        return bad, good

    monkeypatch.setattr(cli, "gershgorin_chain", fake_chain)
    code = cli.main(
        ["verify", "--density", density_arg("quartic025"),
         "--out", str(tmp_path), "--a-grid", "0.9", "--no-plots"]
    )
    assert code == 5


def test_oracle_passes(tmp_path):
    out = tmp_path / "oracle"
    code = cli.main(
        ["oracle", "--density", density_arg("quartic025"), "--out", str(out),
         "--reps", "20000", "--seed", "5", "--no-plots"]
    )
    assert code == 0
    lines = (out / "oracle_quartic025.csv").read_text().splitlines()
    assert lines[0] == "quantity,spectral,oracle,abs_diff,tolerance,status"
    assert not any(line.endswith(",fail") for line in lines[1:])


def test_oracle_detects_injected_sign_flip(tmp_path, monkeypatch):
    real_suite = cli.qstar_suite

    def flipped_suite(f, phi, a, **kwargs):
        comparisons = real_suite(f, phi, a, **kwargs)
        return [
            OracleComparison(
                quantity=c.quantity,
                spectral=-c.spectral if c.spectral != 0.0 else 1.0,
                oracle=c.oracle,
                abs_diff=abs(-c.spectral - c.oracle) if c.spectral != 0.0 else 1.0,
                tolerance=c.tolerance,
            )
            for c in comparisons
        ]

    monkeypatch.setattr(cli, "qstar_suite", flipped_suite)
    code = cli.main(
        ["oracle", "--density", density_arg("quartic025"),
         "--out", str(tmp_path), "--reps", "20000", "--no-plots"]
    )
    assert code == 6


def test_requires_at_least_one_density():
    assert cli.main(["run", "--n-max", "30"]) == 1
