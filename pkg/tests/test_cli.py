import csv
import json
import math

import numpy as np
import pytest

from cggibbs import cli, experiments


@pytest.fixture(autouse=True)
def one_thread(monkeypatch):
    monkeypatch.setenv("CGGIBBS_THREADS", "1")


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[sweep-scaling]\nd_grid = 2^3..2^4\nsweeps = 3\nreplicates = 1\nmodes = cached\n")
    out = tmp_path / "out"
    code = cli.main(["sweep-scaling", "--config", str(cfg), "--set", f"out_dir={out}", "--set", "n=20"])
    assert code == 0
    got = rows(out / "sweep_scaling.csv")
    assert [int(r["d"]) for r in got] == [8, 16]
    assert all(r["config_hash"] == got[0]["config_hash"] for r in got)


def test_parse_grid():
    assert experiments.parse_grid("2^2..2^4") == (4, 8, 16)
    assert experiments.parse_grid("3..5") == (3, 4, 5)
    assert experiments.parse_grid("1, 7,9") == (1, 7, 9)


def test_validation_exit_codes(tmp_path, capsys):
    assert cli.main(["theory-check", "--set", "n_instances=0"]) == cli.EXIT_CONFIG
    assert "empty" in capsys.readouterr().err
    assert cli.main(["run", "--set", "bogus=1"]) == cli.EXIT_CONFIG
    assert cli.main(["run", "--set", "noequals"]) == cli.EXIT_CONFIG
    assert cli.main(["irrelevant-features", "--set", "d_grid=8,64"]) == cli.EXIT_CONFIG
    assert cli.main(["run", "--config", str(tmp_path / "missing.ini")]) == cli.EXIT_CONFIG
    assert cli.main(["run", "--set", "dataset=/nonexistent.csv"]) == cli.EXIT_CONFIG


def test_runtime_error_exit_code(tmp_path, monkeypatch):
    def boom(cfg):
        raise RuntimeError("kaput")
    monkeypatch.setitem(experiments.COMMANDS, "run", (experiments.RunConfig, boom))
    assert cli.main(["run", "--set", f"out_dir={tmp_path}"]) == cli.EXIT_RUNTIME


def test_theory_check_failure_exit_code(tmp_path, monkeypatch):
    real = experiments.gaussian_theory.theory_check_suite

    def broken(*a, **k):
        recs = real(*a, **k)
        recs[0]["holds"] = False
        return recs
    monkeypatch.setattr(experiments.gaussian_theory, "theory_check_suite", broken)
    code = cli.main(["theory-check", "--set", "n_instances=3", "--set", f"out_dir={tmp_path}"])
    assert code == cli.EXIT_CHECK
    report = json.loads((tmp_path / "theory_check.json").read_text())
    assert report["failures"][0]["seed"] == [0, 0]


def test_theory_check_small_suite(tmp_path):
    assert cli.main(["theory-check", "--set", "n_instances=10", "--set", f"out_dir={tmp_path}"]) == 0
    report = json.loads((tmp_path / "theory_check.json").read_text())
    fx = report["fixture_2x2_r0.5"]
    assert fx["rho"] == pytest.approx(0.25) and fx["lemma_bound"] == pytest.approx(math.exp(-1 / 3))
    assert {"d", "kappa", "kappa_cor", "kappa_r", "rho", "lemma_bound", "holds"} <= set(report["instances"][0])


def test_single_point_grid_flagged(tmp_path):
    cfg = experiments.SweepScalingConfig(d_grid=(8,), n=10, sweeps=2, replicates=1, modes=("cached",),
                                         out_dir=str(tmp_path))
    summary = experiments.sweep_scaling(cfg)
    assert math.isnan(summary["slopes"]["cached"])
    assert summary["flags"]


def test_run_is_deterministic(tmp_path):
    args = ["run", "--set", "sweeps=150", "--set", "warmup=10", "--set", "n=30", "--set", "d=4"]
    assert cli.main(args + ["--set", f"out_dir={tmp_path / 'a'}"]) == 0
    assert cli.main(args + ["--set", f"out_dir={tmp_path / 'b'}"]) == 0
    assert (tmp_path / "a" / "trace.csv").read_text() == (tmp_path / "b" / "trace.csv").read_text()


def test_prior_only_run_recovers_prior_sd(tmp_path):
    cfg = experiments.RunConfig(use_likelihood=False, prior_sd=3.0, d=4, sweeps=20000, warmup=100,
                                out_dir=str(tmp_path))
    experiments.run(cfg)
    X = np.loadtxt(tmp_path / "trace.csv", delimiter=",", skiprows=1)
    assert np.all(np.abs(X.std(axis=0) / 3.0 - 1) < 0.05)


def test_horseshoe_smoke(tmp_path):
    cfg = experiments.RunConfig(prior="horseshoe", n=10, d=5, sweeps=300, warmup=30, out_dir=str(tmp_path))
    summary = experiments.run(cfg)
    X = np.loadtxt(tmp_path / "trace.csv", delimiter=",", skiprows=1)
    assert X.shape == (270, 5) and np.all(np.isfinite(X))
    assert summary["kept"] == 270


def test_external_trace_ingestion(tmp_path):
    ext = tmp_path / "ext.csv"
    X = np.random.default_rng(0).normal(size=(3000, 2))
    np.savetxt(ext, X, delimiter=",", header="a,b", comments="")
    cfg = experiments.EssScalingConfig(d_grid=(4,), n=20, sweeps=200, warmup=20,
                                       external_traces=(str(ext),), out_dir=str(tmp_path / "o"))
    experiments.ess_scaling(cfg)
    got = [r for r in rows(tmp_path / "o" / "ess_scaling.csv") if r["source"] == str(ext)]
    assert float(got[0]["median_ess"]) / 3000 == pytest.approx(1.0, abs=0.2)


def test_ess_scaling_same_seed_same_csv(tmp_path):
    base = dict(d_grid=(4, 8), n=20, sweeps=150, warmup=10)
    for name in ("a", "b"):
        experiments.ess_scaling(experiments.EssScalingConfig(out_dir=str(tmp_path / name), **base))
    a, b = rows(tmp_path / "a" / "ess_scaling.csv"), rows(tmp_path / "b" / "ess_scaling.csv")
    for ra, rb in zip(a, b):
        for col in experiments.TIMING_COLUMNS:
            ra.pop(col, None)
            rb.pop(col, None)
        assert ra == rb


def test_unreliable_cells_flagged(tmp_path):
    summary = experiments.ess_scaling(experiments.EssScalingConfig(
        d_grid=(4,), n=20, sweeps=150, warmup=10, out_dir=str(tmp_path)))
    assert summary["unreliable_cells"] == [(4, 0)]


def test_irrelevant_scenarios_differ(tmp_path):
    base = dict(d_grid=(31, 40), n=20, sweeps=150, warmup=10)
    s = experiments.irrelevant_features(experiments.IrrelevantFeaturesConfig(
        scenarios=(1, 2), out_dir=str(tmp_path), **base))
    assert s["scenarios"][1]["sweeps_per_median_ess"] != s["scenarios"][2]["sweeps_per_median_ess"]


def test_cond_scaling_cells(tmp_path):
    cfg = experiments.CondScalingConfig(d_grid=(1, 2, 4, 8), n=16, kappa_r_budget=200, out_dir=str(tmp_path))
    summary = experiments.cond_scaling(cfg)
    got = rows(tmp_path / "cond_scaling.csv")
    first = got[0]
    assert float(first["kappa"]) == float(first["kappa_cor"]) == float(first["kappa_r_upper"]) == 1.0
    assert summary["ordering_holds"]


@pytest.mark.slow
def test_cond_growth_slows_beyond_n(tmp_path):
    """Surrogate condition numbers grow steeply up to d ~ n and much more slowly after."""
    cfg = experiments.CondScalingConfig(d_grid=(4, 8, 16, 32, 64, 128, 256), n=32, kappa_r_budget=200,
                                        scenario="prefix_significant_1", out_dir=str(tmp_path))
    experiments.cond_scaling(cfg)
    got = rows(tmp_path / "cond_scaling.csv")
    d = np.array([float(r["d"]) for r in got])
    k = np.array([float(r["kappa"]) for r in got])
    before = experiments.loglog_slope(d[d <= 32], k[d <= 32])
    after = experiments.loglog_slope(d[d >= 64], k[d >= 64])
    assert after < 1.0 < before


def test_surrogate_covariance_formula():
    X = np.array([[1.0, 2.0], [0.0, 1.0], [1.0, -1.0]])
    S = experiments.surrogate_covariance(X, 10.0)
    np.testing.assert_allclose(np.linalg.inv(S), X.T @ X / 4 + np.eye(2) / 100, atol=1e-12)


def test_threads_env_validation(monkeypatch):
    monkeypatch.setenv("CGGIBBS_THREADS", "zero")
    with pytest.raises(experiments.ConfigError):
        experiments._threads()
