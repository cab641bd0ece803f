"""Acceptance gate: one test per primary criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``; the summary lines are
printed at the end of the session (and immediately with ``-s``).
"""

import math
import time

import numpy as np
import pytest
from scipy import stats

from cggibbs import diagnostics as dg, experiments, gaussian_theory as gt
from cggibbs import samplers as sm
from cggibbs.glm_core import Dataset, GlmModel, Horseshoe, IsotropicGaussian, Likelihood

from conftest import ACCEPTANCE_LINES


def report(idx, title, ok, detail, seconds=None, budget=None):
    within = budget is None or seconds <= budget
    status = "PASS" if ok and within else "FAIL"
    timing = "" if seconds is None else f" [{seconds:.1f}s" + (f" / {budget:.0f}s]" if budget else "]")
    line = f"[{status}] A{idx:02d} {title}: {detail}{timing}"
    ACCEPTANCE_LINES[idx] = line
    print(line)
    assert ok, line
    assert within, f"{line} (over the runtime budget)"


def test_a01_sweep_cost_scaling(tmp_path):
    start = time.perf_counter()
    cfg = experiments.SweepScalingConfig(d_grid=(16, 32, 64, 128, 256, 512), n=100, sweeps=200,
                                         replicates=3, out_dir=str(tmp_path))
    s = experiments.sweep_scaling(cfg)["slopes"]
    ok = 0.85 <= s["cached"] <= 1.15 and 1.8 <= s["naive"] <= 2.2
    report(1, "sweep-cost scaling", ok,
           f"cached slope {s['cached']:.3f} in [0.85,1.15], naive slope {s['naive']:.3f} in [1.8,2.2]",
           time.perf_counter() - start, 300)


def test_a02_cached_naive_equivalence():
    start = time.perf_counter()
    worst = 0.0
    rng = np.random.default_rng(2)
    for k in range(10):
        n = int(rng.integers(20, 201))
        d = int(rng.integers(2, 65))
        X = rng.normal(size=(n, d)) * (rng.random((n, d)) < rng.choice([0.1, 0.5, 1.0]))
        ds = Dataset(X, (rng.random(n) < 0.5).astype(float))
        prior = Horseshoe() if k % 3 == 2 else IsotropicGaussian(10.0)
        model = GlmModel(prior, Likelihood.LOGISTIC_BERNOULLI)
        kernel = "mh" if k % 4 == 3 else "slice"
        a = sm.run_chain(model, ds, 100, 99, kernel=kernel, mode="cached", seed=k, keep_latents=True)
        b = sm.run_chain(model, ds, 100, 99, kernel=kernel, mode="naive", seed=k, keep_latents=True)
        assert a.valid and b.valid
        worst = max(worst, float(np.max(np.abs(a.samples - b.samples))))
    report(2, "cached/naive equivalence", worst <= 1e-8,
           f"max discrepancy {worst:.2e} <= 1e-8 over 10 problems", time.perf_counter() - start, 120)


def test_a03_rate_bound_and_w2_slope_suite():
    start = time.perf_counter()
    recs = gt.theory_check_suite(200, d_max=10, seed=0)
    bound_ok = all(r["rho"] <= r["lemma_bound"] + 1e-12 for r in recs)
    sloped = [r for r in recs if r["rho"] > 0.1]
    slope_ok = all(r["slope_ok"] for r in sloped)
    worst = max(abs(r["w2_slope"] - r["log_rho"]) / abs(r["log_rho"]) for r in sloped)
    report(3, "M-matrix rate bound + W2 decay slope", bound_ok and slope_ok,
           f"bound holds on {sum(r['holds'] for r in recs)}/200; {len(sloped)} slopes, worst rel err {worst:.2e}",
           time.perf_counter() - start, 120)


def test_a04_diagonal_rescaling_invariance():
    start = time.perf_counter()
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(100):
        d = int(rng.integers(2, 9))
        S = gt.random_spd(d, rng)
        D = np.exp(rng.normal(scale=1.5, size=d))
        a, b = gt.prop1_check(S, D)
        worst = max(worst, abs(a - b))
    report(4, "rho(B) invariant under diagonal rescaling", worst <= 1e-8,
           f"max |delta rho| {worst:.2e} <= 1e-8 over 100 pairs", time.perf_counter() - start, 60)


def _grid_oracle_2x2(S, points=200001):
    """min over c of kappa(diag(1,c) S diag(1,c)), closed-form 2x2 eigenvalues."""
    c = np.exp(np.linspace(-4, 4, points))
    a, b, e = S[0, 0], S[0, 1] * c, S[1, 1] * c * c
    tr, det = a + e, a * e - b * b
    disc = np.sqrt(np.maximum(tr * tr / 4 - det, 0))
    return float(np.min((tr / 2 + disc) / (tr / 2 - disc)))


def test_a05_condition_number_ordering_and_2x2():
    start = time.perf_counter()
    rng = np.random.default_rng(5)
    violations = 0
    for _ in range(500):
        d = int(rng.integers(2, 7))
        S = gt.random_spd(d, rng)
        kr = gt.kappa_r(S, budget=100 * d, seed=int(rng.integers(1 << 30)))
        violations += kr > min(gt.kappa(S), gt.kappa_cor(S)) + 1e-9
    worst = 0.0
    for r in np.round(np.arange(0.1, 0.95, 0.1), 1):
        S = np.array([[1.0, r], [r, 1.0]])
        oracle = _grid_oracle_2x2(S)
        kr = gt.kappa_r(S)
        worst = max(worst, abs(kr - oracle), abs(oracle - (1 + r) / (1 - r)))
    report(5, "condition-number ordering + 2x2 analytics", violations == 0 and worst <= 1e-3,
           f"{violations} ordering violations in 500; 2x2 worst gap {worst:.2e} <= 1e-3",
           time.perf_counter() - start, 120)


def test_a06_ess_calibration():
    start = time.perf_counter()
    rng = np.random.default_rng(6)
    iid = dg.ess(rng.normal(size=100_000)) / 100_000
    a, T = 0.5, 100_000
    e = rng.normal(size=T)
    x = np.empty(T)
    x[0] = e[0] / math.sqrt(1 - a * a)
    for t in range(1, T):
        x[t] = a * x[t - 1] + e[t]
    ar = dg.ess(x) / T
    tgt = gt.GaussianTarget.from_covariance(np.array([[1.0, 0.9], [0.9, 1.0]]))
    ref = dg.ess(sm.run_exact_gaussian_gibbs(tgt, 10_000_000, seed=60)[:, 0]) / 10_000_000
    meas = dg.ess(sm.run_exact_gaussian_gibbs(tgt, 100_000, seed=61)[:, 0]) / 100_000
    ok = 0.8 <= iid <= 1.2 and abs(ar - 1 / 3) <= 0.15 / 3 and abs(meas - ref) <= 0.2 * ref
    report(6, "ESS calibration", ok,
           f"iid {iid:.3f}; AR(1) {ar:.4f} vs 1/3; Gibbs 2x2 {meas:.4f} vs reference {ref:.4f}",
           time.perf_counter() - start, 300)


def test_a07_rate_to_ess_bounds():
    start = time.perf_counter()

    def close(a, b):
        return abs(a - b) <= 4 * np.spacing(b)

    at_zero = dg.relative_ess_lower_bound_tv(0.0, 2.0, 0.5) == 1.0 and dg.relative_ess_lower_bound_chi2(0.0) == 1.0
    hand = close(dg.relative_ess_lower_bound_chi2(0.25), 1 / 3) and close(dg.relative_ess_lower_bound_chi2(0.81), 1 / 19)
    z = 1e4
    rho = 1 - 1 / z
    chi = dg.relative_ess_lower_bound_chi2(rho) * 4 * z
    C, f2 = 2.0, 0.7
    tv = dg.relative_ess_lower_bound_tv(rho, C, f2) * z / (f2 / (4 * C))
    ok = at_zero and hand and abs(chi - 1) <= 0.05 and abs(tv - 1) <= 0.05
    report(7, "rate-to-ESS bounds", ok,
           f"rho=0 -> 1: {at_zero}; hand values: {hand}; chi2*4z {chi:.4f}; tv ratio {tv:.4f} at z=1e4",
           time.perf_counter() - start)


def test_a08_kernel_invariance():
    start = time.perf_counter()
    m = 100_000
    pvals = {}
    model = GlmModel(IsotropicGaussian(1.0), Likelihood.LOGISTIC_BERNOULLI, use_likelihood=False)
    ds = Dataset(np.ones((1, m)), [1.0])
    x0 = np.random.default_rng(80).standard_normal(m)
    for kernel in ("slice", "mh"):
        tr = sm.run_chain(model, ds, 1, 0, kernel=kernel, seed=81, theta0=x0, step_sd=2.4)
        pvals[f"normal/{kernel}"] = stats.kstest(tr.samples[0], "norm").pvalue
    r = 0.8
    rng = np.random.default_rng(84)
    x2 = rng.standard_normal(m)
    x1 = r * x2 + math.sqrt(1 - r * r) * rng.standard_normal(m)
    s = math.sqrt(1 - r * r)
    krng = sm.make_rng(85)
    cfg = sm.SliceConfig(w=2.0)
    for kernel in ("slice", "mh"):
        new = np.empty(m)
        for i in range(m):
            mean = r * x2[i]

            def logf(v, mean=mean):
                return -0.5 * ((v - mean) / s) ** 2
            if kernel == "slice":
                new[i] = sm.slice_update_coordinate(x1[i], logf, cfg, krng)
            else:
                new[i] = sm.mh_update_coordinate(x1[i], logf, 2.4 * s, krng)
        pvals[f"bivariate/{kernel}"] = stats.kstest((new - r * x2) / s, "norm").pvalue
    ok = all(p > 0.01 for p in pvals.values())
    detail = ", ".join(f"{k} p={v:.3f}" for k, v in pvals.items())
    report(8, "slice/MH kernel invariance (KS, alpha=0.01)", ok, detail, time.perf_counter() - start)


@pytest.mark.slow
def test_a09_dimension_transition(tmp_path):
    start = time.perf_counter()
    cfg = experiments.EssScalingConfig(d_grid=(4, 8, 16, 32, 64, 128, 256, 512), n=32,
                                       scenario="prefix_significant_1", sweeps=5000, warmup=500,
                                       replicates=2, seed=9, out_dir=str(tmp_path))
    s = experiments.ess_scaling(cfg)
    per = ", ".join(f"{d}:{v:.1f}" for d, v in zip(s["d_grid"], s["sweeps_per_median_ess"]))
    report(9, "d-vs-n transition (sweeps per median ESS)", s["tail_slope"] <= 0.2,
           f"tail slope {s['tail_slope']:.3f} <= 0.2; {per}", time.perf_counter() - start, 1200)


@pytest.mark.slow
def test_a10_zero_feature_contrast(tmp_path):
    start = time.perf_counter()
    cfg = experiments.IrrelevantFeaturesConfig(d_grid=(31, 64, 128, 256, 512), scenarios=(3,), n=32,
                                               sweeps=5000, warmup=500, replicates=2, seed=10,
                                               out_dir=str(tmp_path))
    s = experiments.irrelevant_features(cfg)["scenarios"][3]
    report(10, "zero-feature scenario: median ESS gains, min ESS does not", s["contrast"],
           f"median ESS/sweep gain {s['median_ess_per_sweep_gain']:.2f}, "
           f"min ESS/sweep gain {s['min_ess_per_sweep_gain']:.2f}", time.perf_counter() - start)
