import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cggibbs import diagnostics as dg
from cggibbs import gaussian_theory as gt
from cggibbs.samplers import Trace, run_exact_gaussian_gibbs


def ar1(a, T, seed):
    rng = np.random.default_rng(seed)
    e = rng.normal(size=T)
    x = np.empty(T)
    x[0] = e[0] / math.sqrt(1 - a * a)
    for t in range(1, T):
        x[t] = a * x[t - 1] + e[t]
    return x


def test_autocovariance_matches_direct_sum():
    x = np.random.default_rng(0).normal(size=300)
    xc = x - x.mean()
    for k in (0, 1, 7, 299):
        assert dg.autocovariance(x)[k] == pytest.approx(np.dot(xc[: 300 - k], xc[k:]) / 300, abs=1e-12)


def test_asymptotic_variance_iid():
    x = np.random.default_rng(1).normal(size=100_000)
    assert dg.asymptotic_variance(x) == pytest.approx(1.0, rel=0.1)


def test_asymptotic_variance_ar1():
    a = 0.5
    x = ar1(a, 100_000, 2)
    marginal = 1 / (1 - a * a)
    assert dg.asymptotic_variance(x) / marginal == pytest.approx((1 + a) / (1 - a), rel=0.15)


def test_alternating_series_truncates():
    x = np.tile([1.0, -1.0], 100)
    v = dg.asymptotic_variance(x)
    assert math.isfinite(v)
    assert dg.ess(x) > x.size


def test_errors():
    with pytest.raises(dg.DegenerateSeriesError):
        dg.asymptotic_variance(np.ones(200))
    with pytest.raises(ValueError, match="at least"):
        dg.asymptotic_variance(np.arange(50.0))


def test_ess_iid_and_ar1():
    assert dg.ess(np.random.default_rng(3).normal(size=50_000)) / 50_000 == pytest.approx(1.0, abs=0.2)
    assert dg.ess(ar1(0.5, 100_000, 4)) / 100_000 == pytest.approx(1 / 3, rel=0.15)


def _trace(X, names=None):
    return Trace(samples=X, sweep_times=np.zeros(len(X)), op_counts={}, seed=0, config={},
                 column_names=names or [f"t{i}" for i in range(X.shape[1])])


def test_ess_report_iid():
    X = np.random.default_rng(5).normal(size=(4000, 3))
    rep = dg.ess_report(_trace(X), wall_seconds=2.0)
    assert len(rep.per_function_ess) == 6
    assert rep.median_ess / 4000 == pytest.approx(1.0, abs=0.2)
    assert rep.min_ess <= rep.median_ess
    assert rep.sweeps_per_ess == pytest.approx(4000 / rep.median_ess)
    assert rep.seconds_per_ess == pytest.approx(2.0 / rep.median_ess)
    assert not rep.unreliable
    assert all(0 < v <= 1.5 * 4000 for v in rep.per_function_ess.values())


def test_ess_report_duplicate_and_degenerate_columns():
    rng = np.random.default_rng(6)
    x = rng.normal(size=500)
    X = np.column_stack([x, x, np.zeros(500)])
    with pytest.warns(RuntimeWarning, match="constant"):
        rep = dg.ess_report(_trace(X, ["a", "b", "c"]), 1.0)
    assert rep.per_function_ess["a"] == rep.per_function_ess["b"]
    assert set(rep.degenerate) == {"c", "c^2"}
    assert math.isfinite(rep.min_ess)


def test_ess_report_short_trace_unreliable():
    rep = dg.ess_report(_trace(np.random.default_rng(7).normal(size=(50, 2))), 1.0)
    assert rep.unreliable


def test_ess_report_serialization(tmp_path):
    rep = dg.ess_report(_trace(np.random.default_rng(8).normal(size=(300, 2))), 1.0)
    rep.to_json(tmp_path / "r.json")
    rep.to_csv(tmp_path / "r.csv")
    assert (tmp_path / "r.csv").read_text().splitlines()[0] == "function,ess"


def test_rate_bounds_arithmetic():
    assert dg.relative_ess_lower_bound_tv(0.0, 3.0, 2.0) == 1.0
    assert dg.relative_ess_lower_bound_chi2(0.0) == 1.0
    assert dg.relative_ess_lower_bound_tv(0.5, 1.0, 1.0) == pytest.approx(0.2, rel=1e-15)
    assert dg.relative_ess_lower_bound_chi2(0.25) == pytest.approx(1 / 3, rel=1e-15)
    assert dg.relative_ess_lower_bound_chi2(0.81) == pytest.approx(1 / 19, rel=1e-14)
    for bad in (1.0, 1.5, -0.1):
        with pytest.raises(ValueError):
            dg.relative_ess_lower_bound_chi2(bad)
    with pytest.raises(ValueError):
        dg.relative_ess_lower_bound_tv(0.5, -1.0, 1.0)


@given(st.floats(0, 0.999), st.floats(0, 0.999), st.floats(0.01, 10), st.floats(0.01, 10))
def test_rate_bounds_monotone(r1, r2, C, f2):
    lo, hi = sorted((r1, r2))
    assert dg.relative_ess_lower_bound_chi2(hi) <= dg.relative_ess_lower_bound_chi2(lo)
    assert dg.relative_ess_lower_bound_tv(hi, C, f2) <= dg.relative_ess_lower_bound_tv(lo, C, f2)
    assert 0 < dg.relative_ess_lower_bound_chi2(hi) <= 1


def test_chi2_bound_below_measured_relative_ess():
    """Bound evaluated at rho(B)^2 stays below measured ESS/T on 2x2 Gaussian chains.

    For this fixture the bound coincides with the exact value (1-r^2)/(1+r^2), so the
    comparison allows for Monte Carlo error.
    """
    for r in (0.5, 0.8):
        tgt = gt.GaussianTarget.from_covariance(np.array([[1.0, r], [r, 1.0]]))
        rho = gt.dugs_rate(tgt)
        bound = dg.relative_ess_lower_bound_chi2(rho ** 2)
        measured = dg.ess(run_exact_gaussian_gibbs(tgt, 200_000, seed=1)[:, 0]) / 200_000
        assert bound <= measured * 1.1


def test_mixing_time():
    tgt = gt.GaussianTarget.from_covariance(np.array([[1.0, 0.9], [0.9, 1.0]]))
    assert dg.gaussian_mixing_time(tgt, tgt.mu, tgt.Sigma, 1e-3) == 0
    assert dg.gaussian_mixing_time(tgt, [1.0, 1.0], np.zeros((2, 2)), 100.0) == 0
    t1 = dg.gaussian_mixing_time(tgt, [3.0, 3.0], np.zeros((2, 2)), 1e-3)
    t2 = dg.gaussian_mixing_time(tgt, [3.0, 3.0], np.zeros((2, 2)), 5e-4)
    assert t2 - t1 == pytest.approx(math.log(2) / -math.log(0.81), abs=1.0)
    with pytest.raises(RuntimeError, match="within 3"):
        dg.gaussian_mixing_time(tgt, [3.0, 3.0], np.zeros((2, 2)), 1e-9, cap=3)
    with pytest.raises(ValueError):
        dg.gaussian_mixing_time(tgt, [3.0, 3.0], np.zeros((2, 2)), 0.0)
