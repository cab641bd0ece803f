"""Effective sample size estimation and rate-based relative ESS bounds."""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import gaussian_theory as gt

MIN_SERIES_LENGTH = 100
#: ESS values below this are not considered trustworthy
RELIABLE_ESS = 100.0


class DegenerateSeriesError(ValueError):
    """The series has zero empirical variance."""


def autocovariance(x) -> np.ndarray:
    """Biased empirical autocovariances at all lags, via FFT."""
    x = np.asarray(x, dtype=float)
    n = x.size
    xc = x - x.mean()
    nfft = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(xc, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[:n]
    return acov / n


def asymptotic_variance(series) -> float:
    """Geyer initial-positive-sequence estimate of the CLT variance.

    Pairs ``Gamma_m = gamma_2m + gamma_2m+1`` are summed while positive and
    ``sigma^2 = -gamma_0 + 2 sum_m Gamma_m``.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ValueError("series must be one-dimensional")
    if x.size < MIN_SERIES_LENGTH:
        raise ValueError(f"series needs at least {MIN_SERIES_LENGTH} points, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError("series has non-finite values")
    acov = autocovariance(x)
    if not acov[0] > 1e-300 or np.ptp(x) == 0:
        raise DegenerateSeriesError("series is constant")
    n_pairs = acov.size // 2
    pairs = acov[: 2 * n_pairs].reshape(n_pairs, 2).sum(axis=1)
    neg = np.flatnonzero(pairs <= 0)
    m = neg[0] if neg.size else n_pairs
    return float(-acov[0] + 2.0 * pairs[:m].sum())


def ess(series) -> float:
    x = np.asarray(series, dtype=float)
    sigma2 = asymptotic_variance(x)
    var = autocovariance(x)[0]
    if sigma2 <= 0:
        # a first pair that is already non-positive leaves -gamma_0
        return math.inf
    return float(x.size * var / sigma2)


@dataclass
class EssReport:
    per_function_ess: dict
    min_ess: float
    median_ess: float
    sweeps_per_ess: float
    seconds_per_ess: float
    T_kept: int
    unreliable: bool
    degenerate: list = field(default_factory=list)

    def to_json(self, path=None) -> str:
        text = json.dumps(asdict(self), indent=1, default=float)
        if path is not None:
            Path(path).write_text(text)
        return text

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["function", "ess"])
            for name, v in self.per_function_ess.items():
                w.writerow([name, repr(float(v))])


def ess_report(trace, wall_seconds: float) -> EssReport:
    """ESS of ``theta_i`` and ``theta_i^2`` for every column of a trace."""
    if not trace.valid:
        raise ValueError(f"trace is invalid: {trace.error}")
    X = np.asarray(trace.samples, dtype=float)
    T = X.shape[0]
    names = list(trace.column_names) or [f"theta_{i}" for i in range(X.shape[1])]
    per, degenerate = {}, []
    for i, name in enumerate(names):
        for label, f in ((name, X[:, i]), (f"{name}^2", X[:, i] ** 2)):
            if T < MIN_SERIES_LENGTH:
                per[label] = math.nan
                continue
            try:
                per[label] = ess(f)
            except DegenerateSeriesError:
                per[label] = math.nan
                degenerate.append(label)
    if degenerate:
        warnings.warn(f"{len(degenerate)} constant test functions excluded from the summary",
                      RuntimeWarning, stacklevel=2)
    vals = np.array([v for v in per.values() if np.isfinite(v)])
    if vals.size:
        mn, med = float(vals.min()), float(np.median(vals))
    else:
        mn = med = math.nan
    unreliable = T < MIN_SERIES_LENGTH or not (mn >= RELIABLE_ESS)
    return EssReport(
        per_function_ess=per, min_ess=mn, median_ess=med,
        sweeps_per_ess=T / med if med > 0 else math.nan,
        seconds_per_ess=wall_seconds / med if med > 0 else math.nan,
        T_kept=T, unreliable=bool(unreliable), degenerate=degenerate,
    )


def _check_rho(rho):
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"rho must lie in [0, 1), got {rho}")


def relative_ess_lower_bound_tv(rho: float, C: float, pi_f2: float) -> float:
    """Lower bound on ESS/T from a TV convergence rate ``C rho^t``."""
    _check_rho(rho)
    if C < 0:
        raise ValueError("C must be non-negative")
    if not pi_f2 > 0:
        raise ValueError("pi(f^2) must be positive")
    return 1.0 / (1.0 + (4.0 * C / pi_f2) * rho / (1.0 - rho))


def relative_ess_lower_bound_chi2(rho: float) -> float:
    """Lower bound on ESS/T from a chi-squared contraction rate ``rho``."""
    _check_rho(rho)
    r = math.sqrt(rho)
    return 1.0 / (1.0 + 2.0 * r / (1.0 - r))


@dataclass(frozen=True)
class RateEssBound:
    rho: float
    bound_tv: float
    bound_chi2: float

    @classmethod
    def at(cls, rho: float, C: float = 1.0, pi_f2: float = 1.0) -> "RateEssBound":
        return cls(rho, relative_ess_lower_bound_tv(rho, C, pi_f2), relative_ess_lower_bound_chi2(rho))


def gaussian_mixing_time(target, mu0, Sigma0, epsilon: float, which=gt.Divergence.W2,
                         cap: int = 100_000) -> int:
    """Smallest sweep count whose divergence from the target is at most epsilon."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    target = gt._as_target(target)
    eig = gt._Eig(target)
    B = gt.build_dugs_matrices(target).B
    dmu = np.asarray(mu0, dtype=float) - target.mu
    dS = np.asarray(Sigma0, dtype=float) - target.Sigma
    for t in range(cap + 1):
        if gt.divergence_from_offsets(which, eig, dmu, dS) <= epsilon:
            return t
        dmu = B @ dmu
        dS = B @ dS @ B.T
        dS = 0.5 * (dS + dS.T)
    raise RuntimeError(f"divergence did not reach {epsilon} within {cap} sweeps")
