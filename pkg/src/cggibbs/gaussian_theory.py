"""Exact behaviour of deterministic-scan Gibbs on Gaussian targets.

For ``pi = N(mu, Sigma)`` with precision ``Q``, one deterministic-scan sweep
maps ``N(m, S)`` to ``N(mu + B (m - mu), Sigma + B (S - Sigma) B^T)`` where

    A = I - diag(Q_11^-1, ..., Q_dd^-1) Q,   A = L + U  (strict lower / upper),
    B = (I - L)^-1 U.

The spectral radius of ``B`` is the per-sweep geometric rate.  This module
builds these matrices, the moment recursion, closed-form KL and W2 distances
between Gaussians, three condition numbers, and randomized checks of the
rate bound ``rho(B) <= exp(-1/kappa)`` (for precisions with non-positive
off-diagonals) and of the invariance of ``rho(B)`` under diagonal rescaling.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg, optimize
from scipy.sparse.linalg import ArpackNoConvergence, eigs

#: dense eigen-decomposition is used up to this size
DENSE_EIG_MAX = 512
SQRT_EIG_FLOOR = 1e-14


class NotSPDError(ValueError):
    pass


class HypothesisError(ValueError):
    """The precision matrix has a positive off-diagonal entry."""


def _check_spd(S, name="Sigma"):
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise NotSPDError(f"{name} must be square, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise NotSPDError(f"{name} has non-finite entries")
    if not np.allclose(S, S.T, rtol=1e-10, atol=1e-12 * np.abs(S).max()):
        raise NotSPDError(f"{name} is not symmetric")
    S = 0.5 * (S + S.T)
    lam_min = np.linalg.eigvalsh(S)[0]
    if not lam_min > 0:
        raise NotSPDError(f"{name} is not positive definite (min eigenvalue {lam_min:.3g})")
    return S


@dataclass(frozen=True)
class GaussianTarget:
    mu: np.ndarray
    Sigma: np.ndarray
    Q: np.ndarray

    @classmethod
    def from_covariance(cls, Sigma, mu=None) -> "GaussianTarget":
        Sigma = _check_spd(Sigma)
        d = Sigma.shape[0]
        mu = np.zeros(d) if mu is None else np.asarray(mu, dtype=float)
        c = linalg.cho_factor(Sigma)
        Q = linalg.cho_solve(c, np.eye(d))
        Q = 0.5 * (Q + Q.T)
        _check_inverse(Q, Sigma)
        return cls(mu=mu, Sigma=Sigma, Q=Q)

    @classmethod
    def from_precision(cls, Q, mu=None) -> "GaussianTarget":
        Q = _check_spd(Q, "Q")
        d = Q.shape[0]
        mu = np.zeros(d) if mu is None else np.asarray(mu, dtype=float)
        Sigma = linalg.cho_solve(linalg.cho_factor(Q), np.eye(d))
        Sigma = 0.5 * (Sigma + Sigma.T)
        _check_inverse(Q, Sigma)
        return cls(mu=mu, Sigma=Sigma, Q=Q)

    @property
    def d(self) -> int:
        return self.mu.shape[0]


def _check_inverse(Q, Sigma):
    d = Q.shape[0]
    err = np.abs(Q @ Sigma - np.eye(d)).max()
    # the attainable accuracy degrades with the condition number
    if err > 1e-8 * max(1.0, kappa(Sigma)):
        raise NotSPDError(f"precision is not an accurate inverse (max error {err:.2g})")


def _as_target(x) -> GaussianTarget:
    if isinstance(x, GaussianTarget):
        return x
    return GaussianTarget.from_covariance(np.atleast_2d(x))


@dataclass(frozen=True)
class DugsMatrices:
    A: np.ndarray
    L: np.ndarray
    U: np.ndarray
    B: np.ndarray


def build_dugs_matrices(target) -> DugsMatrices:
    target = _as_target(target)
    Q = target.Q
    d = target.d
    A = np.eye(d) - Q / np.diag(Q)[:, None]
    np.fill_diagonal(A, 0.0)
    L = np.tril(A, -1)
    U = A - L
    # I - L is unit lower triangular
    B = linalg.solve_triangular(np.eye(d) - L, U, lower=True, unit_diagonal=True)
    return DugsMatrices(A=A, L=L, U=U, B=B)


def spectral_radius(M, tol: float = 1e-10, maxiter: int | None = None) -> float:
    """Largest eigenvalue modulus; dense solver up to 512, ARPACK above."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"matrix must be square, got {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    if M.shape[0] <= DENSE_EIG_MAX:
        return float(np.max(np.abs(np.linalg.eigvals(M))))
    maxiter = maxiter or 20 * M.shape[0]
    try:
        vals = eigs(M, k=1, which="LM", tol=tol, maxiter=maxiter, return_eigenvectors=False)
    except ArpackNoConvergence as exc:
        raise RuntimeError(f"spectral radius did not converge within {maxiter} iterations") from exc
    return float(np.abs(vals[0]))


def dugs_rate(target) -> float:
    return spectral_radius(build_dugs_matrices(target).B)


def dugs_moments(target, mu0, Sigma0, t: int):
    """Mean and covariance of the chain after ``t`` sweeps from N(mu0, Sigma0)."""
    if t < 0:
        raise ValueError("t must be non-negative")
    target = _as_target(target)
    B = build_dugs_matrices(target).B
    Bt = np.linalg.matrix_power(B, t)
    mu0 = np.asarray(mu0, dtype=float)
    Sigma0 = np.asarray(Sigma0, dtype=float)
    mu_t = target.mu + Bt @ (mu0 - target.mu)
    Sigma_t = target.Sigma + Bt @ (Sigma0 - target.Sigma) @ Bt.T
    return mu_t, Sigma_t


def dugs_moment_step(target: GaussianTarget, B, mu_t, Sigma_t):
    """Advance the moment recursion by one sweep."""
    mu_next = target.mu + B @ (mu_t - target.mu)
    Sigma_next = target.Sigma + B @ (Sigma_t - target.Sigma) @ B.T
    return mu_next, 0.5 * (Sigma_next + Sigma_next.T)


# --------------------------------------------------------------------------
# condition numbers


def kappa(Sigma) -> float:
    lam = np.linalg.eigvalsh(np.asarray(Sigma, dtype=float))
    if not lam[0] > 0:
        raise NotSPDError(f"matrix is not positive definite (min eigenvalue {lam[0]:.3g})")
    return float(lam[-1] / lam[0])


def kappa_cor(Sigma) -> float:
    Sigma = np.asarray(Sigma, dtype=float)
    if not np.all(np.diag(Sigma) > 0):
        raise NotSPDError("matrix has a non-positive diagonal entry")
    s = 1.0 / np.sqrt(np.diag(Sigma))
    return kappa(Sigma * np.outer(s, s))


def _log_kappa_scaled(s, Sigma):
    e = np.exp(s)
    lam = np.linalg.eigvalsh(Sigma * np.outer(e, e))
    if lam[0] <= 0:
        return np.inf
    return math.log(lam[-1] / lam[0])


def kappa_r(Sigma, budget: int = 4000, seed: int = 0, return_scaling: bool = False):
    """Upper bound on the best condition number over diagonal rescalings.

    Minimises ``log kappa(e^S Sigma e^S)`` over diagonal ``S`` with
    Nelder-Mead from five starts (no scaling, +/- log marginal sd and two
    random points), ``budget`` function evaluations per start.  The true
    infimum is not computable in general, so the result is an upper bound;
    it never exceeds ``min(kappa, kappa_cor)`` because both are start points.
    """
    Sigma = _check_spd(Sigma)
    d = Sigma.shape[0]
    log_sd = 0.5 * np.log(np.diag(Sigma))
    rng = np.random.default_rng(seed)
    starts = [np.zeros(d), -log_sd, log_sd, rng.normal(size=d), rng.normal(size=d)]
    best_val, best_s = np.inf, starts[0]
    for s0 in starts:
        v0 = _log_kappa_scaled(s0, Sigma)
        if v0 < best_val:
            best_val, best_s = v0, s0
        if d == 1:
            continue
        res = optimize.minimize(_log_kappa_scaled, s0, args=(Sigma,), method="Nelder-Mead",
                                options={"maxfev": budget, "xatol": 1e-10, "fatol": 1e-13})
        if res.fun < best_val:
            best_val, best_s = float(res.fun), res.x
    value = float(math.exp(best_val))
    # recompute the two closed-form candidates so the ordering holds to the last bit
    for cand, s in ((kappa(Sigma), np.zeros(d)), (kappa_cor(Sigma), -log_sd)):
        if cand <= value:
            value, best_s = cand, s
    if return_scaling:
        return value, np.exp(best_s)
    return value


# --------------------------------------------------------------------------
# rate bound and diagonal-scaling invariance


def _require_nonpositive_offdiag(Q, tol=1e-12):
    off = Q - np.diag(np.diag(Q))
    if np.any(off > tol * np.abs(np.diag(Q)).max()):
        raise HypothesisError("precision matrix has positive off-diagonal elements")


def lemma1_check(Sigma):
    """``(rho(B), exp(-1/kappa), rho <= bound)`` for an M-matrix precision."""
    target = _as_target(Sigma)
    _require_nonpositive_offdiag(target.Q)
    rho = dugs_rate(target)
    bound = math.exp(-1.0 / kappa(target.Sigma))
    return rho, bound, bool(rho <= bound + 1e-12)


def prop1_check(Sigma, D):
    """Spectral radii of ``B`` before and after rescaling ``Sigma -> D Sigma D``."""
    D = np.asarray(D, dtype=float)
    if D.ndim == 2:
        D = np.diag(D)
    if np.any(D <= 0):
        raise ValueError("scaling must be a positive diagonal")
    Sigma = _check_spd(Sigma)
    rho = dugs_rate(GaussianTarget.from_covariance(Sigma))
    rho_scaled = dugs_rate(GaussianTarget.from_covariance(Sigma * np.outer(D, D)))
    return rho, rho_scaled


# --------------------------------------------------------------------------
# divergences between Gaussians


def _moments(x):
    if isinstance(x, GaussianTarget):
        return x.mu, x.Sigma
    mu, S = x
    return np.atleast_1d(np.asarray(mu, dtype=float)), np.atleast_2d(np.asarray(S, dtype=float))


def psd_sqrt(S) -> np.ndarray:
    """Principal square root via symmetric eigen-decomposition."""
    lam, V = np.linalg.eigh(0.5 * (S + S.T))
    lam = np.where(lam < SQRT_EIG_FLOOR, np.maximum(lam, 0.0), lam)
    return (V * np.sqrt(lam)) @ V.T


def gaussian_kl(p, q) -> float:
    """KL(p || q) for Gaussians given as targets or ``(mu, Sigma)`` pairs."""
    mu_p, S_p = _moments(p)
    mu_q, S_q = _moments(q)
    d = mu_p.shape[0]
    cq = linalg.cho_factor(_check_spd(S_q, "q covariance"))
    sign, logdet_p = np.linalg.slogdet(S_p)
    if sign <= 0:
        return math.inf
    diff = mu_q - mu_p
    tr = np.trace(linalg.cho_solve(cq, S_p))
    quad = diff @ linalg.cho_solve(cq, diff)
    logdet_q = 2.0 * np.sum(np.log(np.diag(cq[0])))
    return float(max(0.5 * (tr - d + quad + logdet_q - logdet_p), 0.0))


def gaussian_w2(p, q) -> float:
    """2-Wasserstein distance; covariances may be singular (point masses)."""
    mu_p, S_p = _moments(p)
    mu_q, S_q = _moments(q)
    root_q = psd_sqrt(S_q)
    cross = psd_sqrt(root_q @ S_p @ root_q)
    w2sq = np.sum((mu_p - mu_q) ** 2) + np.trace(S_p) + np.trace(S_q) - 2.0 * np.trace(cross)
    return float(math.sqrt(max(w2sq, 0.0)))


class Divergence(str, enum.Enum):
    W2 = "W2"
    KL_BOUND_TV = "KL_bound_TV"


class _Eig:
    """Eigen-decomposition of the target covariance, reused along a curve."""

    def __init__(self, target: GaussianTarget):
        self.target = target
        self.lam, self.V = np.linalg.eigh(target.Sigma)
        self.root = np.sqrt(self.lam)


def _bures_sq_near(eig: _Eig, E, max_iter=200):
    """Squared Bures distance between Sigma + E and Sigma, free of cancellation.

    Writing ``(S^1/2 (S + E) S^1/2)^1/2 = S + X1 + X2`` with ``X1`` the
    first-order Sylvester solution, the distance is ``-2 tr X2`` and ``X2``
    solves ``S X2 + X2 S = -(X1 + X2)^2``.  Returns None when the fixed-point
    iteration does not contract (E not small relative to S).
    """
    lam = eig.lam
    denom = lam[:, None] + lam[None, :]
    Et = eig.V.T @ E @ eig.V
    C = eig.root[:, None] * Et * eig.root[None, :]
    X1 = C / denom
    if np.linalg.norm(X1, 2) > 0.25 * lam[0]:
        return None
    X2 = np.zeros_like(X1)
    for _ in range(max_iter):
        X = X1 + X2
        new = -(X @ X) / denom
        if np.max(np.abs(new - X2)) <= 1e-15 * max(np.max(np.abs(new)), 1e-300):
            X2 = new
            break
        X2 = new
    else:
        return None
    return float(max(-2.0 * np.trace(X2), 0.0))


def _x_minus_log1p(x):
    # x - log(1 + x), accurate for small |x|
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-3
    out = np.empty_like(x)
    xs = x[small]
    out[small] = xs * xs * (0.5 - xs / 3.0 + xs * xs / 4.0 - xs ** 3 / 5.0)
    out[~small] = x[~small] - np.log1p(x[~small])
    return out


def divergence_from_offsets(which, eig: _Eig, dmu, E) -> float:
    """Divergence of ``N(mu + dmu, Sigma + E)`` from the target ``N(mu, Sigma)``.

    Working with the offsets rather than the moments keeps full relative
    accuracy when the chain is close to stationarity.
    """
    which = Divergence(which)
    target = eig.target
    if which is Divergence.W2:
        b2 = _bures_sq_near(eig, E)
        if b2 is None:
            return gaussian_w2((target.mu + dmu, target.Sigma + E), target)
        return float(math.sqrt(np.dot(dmu, dmu) + b2))
    # KL(pi_t || pi) through the eigenvalues of Sigma^-1/2 E Sigma^-1/2
    inv_root = 1.0 / eig.root
    R = inv_root[:, None] * (eig.V.T @ E @ eig.V) * inv_root[None, :]
    ev = np.linalg.eigvalsh(0.5 * (R + R.T))
    if np.any(ev <= -1.0):
        return math.inf
    z = eig.V.T @ dmu
    kl = 0.5 * (np.sum(_x_minus_log1p(ev)) + np.sum(z * z / eig.lam))
    # Pinsker: TV <= sqrt(KL / 2)
    return float(math.sqrt(0.5 * max(kl, 0.0)))


def divergence_at(which, moments, target) -> float:
    """Divergence of the Gaussian ``moments = (mean, cov)`` from ``target``."""
    target = _as_target(target)
    m, S = _moments(moments)
    return divergence_from_offsets(which, _Eig(target), m - target.mu, S - target.Sigma)


@dataclass
class DecayCurve:
    values: np.ndarray
    slope: float
    fit_range: tuple
    t_values: np.ndarray


def fit_log_slope(values, t=None, floor_rel: float = 0.0, tail_fraction: float = 0.25,
                  min_points: int = 3):
    """Least-squares slope of ``log(values)`` against ``t`` over the tail.

    Considers the contiguous run of positive finite values above
    ``floor_rel`` times the largest one and fits its last ``tail_fraction``.
    Returns the slope and the (first, last) indices used.
    """
    v = np.asarray(values, dtype=float)
    t = np.arange(v.size, dtype=float) if t is None else np.asarray(t, dtype=float)
    usable = np.isfinite(v) & (v > 0)
    if not usable.any():
        return math.nan, (0, 0)
    usable &= v >= floor_rel * v[usable].max()
    idx = np.flatnonzero(usable)
    if idx.size < min_points:
        return math.nan, (0, 0)
    last = idx[-1]
    first = last
    while first > 0 and usable[first - 1]:
        first -= 1
    span = last - first + 1
    if span < min_points:
        return math.nan, (int(first), int(last))
    lo = last + 1 - max(min_points, int(math.ceil(tail_fraction * span)))
    sel = slice(lo, last + 1)
    slope = np.polyfit(t[sel], np.log(v[sel]), 1)[0]
    return float(slope), (int(lo), int(last))


def divergence_decay_curve(target, mu0, Sigma0, t_max: int, which=Divergence.W2,
                           n_points: int | None = None, tail_fraction: float = 0.25) -> DecayCurve:
    """Divergence between the t-sweep law and the target, with tail log-slope.

    With ``n_points`` unset every t = 0..t_max is evaluated; otherwise that
    many evenly spaced sweep counts are evaluated from matrix powers, which
    keeps long horizons cheap.  The offsets ``B^t (mu0 - mu)`` and
    ``B^t (Sigma0 - Sigma) B^t'`` are propagated directly, so the curve keeps
    its relative accuracy far below machine epsilon of the target moments.
    """
    if t_max < 1:
        raise ValueError("t_max must be at least 1")
    target = _as_target(target)
    eig = _Eig(target)
    B = build_dugs_matrices(target).B
    dmu = np.asarray(mu0, dtype=float) - target.mu
    dS = np.asarray(Sigma0, dtype=float) - target.Sigma
    if n_points is None or n_points >= t_max + 1:
        ts = np.arange(t_max + 1)
        vals = np.empty(ts.size)
        for t in range(t_max + 1):
            vals[t] = divergence_from_offsets(which, eig, dmu, dS)
            dmu = B @ dmu
            dS = B @ dS @ B.T
            dS = 0.5 * (dS + dS.T)
    else:
        ts = np.unique(np.linspace(0, t_max, n_points).round().astype(int))
        vals = np.empty(ts.size)
        for k, t in enumerate(ts):
            Bt = np.linalg.matrix_power(B, int(t))
            E = Bt @ dS @ Bt.T
            vals[k] = divergence_from_offsets(which, eig, Bt @ dmu, 0.5 * (E + E.T))
    slope, (lo, hi) = fit_log_slope(vals, t=ts, tail_fraction=tail_fraction)
    return DecayCurve(values=vals, slope=slope, fit_range=(int(ts[lo]), int(ts[hi])), t_values=ts)


# --------------------------------------------------------------------------
# random instances


def random_m_matrix_precision(d: int, rng: np.random.Generator) -> np.ndarray:
    """SPD precision with non-positive off-diagonals: ``D (s I - W) D``.

    ``W`` is symmetric, entrywise nonnegative with random sparsity, ``s``
    exceeds the spectral radius of ``W`` by a log-uniform margin and ``D``
    is a random positive diagonal.
    """
    W = rng.random((d, d)) * (rng.random((d, d)) < rng.uniform(0.3, 1.0))
    W = np.triu(W, 1)
    W = W + W.T
    r = np.max(np.abs(np.linalg.eigvalsh(W))) if d > 1 else 0.0
    margin = 10.0 ** rng.uniform(-3, 0.5)
    s = r * (1.0 + margin) + (1e-3 if r == 0 else 0.0)
    D = np.exp(rng.normal(scale=1.0, size=d))
    Q = (s * np.eye(d) - W) * np.outer(D, D)
    return 0.5 * (Q + Q.T)


def random_spd(d: int, rng: np.random.Generator) -> np.ndarray:
    """Random covariance with heterogeneous scales and correlations."""
    G = rng.normal(size=(d, d + rng.integers(0, 3)))
    S = G @ G.T / G.shape[1] + 10.0 ** rng.uniform(-3, 0) * np.eye(d)
    D = np.exp(rng.normal(scale=1.0, size=d))
    S = S * np.outer(D, D)
    return 0.5 * (S + S.T)


def theory_check_suite(n_instances: int, d_max: int = 10, seed: int = 0,
                       d_min: int = 2, slope_rho_min: float = 0.1, slope_rtol: float = 0.02) -> list[dict]:
    """Rate bound and W2 decay-slope checks on random M-matrix targets.

    Each record carries the per-instance seed so failures can be replayed.
    """
    if n_instances < 1:
        raise ValueError("the suite needs at least one instance")
    records = []
    for k, child in enumerate(np.random.SeedSequence(seed).spawn(n_instances)):
        rng = np.random.default_rng(child)
        d = int(rng.integers(d_min, d_max + 1))
        target = GaussianTarget.from_precision(random_m_matrix_precision(d, rng))
        rho, bound, holds = lemma1_check(target)
        rec = {
            "instance": k, "seed": [seed, k], "d": d,
            "kappa": kappa(target.Sigma), "kappa_cor": kappa_cor(target.Sigma),
            "kappa_r": kappa_r(target.Sigma, budget=200 * d),
            "rho": rho, "lemma_bound": bound, "holds": holds,
        }
        if rho > slope_rho_min:
            x0 = target.mu + rng.normal(size=d) * np.sqrt(np.diag(target.Sigma))
            # decay by about e^-60 so the leading mode dominates the tail
            t_max = int(math.ceil(60.0 / -math.log(rho))) + 10
            curve = divergence_decay_curve(target, x0, np.zeros((d, d)), t_max,
                                           n_points=min(t_max + 1, 200))
            rec["w2_slope"] = curve.slope
            rec["log_rho"] = math.log(rho)
            rec["slope_ok"] = bool(abs(curve.slope - math.log(rho)) <= slope_rtol * abs(math.log(rho)))
        records.append(rec)
    return records
