"""Logistic GLM likelihood, priors and the cached linear predictor.

The cache holds ``eta[i] = x_i . theta`` for every observation.  After a
single-coordinate change ``theta_j -> theta_j'`` each predictor moves by
``(theta_j' - theta_j) * x_ij``, so one evaluation of the likelihood along
coordinate ``j`` costs O(n) instead of O(dn).

Parameter vector layout
-----------------------
Gaussian prior: ``theta[0:d]`` are the regression coefficients.

Horseshoe prior: ``theta[0:d]`` are the coefficients (``theta[0]`` is the
intercept with a t(3, 0, 1) prior), ``theta[d:2d-1]`` hold ``log lambda_j``
for coefficients ``1..d-1`` and ``theta[2d-1]`` holds ``log tau``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy import stats

from . import _kernels

#: zero fraction above which a design matrix is stored as sparse columns
SPARSE_STORAGE_THRESHOLD = 0.5


class Likelihood(enum.Enum):
    LOGISTIC_BERNOULLI = "logistic"


@dataclass(frozen=True)
class IsotropicGaussian:
    sd: float = 10.0

    def __post_init__(self):
        if not self.sd > 0:
            raise ValueError(f"prior sd must be positive, got {self.sd}")


@dataclass(frozen=True)
class Horseshoe:
    """t(3,0,1) intercept, N(0, lambda_j^2 tau^2) slabs, half-Cauchy scales."""


PriorSpec = IsotropicGaussian | Horseshoe


@dataclass(frozen=True)
class GlmModel:
    """Bernoulli-logit likelihood plus a prior.

    ``use_likelihood=False`` turns the likelihood off so the chain targets
    the prior; handy for sanity checks of the samplers.
    """

    prior: PriorSpec = field(default_factory=IsotropicGaussian)
    likelihood: Likelihood = Likelihood.LOGISTIC_BERNOULLI
    use_likelihood: bool = True

    def dimension(self, d: int) -> int:
        """Length of the parameter vector for ``d`` regression coefficients."""
        return 2 * d if isinstance(self.prior, Horseshoe) else d

    @property
    def prior_code(self) -> int:
        return _kernels.HORSESHOE if isinstance(self.prior, Horseshoe) else _kernels.GAUSSIAN

    @property
    def prior_sd(self) -> float:
        return self.prior.sd if isinstance(self.prior, IsotropicGaussian) else 1.0


class Dataset:
    """Design matrix ``X`` (n x d) and binary responses ``y``.

    ``X`` may be a dense array or any scipy sparse matrix.  Column storage for
    the samplers is built once: sparse columns (explicit zeros dropped) when
    more than half of the entries are zero, full dense columns otherwise.
    Instances are treated as immutable and can be shared between chains.
    """

    def __init__(self, X, y, feature_names: Sequence[str] | None = None,
                 has_intercept: bool = False):
        if sp.issparse(X):
            X = sp.csc_matrix(X, dtype=float)
            X.sum_duplicates()
            if not np.all(np.isfinite(X.data)):
                raise ValueError("design matrix has non-finite entries")
        else:
            X = np.asarray(X, dtype=float)
            if X.ndim != 2:
                raise ValueError(f"design matrix must be 2-d, got shape {X.shape}")
            if not np.all(np.isfinite(X)):
                raise ValueError("design matrix has non-finite entries")
        y = np.asarray(y, dtype=float).ravel()
        n, d = X.shape
        if n < 1 or d < 1:
            raise ValueError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
        if y.shape[0] != n:
            raise ValueError(f"y has {y.shape[0]} entries but X has {n} rows")
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("responses must be 0 or 1")
        if feature_names is not None:
            feature_names = list(feature_names)
            if len(feature_names) != d:
                raise ValueError(f"{len(feature_names)} feature names for {d} columns")
        self.X = X
        self.y = y
        self.feature_names = feature_names
        self.has_intercept = has_intercept
        self._columns = None

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def is_sparse_input(self) -> bool:
        return sp.issparse(self.X)

    def zero_fraction(self) -> float:
        nnz = self.X.count_nonzero() if sp.issparse(self.X) else np.count_nonzero(self.X)
        return 1.0 - nnz / (self.n * self.d)

    @property
    def storage(self) -> str:
        return "sparse" if self.zero_fraction() > SPARSE_STORAGE_THRESHOLD else "dense"

    def columns(self):
        """(indptr, indices, data) column arrays used by the compiled kernels."""
        if self._columns is None:
            if self.storage == "sparse":
                csc = sp.csc_matrix(self.X)
                csc.eliminate_zeros()
            else:
                dense = self.X.toarray() if sp.issparse(self.X) else self.X
                # keep every entry so each column has exactly n stored values
                csc = sp.csc_matrix(dense.shape)
                csc.indptr = np.arange(0, self.n * self.d + 1, self.n, dtype=np.int64)
                csc.indices = np.tile(np.arange(self.n, dtype=np.int64), self.d)
                csc.data = np.asfortranarray(dense).ravel(order="F").copy()
            self._columns = (np.ascontiguousarray(csc.indptr, dtype=np.int64),
                             np.ascontiguousarray(csc.indices, dtype=np.int64),
                             np.ascontiguousarray(csc.data, dtype=float))
        return self._columns

    def dense(self) -> np.ndarray:
        return self.X.toarray() if sp.issparse(self.X) else self.X

    def column(self, j: int):
        """Row indices and values of the stored entries of column ``j``."""
        indptr, indices, data = self.columns()
        return indices[indptr[j]:indptr[j + 1]], data[indptr[j]:indptr[j + 1]]

    def __repr__(self):
        return f"Dataset(n={self.n}, d={self.d}, storage={self.storage!r})"


@dataclass
class LinearPredictorCache:
    values: np.ndarray
    refresh_counter: int = 0


def softplus(eta) -> np.ndarray:
    """log(1 + exp(eta)), switching to asymptotic forms beyond |eta| > 35."""
    eta = np.asarray(eta, dtype=float)
    out = np.log1p(np.exp(np.clip(eta, -35.0, 35.0)))
    hi = eta > 35.0
    lo = eta < -35.0
    out[hi] = eta[hi] + np.exp(-eta[hi])
    out[lo] = np.exp(eta[lo])
    return out


def _regression_block(theta, d):
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 1 or theta.shape[0] < d:
        raise ValueError(f"parameter vector of length {theta.shape} has no regression block of length {d}")
    return theta[:d]


def _fresh_predictors(dataset: Dataset, theta) -> np.ndarray:
    return np.asarray(dataset.X @ _regression_block(theta, dataset.d), dtype=float).ravel()


def cache_init(dataset: Dataset, theta) -> LinearPredictorCache:
    """Compute every linear predictor from scratch (O(dn))."""
    return LinearPredictorCache(values=_fresh_predictors(dataset, theta))


def cache_refresh(cache: LinearPredictorCache, dataset: Dataset, theta) -> None:
    """Rebuild the cache in place to discard accumulated rounding drift."""
    cache.values[:] = _fresh_predictors(dataset, theta)
    cache.refresh_counter = 0


def proposed_linear_predictor(cache: LinearPredictorCache, dataset: Dataset, i: int,
                              j: int, theta_j: float, theta_j_new: float) -> float:
    if not 0 <= i < dataset.n:
        raise IndexError(f"observation index {i} out of range for n={dataset.n}")
    if not 0 <= j < dataset.d:
        raise IndexError(f"coordinate {j} out of range for d={dataset.d}")
    x = dataset.X[i, j]
    return cache.values[i] - theta_j * x + theta_j_new * x


def cache_commit(cache: LinearPredictorCache, dataset: Dataset, j: int,
                 theta_j: float, theta_j_new: float) -> int:
    """Apply an accepted change of coordinate ``j``; returns entries touched."""
    if not 0 <= j < dataset.d:
        raise IndexError(f"coordinate {j} out of range for d={dataset.d}")
    rows, vals = dataset.column(j)
    cache.values[rows] += (theta_j_new - theta_j) * vals
    return rows.shape[0]


def log_likelihood_at(model: GlmModel, dataset: Dataset, predictors) -> float:
    """Sum of Bernoulli-logit log densities at the given linear predictors."""
    eta = np.asarray(predictors, dtype=float)
    if eta.shape != (dataset.n,):
        raise ValueError(f"expected {dataset.n} predictors, got shape {eta.shape}")
    if not np.all(np.isfinite(eta)):
        raise ValueError("non-finite linear predictor")
    if not model.use_likelihood:
        return 0.0
    return float(np.sum(dataset.y * eta - softplus(eta)))


def log_prior(model: GlmModel, theta, d: int | None = None) -> float:
    """Normalised log prior density of the full parameter vector.

    For the horseshoe the scales are on the log scale, so the Jacobian
    ``log lambda`` (and ``log tau``) is included.
    """
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)):
        raise ValueError("non-finite parameter vector")
    prior = model.prior
    if isinstance(prior, IsotropicGaussian):
        return float(np.sum(stats.norm.logpdf(theta, scale=prior.sd)))
    if d is None:
        if theta.shape[0] % 2:
            raise ValueError("horseshoe parameter vector must have even length 2d")
        d = theta.shape[0] // 2
    if theta.shape[0] != 2 * d:
        raise ValueError(f"horseshoe parameter vector must have length {2 * d}")
    beta = theta[:d]
    log_lam = theta[d:2 * d - 1]
    log_tau = theta[2 * d - 1]
    lp = stats.t.logpdf(beta[0], df=3)
    lp += np.sum(stats.norm.logpdf(beta[1:], scale=np.exp(log_lam + log_tau)))
    lp += np.sum(stats.halfcauchy.logpdf(np.exp(log_lam)) + log_lam)
    lp += stats.halfcauchy.logpdf(np.exp(log_tau)) + log_tau
    return float(lp)


def conditional_logdensity(model: GlmModel, dataset: Dataset, cache: LinearPredictorCache,
                           j: int, theta, theta_j_new: float, check: bool = False) -> float:
    """Log joint density with ``theta[j]`` replaced by ``theta_j_new``.

    Equal to the log of the full conditional of coordinate ``j`` up to an
    additive constant.  The likelihood part reuses the cache: the current
    total is corrected on the rows where column ``j`` is stored.  Latent
    horseshoe coordinates never touch the data.  ``check=True`` spot-checks
    the cache against a fresh dot product on a few rows.
    """
    theta = np.asarray(theta, dtype=float)
    d = dataset.d
    if not 0 <= j < theta.shape[0]:
        raise IndexError(f"coordinate {j} out of range")
    if check:
        _spot_check(cache, dataset, theta)
    proposal = theta.copy()
    proposal[j] = theta_j_new
    lp = log_prior(model, proposal, d)
    if model.use_likelihood:
        eta = cache.values
        if j < d:
            rows, vals = dataset.column(j)
            eta = eta.copy()
            eta[rows] += (theta_j_new - theta[j]) * vals
        lp += log_likelihood_at(model, dataset, eta)
    return lp


def naive_conditional_logdensity(model: GlmModel, dataset: Dataset, j: int, theta,
                                 theta_j_new: float) -> float:
    """Same quantity as :func:`conditional_logdensity` without any cache."""
    proposal = np.array(theta, dtype=float)
    proposal[j] = theta_j_new
    lp = log_prior(model, proposal, dataset.d)
    if model.use_likelihood:
        lp += log_likelihood_at(model, dataset, _fresh_predictors(dataset, proposal))
    return lp


def _spot_check(cache, dataset, theta, rows=8, rtol=1e-6):
    idx = np.linspace(0, dataset.n - 1, min(rows, dataset.n)).astype(int)
    beta = theta[:dataset.d]
    fresh = np.asarray(dataset.X[idx] @ beta).ravel()
    if np.any(np.abs(fresh - cache.values[idx]) > rtol * (1.0 + np.abs(fresh))):
        raise RuntimeError("linear predictor cache is inconsistent with theta")


__all__ = [
    "Dataset", "GlmModel", "Horseshoe", "IsotropicGaussian", "Likelihood",
    "LinearPredictorCache", "PriorSpec", "cache_commit", "cache_init",
    "cache_refresh", "conditional_logdensity", "log_likelihood_at",
    "log_prior", "naive_conditional_logdensity", "proposed_linear_predictor",
    "softplus",
]
