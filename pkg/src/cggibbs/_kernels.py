"""Compiled inner loops for coordinate-wise sampling of logistic GLMs.

Everything here works on the column (CSC) arrays of the design matrix and on
plain numpy arrays so that numba can compile it.  The Python-level API in
:mod:`cggibbs.glm_core` and :mod:`cggibbs.samplers` wraps these functions;
the pure-Python implementations there are kept as independent references.

Random numbers are drawn from a ``numpy.random.Generator`` passed in by the
caller.  numba shares the generator state with Python and reproduces numpy's
draws exactly, so the compiled and reference paths consume identical streams.
"""

import math

import numpy as np
from numba import njit

CACHED = 0
NAIVE = 1

GAUSSIAN = 0
HORSESHOE = 1

SLICE = 0
MH = 1

# ops layout
OP_MULADD = 0
OP_EVALS = 1
OP_COMMIT = 2
OP_CAP_HITS = 3
N_OPS = 4

_LOG_2_OVER_PI = math.log(2.0 / math.pi)
# log density normaliser of Student t with 3 degrees of freedom
_T3_LOGNORM = math.lgamma(2.0) - math.lgamma(1.5) - 0.5 * math.log(3.0 * math.pi)


@njit(cache=True, nogil=True)
def softplus(x):
    """log(1 + exp(x)) with asymptotic branches beyond |x| > 35."""
    if x > 35.0:
        return x + math.exp(-x)
    if x < -35.0:
        return math.exp(x)
    return math.log1p(math.exp(x))


@njit(cache=True, nogil=True)
def logistic_term(y, eta):
    return y * eta - softplus(eta)


@njit(cache=True, nogil=True)
def matvec_columns(indptr, indices, data, theta, out, d):
    """out = X @ theta[:d] using column storage; returns multiply-add count."""
    out[:] = 0.0
    nrows = out.shape[0]
    count = 0
    for j in range(d):
        t = theta[j]
        lo = indptr[j]
        hi = indptr[j + 1]
        if hi - lo == nrows:
            # full column: canonical storage means indices are 0..n-1
            for i in range(nrows):
                out[i] += t * data[lo + i]
        else:
            for k in range(lo, hi):
                out[indices[k]] += t * data[k]
        count += hi - lo
    return count


@njit(cache=True, nogil=True)
def half_cauchy_log_scale(u):
    # half-Cauchy(0,1) density of exp(u), plus the log-scale Jacobian u
    return _LOG_2_OVER_PI - softplus(2.0 * u) + u


@njit(cache=True, nogil=True)
def prior_coordinate(j, value, theta, d, prior_kind, prior_sd):
    """Prior terms of the joint log density that involve coordinate ``j``.

    ``value`` replaces ``theta[j]``.  Terms not involving coordinate ``j``
    are dropped, so this is only meaningful up to an additive constant.
    """
    if prior_kind == GAUSSIAN:
        z = value / prior_sd
        return -0.5 * z * z
    # horseshoe layout: [theta_0..theta_{d-1}, log lambda_1..log lambda_{d-1}, log tau]
    log_tau_idx = 2 * d - 1
    if j == 0:
        return _T3_LOGNORM - 2.0 * math.log1p(value * value / 3.0)
    if j < d:
        s = theta[d + j - 1] + theta[log_tau_idx]
        z = value * math.exp(-s)
        return -0.5 * z * z
    if j < log_tau_idx:
        b = theta[j - d + 1]
        z = b * math.exp(-value - theta[log_tau_idx])
        return -value - 0.5 * z * z + half_cauchy_log_scale(value)
    total = 0.0
    for k in range(1, d):
        z = theta[k] * math.exp(-theta[d + k - 1] - value)
        total += -value - 0.5 * z * z
    return total + half_cauchy_log_scale(value)


@njit(cache=True, nogil=True)
def glm_conditional(x, args):
    """Unnormalised log conditional of coordinate ``j`` at value ``x``.

    Cached mode touches only the stored entries of column ``j`` (O(nnz_j));
    naive mode rebuilds every linear predictor from scratch (O(nnz(X))).
    """
    (j, theta, cache, indptr, indices, data, y, d, mode,
     prior_kind, prior_sd, use_lik, scratch, ops) = args
    ops[OP_EVALS] += 1
    lp = prior_coordinate(j, x, theta, d, prior_kind, prior_sd)
    if use_lik and j < d:
        s = 0.0
        if mode == CACHED:
            delta = x - theta[j]
            for k in range(indptr[j], indptr[j + 1]):
                i = indices[k]
                s += logistic_term(y[i], cache[i] + delta * data[k])
            ops[OP_MULADD] += indptr[j + 1] - indptr[j]
        else:
            old = theta[j]
            theta[j] = x
            ops[OP_MULADD] += matvec_columns(indptr, indices, data, theta, scratch, d)
            theta[j] = old
            for i in range(scratch.shape[0]):
                s += logistic_term(y[i], scratch[i])
        lp += s
    return lp


@njit(cache=True, nogil=True)
def _doubling_accept(logf, args, x0, x1, z, left, right, w):
    lo = left
    hi = right
    differ = False
    while hi - lo > 1.1 * w:
        mid = 0.5 * (lo + hi)
        if (x0 < mid and x1 >= mid) or (x0 >= mid and x1 < mid):
            differ = True
        if x1 < mid:
            hi = mid
        else:
            lo = mid
        if differ and z >= logf(lo, args) and z >= logf(hi, args):
            return False
    return True


@njit(cache=True, nogil=True)
def slice_doubling(logf, args, x0, w, p, rng, ops):
    """One slice-sampling update with doubling and shrinkage.

    Draw order per update: level, window offset, one uniform per doubling,
    one uniform per shrinkage candidate.
    """
    f0 = logf(x0, args)
    if not math.isfinite(f0):
        raise ValueError("slice sampler: target is not finite at the current point")
    z = f0 + math.log1p(-rng.random())
    left = x0 - w * rng.random()
    right = left + w
    f_left = logf(left, args)
    f_right = logf(right, args)
    k = p
    while k > 0 and (z < f_left or z < f_right):
        if rng.random() < 0.5:
            left -= right - left
            f_left = logf(left, args)
        else:
            right += right - left
            f_right = logf(right, args)
        k -= 1
    if k == 0 and (z < f_left or z < f_right):
        ops[OP_CAP_HITS] += 1
    lo = left
    hi = right
    while True:
        x1 = lo + rng.random() * (hi - lo)
        if z < logf(x1, args) and _doubling_accept(logf, args, x0, x1, z, left, right, w):
            return x1
        if x1 < x0:
            lo = x1
        else:
            hi = x1
        if hi - lo <= 1e-12 * (1.0 + abs(x0)):
            # interval collapsed onto the current point
            return x0


@njit(cache=True, nogil=True)
def mh_gaussian(logf, args, x0, step_sd, rng):
    f0 = logf(x0, args)
    x1 = x0 + step_sd * rng.standard_normal()
    f1 = logf(x1, args)
    u = rng.random()
    if f1 - f0 >= 0.0 or u < math.exp(f1 - f0):
        return x1
    return x0


# not cached on disk: it closes over glm_conditional as a first-class function
@njit(nogil=True)
def glm_sweep(order, theta, cache, indptr, indices, data, y, d, mode,
              prior_kind, prior_sd, use_lik, kernel, w, p, step_sd,
              rng, scratch, ops):
    """Update every coordinate listed in ``order`` once, in order."""
    for t in range(order.shape[0]):
        j = order[t]
        args = (j, theta, cache, indptr, indices, data, y, d, mode,
                prior_kind, prior_sd, use_lik, scratch, ops)
        cur = theta[j]
        if kernel == SLICE:
            new = slice_doubling(glm_conditional, args, cur, w, p, rng, ops)
        else:
            new = mh_gaussian(glm_conditional, args, cur, step_sd, rng)
        if new != cur:
            if mode == CACHED and use_lik and j < d:
                delta = new - cur
                for k in range(indptr[j], indptr[j + 1]):
                    cache[indices[k]] += delta * data[k]
                ops[OP_COMMIT] += indptr[j + 1] - indptr[j]
            theta[j] = new


@njit(cache=True, nogil=True)
def gaussian_gibbs_run(mu, Q, theta, n_sweeps, rng, out):
    """Deterministic-scan exact Gibbs on N(mu, Q^{-1}); writes one row per sweep."""
    d = mu.shape[0]
    for t in range(n_sweeps):
        for j in range(d):
            s = 0.0
            for k in range(d):
                if k != j:
                    s += Q[j, k] * (theta[k] - mu[k])
            mean = mu[j] - s / Q[j, j]
            theta[j] = mean + rng.standard_normal() / math.sqrt(Q[j, j])
        out[t, :] = theta


def empty_ops():
    return np.zeros(N_OPS, dtype=np.int64)
