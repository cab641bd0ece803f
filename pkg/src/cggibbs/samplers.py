"""Coordinate-wise samplers for logistic GLMs and Gaussian targets.

A chain is driven by a sweep schedule (DUGS, RSGS or RPGS) and a
within-Gibbs kernel (slice sampling with doubling, or Gaussian random-walk
MH).  Chains run either *cached*, updating the linear-predictor cache in
O(n) per likelihood evaluation, or *naive*, recomputing every ``x_i . theta``
from scratch.  Both modes consume the same random streams, so their
trajectories agree up to rounding.

Random streams come from ``numpy.random.Philox`` generators spawned from a
``SeedSequence``: one stream for the schedule and one for the kernel.
"""

from __future__ import annotations

import csv
import enum
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import _kernels
from .glm_core import Dataset, GlmModel, cache_init, cache_refresh

logger = logging.getLogger(__name__)


class ScheduleKind(str, enum.Enum):
    DUGS = "DUGS"
    RSGS = "RSGS"
    RPGS = "RPGS"

    @classmethod
    def _missing_(cls, value):
        if isinstance(value, str) and value.upper() in cls.__members__:
            return cls[value.upper()]
        return None


class Kernel(str, enum.Enum):
    SLICE = "slice"
    MH = "mh"


class Mode(str, enum.Enum):
    CACHED = "cached"
    NAIVE = "naive"


def make_rng(seed) -> np.random.Generator:
    """Counter-based generator; ``seed`` may be an int or a SeedSequence."""
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


def spawn_seeds(master_seed: int, count: int) -> list[np.random.SeedSequence]:
    """Independent child seeds, e.g. one per replicate chain."""
    return np.random.SeedSequence(master_seed).spawn(count)


class SweepSchedule:
    """Order in which coordinates ``0..D-1`` are visited in each sweep."""

    def __init__(self, kind: ScheduleKind | str, dimension: int, rng: np.random.Generator | None = None):
        self.kind = ScheduleKind(kind)
        self.dimension = dimension
        if self.kind is not ScheduleKind.DUGS and rng is None:
            raise ValueError(f"{self.kind.value} schedule needs a random generator")
        self.rng = rng
        self._fixed = np.arange(dimension, dtype=np.int64)

    def next_sweep(self) -> np.ndarray:
        if self.kind is ScheduleKind.DUGS:
            return self._fixed
        if self.kind is ScheduleKind.RPGS:
            return self.rng.permutation(self.dimension).astype(np.int64)
        return self.rng.integers(0, self.dimension, size=self.dimension, dtype=np.int64)


@dataclass
class SliceConfig:
    w: float = 10.0
    max_doublings: int = 20

    def __post_init__(self):
        if not self.w > 0:
            raise ValueError(f"slice width must be positive, got {self.w}")
        if self.max_doublings < 1:
            raise ValueError(f"max_doublings must be >= 1, got {self.max_doublings}")


@dataclass
class ChainState:
    theta: np.ndarray
    cache: object | None
    rng: np.random.Generator
    sweep_index: int = 0


@dataclass
class OpCounter:
    """Instrumented work counters (multiply-adds on linear predictors etc.)."""

    multiply_adds: int = 0
    evaluations: int = 0
    commits: int = 0
    doubling_cap_hits: int = 0

    def add(self, ops: np.ndarray) -> None:
        self.multiply_adds += int(ops[_kernels.OP_MULADD])
        self.evaluations += int(ops[_kernels.OP_EVALS])
        self.commits += int(ops[_kernels.OP_COMMIT])
        self.doubling_cap_hits += int(ops[_kernels.OP_CAP_HITS])


# --------------------------------------------------------------------------
# reference kernels for arbitrary Python targets


def slice_update_coordinate(x0: float, target: Callable[[float], float], cfg: SliceConfig,
                            rng: np.random.Generator, counter: OpCounter | None = None) -> float:
    """Slice-sampling update of a scalar with doubling and shrinkage.

    ``target`` is the log density (up to a constant).  The doubling
    acceptance test is applied to every candidate, which is what makes the
    doubling procedure leave the target invariant.
    """
    f0 = target(x0)
    if not math.isfinite(f0):
        raise ValueError(f"slice sampler: target is not finite at the current point {x0}")
    z = f0 + math.log1p(-rng.random())
    w = cfg.w
    left = x0 - w * rng.random()
    right = left + w
    f_left, f_right = target(left), target(right)
    k = cfg.max_doublings
    while k > 0 and (z < f_left or z < f_right):
        if rng.random() < 0.5:
            left -= right - left
            f_left = target(left)
        else:
            right += right - left
            f_right = target(right)
        k -= 1
    if k == 0 and (z < f_left or z < f_right):
        logger.debug("doubling cap reached at x0=%g; using interval [%g, %g]", x0, left, right)
        if counter is not None:
            counter.doubling_cap_hits += 1

    def acceptable(x1):
        lo, hi = left, right
        differ = False
        while hi - lo > 1.1 * w:
            mid = 0.5 * (lo + hi)
            if (x0 < mid) != (x1 < mid):
                differ = True
            if x1 < mid:
                hi = mid
            else:
                lo = mid
            if differ and z >= target(lo) and z >= target(hi):
                return False
        return True

    lo, hi = left, right
    while True:
        x1 = lo + rng.random() * (hi - lo)
        if z < target(x1) and acceptable(x1):
            return x1
        if x1 < x0:
            lo = x1
        else:
            hi = x1
        if hi - lo <= 1e-12 * (1.0 + abs(x0)):
            return x0


def mh_update_coordinate(x0: float, target: Callable[[float], float], step_sd: float,
                         rng: np.random.Generator) -> float:
    """Random-walk Metropolis step with a N(0, step_sd^2) proposal."""
    if not step_sd > 0:
        raise ValueError("step_sd must be positive")
    f0 = target(x0)
    x1 = x0 + step_sd * rng.standard_normal()
    f1 = target(x1)
    u = rng.random()
    if f1 - f0 >= 0.0 or u < math.exp(f1 - f0):
        return x1
    return x0


# --------------------------------------------------------------------------
# GLM chains


@dataclass
class Trace:
    samples: np.ndarray
    sweep_times: np.ndarray
    op_counts: dict
    seed: object
    config: dict
    valid: bool = True
    error: str | None = None
    column_names: list = field(default_factory=list)

    @property
    def kept(self) -> int:
        return self.samples.shape[0]

    def save(self, csv_path, json_path=None) -> None:
        """Samples as CSV (one row per kept sweep) plus a JSON sidecar."""
        csv_path = Path(csv_path)
        json_path = Path(json_path) if json_path else csv_path.with_suffix(".json")
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.column_names)
            for row in self.samples:
                writer.writerow([repr(float(v)) for v in row])
        meta = {
            "seed": _jsonable_seed(self.seed),
            "config": self.config,
            "valid": self.valid,
            "error": self.error,
            "kept": self.kept,
            "sweep_times": self.sweep_times.tolist(),
            "op_counts": {k: np.asarray(v).tolist() for k, v in self.op_counts.items()},
        }
        json_path.write_text(json.dumps(meta, indent=1))

    @classmethod
    def load(cls, csv_path, json_path=None) -> "Trace":
        csv_path = Path(csv_path)
        json_path = Path(json_path) if json_path else csv_path.with_suffix(".json")
        with open(csv_path, newline="") as fh:
            rows = list(csv.reader(fh))
        names, body = rows[0], rows[1:]
        samples = np.array([[float(v) for v in r] for r in body]).reshape(len(body), len(names))
        meta = json.loads(json_path.read_text())
        return cls(samples=samples, sweep_times=np.array(meta["sweep_times"]),
                   op_counts={k: np.array(v) for k, v in meta["op_counts"].items()},
                   seed=meta["seed"], config=meta["config"], valid=meta["valid"],
                   error=meta["error"], column_names=names)


def _jsonable_seed(seed):
    if isinstance(seed, np.random.SeedSequence):
        return {"entropy": seed.entropy, "spawn_key": list(seed.spawn_key)}
    return seed


def new_chain(model: GlmModel, dataset: Dataset, seed, theta0=None, mode: Mode | str = Mode.CACHED):
    """Initial chain state plus the schedule generator, both from ``seed``."""
    mode = Mode(mode)
    dim = model.dimension(dataset.d)
    theta = np.zeros(dim) if theta0 is None else np.array(theta0, dtype=float)
    if theta.shape != (dim,):
        raise ValueError(f"initial parameter vector must have length {dim}")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    schedule_seed, kernel_seed = ss.spawn(2)
    cache = cache_init(dataset, theta) if mode is Mode.CACHED else None
    return ChainState(theta=theta, cache=cache, rng=make_rng(kernel_seed)), make_rng(schedule_seed)


def gibbs_sweep(model: GlmModel, dataset: Dataset, state: ChainState, schedule: SweepSchedule,
                kernel: Kernel | str = Kernel.SLICE, mode: Mode | str = Mode.CACHED,
                slice_cfg: SliceConfig | None = None, step_sd: float = 1.0,
                counter: OpCounter | None = None) -> None:
    """Update each scheduled coordinate once, in place."""
    kernel, mode = Kernel(kernel), Mode(mode)
    cfg = slice_cfg or SliceConfig()
    indptr, indices, data = dataset.columns()
    if mode is Mode.CACHED:
        if state.cache is None:
            state.cache = cache_init(dataset, state.theta)
        cache = state.cache.values
    else:
        cache = np.zeros(dataset.n)
    ops = _kernels.empty_ops()
    order = schedule.next_sweep()
    _kernels.glm_sweep(
        order, state.theta, cache, indptr, indices, data, dataset.y, dataset.d,
        _kernels.CACHED if mode is Mode.CACHED else _kernels.NAIVE,
        model.prior_code, float(model.prior_sd), bool(model.use_likelihood),
        _kernels.SLICE if kernel is Kernel.SLICE else _kernels.MH,
        float(cfg.w), int(cfg.max_doublings), float(step_sd),
        state.rng, np.zeros(dataset.n), ops)
    if ops[_kernels.OP_CAP_HITS]:
        logger.info("sweep %d: doubling cap reached %d times", state.sweep_index, ops[_kernels.OP_CAP_HITS])
    state.sweep_index += 1
    if state.cache is not None:
        state.cache.refresh_counter += 1
    if counter is not None:
        counter.add(ops)


def run_chain(model: GlmModel, dataset: Dataset, T: int, warmup: int,
              schedule_kind: ScheduleKind | str = ScheduleKind.DUGS,
              kernel: Kernel | str = Kernel.SLICE, mode: Mode | str = Mode.CACHED,
              seed=0, slice_cfg: SliceConfig | None = None, step_sd: float = 1.0,
              refresh_every: int = 100, theta0=None, keep_latents: bool = False) -> Trace:
    """Run ``T`` sweeps and keep the last ``T - warmup`` states.

    Only the regression block is recorded unless ``keep_latents``.  A kernel
    error stops the chain and returns the rows kept so far with
    ``valid=False``.
    """
    if not 0 <= warmup <= T:
        raise ValueError(f"need 0 <= warmup <= T, got warmup={warmup}, T={T}")
    kernel, mode, schedule_kind = Kernel(kernel), Mode(mode), ScheduleKind(schedule_kind)
    cfg = slice_cfg or SliceConfig()
    state, schedule_rng = new_chain(model, dataset, seed, theta0, mode)
    dim = state.theta.shape[0]
    schedule = SweepSchedule(schedule_kind, dim, schedule_rng)
    width = dim if keep_latents else dataset.d
    samples = np.empty((T - warmup, width))
    times = np.zeros(T)
    ops = {k: np.zeros(T, dtype=np.int64) for k in ("multiply_adds", "evaluations", "commits")}
    config = {"T": T, "warmup": warmup, "schedule": schedule_kind.value, "kernel": kernel.value,
              "mode": mode.value, "slice_w": cfg.w, "slice_max_doublings": cfg.max_doublings,
              "step_sd": step_sd, "refresh_every": refresh_every, "n": dataset.n, "d": dataset.d,
              "prior": type(model.prior).__name__, "use_likelihood": model.use_likelihood}
    names = (dataset.feature_names or [f"theta_{j}" for j in range(dataset.d)])
    if keep_latents:
        names = list(names) + [f"latent_{k}" for k in range(dim - dataset.d)]
    error = None
    for t in range(T):
        counter = OpCounter()
        start = time.perf_counter()
        try:
            gibbs_sweep(model, dataset, state, schedule, kernel, mode, cfg, step_sd, counter)
            if mode is Mode.CACHED and refresh_every and state.cache.refresh_counter >= refresh_every:
                cache_refresh(state.cache, dataset, state.theta)
        except Exception as exc:  # noqa: BLE001 - report any kernel failure in the trace
            logger.error("chain aborted at sweep %d: %s", t, exc)
            error = f"sweep {t}: {exc}"
            samples = samples[:max(0, t - warmup)]
            break
        times[t] = time.perf_counter() - start
        ops["multiply_adds"][t] = counter.multiply_adds + counter.commits
        ops["evaluations"][t] = counter.evaluations
        ops["commits"][t] = counter.commits
        if t >= warmup:
            samples[t - warmup] = state.theta[:width]
    return Trace(samples=samples, sweep_times=times, op_counts=ops, seed=_jsonable_seed(seed),
                 config=config, valid=error is None, error=error, column_names=list(names))


# --------------------------------------------------------------------------
# exact Gibbs on Gaussian targets


def exact_gaussian_gibbs_update(target, theta, j: int, rng: np.random.Generator) -> float:
    """Draw theta_j from its exact conditional under ``N(mu, Q^{-1})``."""
    Q, mu = target.Q, target.mu
    if not Q[j, j] > 0:
        raise ValueError("precision matrix has a non-positive diagonal entry")
    theta = np.asarray(theta, dtype=float)
    dev = theta - mu
    s = Q[j] @ dev - Q[j, j] * dev[j]
    mean = mu[j] - s / Q[j, j]
    return mean + rng.standard_normal() / math.sqrt(Q[j, j])


def run_exact_gaussian_gibbs(target, n_sweeps: int, seed=0, theta0=None) -> np.ndarray:
    """Deterministic-scan exact Gibbs chain; returns an ``n_sweeps x d`` array."""
    mu = np.ascontiguousarray(target.mu, dtype=float)
    Q = np.ascontiguousarray(target.Q, dtype=float)
    theta = mu.copy() if theta0 is None else np.array(theta0, dtype=float)
    out = np.empty((n_sweeps, mu.shape[0]))
    _kernels.gaussian_gibbs_run(mu, Q, theta, n_sweeps, make_rng(seed), out)
    return out


__all__ = [
    "ChainState", "Kernel", "Mode", "OpCounter", "ScheduleKind", "SliceConfig",
    "SweepSchedule", "Trace", "exact_gaussian_gibbs_update", "gibbs_sweep",
    "make_rng", "mh_update_coordinate", "new_chain", "run_chain",
    "run_exact_gaussian_gibbs", "slice_update_coordinate", "spawn_seeds",
]
