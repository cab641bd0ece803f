"""Experiment drivers behind the command-line tool.

Each driver takes a config dataclass, writes CSV/JSON files into
``config.out_dir`` and returns a summary dict.  Grid cells run on a thread
pool (the compiled sweeps release the GIL); every cell derives its own
random streams from ``(seed, cell key)`` so results do not depend on
scheduling.  ``CGGIBBS_THREADS`` caps the pool size.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
import math
import os
import time
import types
import typing
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import data_io, diagnostics, gaussian_theory
from .glm_core import Dataset, GlmModel, Horseshoe, IsotropicGaussian, Likelihood
from .samplers import Kernel, Mode, ScheduleKind, SliceConfig, Trace, run_chain

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Invalid experiment configuration (exit code 1)."""


class CheckFailed(RuntimeError):
    """A verified inequality did not hold (exit code 2)."""

    def __init__(self, message, summary=None):
        super().__init__(message)
        self.summary = summary


# --------------------------------------------------------------------------
# config plumbing


def _coerce(text: str, typ):
    origin = typing.get_origin(typ)
    if origin is tuple:
        (inner, *_rest) = typing.get_args(typ)
        parts = [p.strip() for p in text.replace(";", ",").split(",") if p.strip()]
        return tuple(_coerce(p, inner) for p in parts)
    if origin in (typing.Union, types.UnionType):
        args = [a for a in typing.get_args(typ) if a is not type(None)]
        if text.strip().lower() in ("", "none"):
            return None
        return _coerce(text, args[0])
    if typ is bool:
        low = text.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"not a boolean: {text!r}")
    if typ is int:
        return int(text.strip())
    if typ is float:
        return float(text.strip())
    return text.strip()


def parse_grid(text: str) -> tuple:
    """``"16,32,64"`` or a power-of-two range ``"2^4..2^9"``."""
    text = text.strip()
    if ".." in text:
        lo, hi = (p.strip() for p in text.split(".."))
        if lo.startswith("2^") and hi.startswith("2^"):
            return tuple(2 ** k for k in range(int(lo[2:]), int(hi[2:]) + 1))
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(p) for p in text.replace(";", ",").split(",") if p.strip())


def build_config(cls, values: dict):
    """Instantiate a config dataclass from string values (unknown keys rejected)."""
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, raw in values.items():
        k = key.strip().replace("-", "_")
        if k not in names:
            raise ConfigError(f"unknown option {key!r} for {cls.__name__}")
        try:
            if k == "d_grid" and isinstance(raw, str):
                kwargs[k] = parse_grid(raw)
            else:
                kwargs[k] = _coerce(raw, hints[k]) if isinstance(raw, str) else raw
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"option {key!r}: {exc}") from None
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


#: wall-clock columns; everything else in a result CSV is reproducible from the config
TIMING_COLUMNS = ("seconds_per_ess", "seconds_per_1000_sweeps")


def config_hash(config) -> str:
    """Hash of the settings that determine the results (output location excluded)."""
    values = {k: v for k, v in dataclasses.asdict(config).items() if k != "out_dir"}
    blob = json.dumps(values, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _threads() -> int:
    raw = os.environ.get("CGGIBBS_THREADS")
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ConfigError(f"CGGIBBS_THREADS must be an integer, got {raw!r}") from None
        if n < 1:
            raise ConfigError("CGGIBBS_THREADS must be at least 1")
        return n
    return os.cpu_count() or 1


def _run_cells(fn, cells):
    n = min(_threads(), max(1, len(cells)))
    if n == 1:
        return [fn(c) for c in cells]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, cells))


def _write_csv(path: Path, rows: list[dict], chash: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if not rows:
        raise ConfigError(f"no rows to write to {path}")
    keys = list(rows[0].keys()) + ["config_hash"]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        for r in rows:
            w.writerow({**{k: _fmt(v) for k, v in r.items()}, "config_hash": chash})


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=1, default=_json_default))


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log y on log x; NaN with fewer than two points."""
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    ok = (xs > 0) & (ys > 0) & np.isfinite(ys)
    if ok.sum() < 2:
        return math.nan
    return float(np.polyfit(np.log(xs[ok]), np.log(ys[ok]), 1)[0])


def _seed(*parts) -> int:
    """Stable integer seed from a cell key."""
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def _model(prior: str, prior_sd: float, use_likelihood: bool = True) -> GlmModel:
    if prior == "gaussian":
        p = IsotropicGaussian(prior_sd)
    elif prior == "horseshoe":
        p = Horseshoe()
    else:
        raise ConfigError(f"unknown prior {prior!r}")
    return GlmModel(p, Likelihood.LOGISTIC_BERNOULLI, use_likelihood=use_likelihood)


def _check_enum(value, enum_cls, name):
    try:
        enum_cls(value)
    except ValueError:
        allowed = ", ".join(e.value for e in enum_cls)
        raise ConfigError(f"{name} must be one of: {allowed}") from None


# --------------------------------------------------------------------------
# sweep-cost scaling


@dataclasses.dataclass(frozen=True)
class SweepScalingConfig:
    d_grid: tuple[int, ...] = (16, 32, 64, 128, 256, 512)
    n: int = 100
    sweeps: int = 200
    replicates: int = 3
    modes: tuple[str, ...] = ("cached", "naive")
    kernel: str = "slice"
    prior_sd: float = 10.0
    seed: int = 0
    out_dir: str = "results/sweep_scaling"

    def __post_init__(self):
        if not self.d_grid or min(self.d_grid) < 1:
            raise ValueError("d_grid must be a nonempty list of positive integers")
        if not self.modes:
            raise ValueError("modes must be nonempty")
        for m in self.modes:
            _check_enum(m, Mode, "mode")
        _check_enum(self.kernel, Kernel, "kernel")
        if self.n < 1 or self.sweeps < 1 or self.replicates < 1:
            raise ValueError("n, sweeps and replicates must be positive")


def sweep_scaling(cfg: SweepScalingConfig) -> dict:
    model = _model("gaussian", cfg.prior_sd)
    cells = [(m, d, r) for m in cfg.modes for d in cfg.d_grid for r in range(cfg.replicates)]

    def cell(key):
        mode, d, rep = key
        ds, _ = data_io.generate_synthetic(data_io.SyntheticSpec(n=cfg.n, d=d, seed=_seed(cfg.seed, d, rep)))
        try:
            tr = run_chain(model, ds, cfg.sweeps, cfg.sweeps, kernel=cfg.kernel, mode=mode,
                           seed=_seed(cfg.seed, d, rep, 1))
        except Exception as exc:  # noqa: BLE001 - one failed cell must not stop the grid
            tr = None
            err = str(exc)
        if tr is None or not tr.valid:
            return {"mode": mode, "d": d, "replicate": rep, "seconds_per_1000_sweeps": math.nan,
                    "multiply_add_count": math.nan, "error": err if tr is None else tr.error}
        return {"mode": mode, "d": d, "replicate": rep,
                "seconds_per_1000_sweeps": 1000.0 * float(np.mean(tr.sweep_times)),
                "multiply_add_count": float(np.mean(tr.op_counts["multiply_adds"])),
                "error": ""}

    rows = _run_cells(cell, cells)
    out = Path(cfg.out_dir)
    chash = config_hash(cfg)
    _write_csv(out / "sweep_scaling.csv", rows, chash)
    summary = {"config_hash": chash, "slopes": {}, "time_slopes": {}, "flags": []}
    for m in cfg.modes:
        ds_ = sorted({r["d"] for r in rows if r["mode"] == m})
        ops = [np.nanmean([r["multiply_add_count"] for r in rows if r["mode"] == m and r["d"] == d]) for d in ds_]
        secs = [np.nanmean([r["seconds_per_1000_sweeps"] for r in rows if r["mode"] == m and r["d"] == d])
                for d in ds_]
        summary["slopes"][m] = loglog_slope(ds_, ops)
        summary["time_slopes"][m] = loglog_slope(ds_, secs)
        if len(ds_) < 2:
            summary["flags"].append(f"{m}: slope undefined with a single grid point")
    failed = [r for r in rows if r["error"]]
    if failed:
        summary["flags"].append(f"{len(failed)} cells failed")
    _write_json(out / "summary.json", summary)
    return summary


# --------------------------------------------------------------------------
# ESS vs dimension


@dataclasses.dataclass(frozen=True)
class EssScalingConfig:
    d_grid: tuple[int, ...] = (4, 8, 16, 32, 64, 128, 256, 512)
    dataset: str = "synthetic"
    data_format: str = "csv"
    y_column: str = "y"
    preprocess: str = "auto"
    n: int = 32
    scenario: str = "prefix_significant_1"
    n_significant: int = 30
    intercept: float = 0.0
    sweeps: int = 5000
    warmup: int = 500
    replicates: int = 1
    schedule: str = "DUGS"
    kernel: str = "slice"
    prior: str = "gaussian"
    prior_sd: float = 10.0
    seed: int = 0
    tail_points: int = 3
    external_traces: tuple[str, ...] = ()
    out_dir: str = "results/ess_scaling"

    def __post_init__(self):
        if not self.d_grid or min(self.d_grid) < 1:
            raise ValueError("d_grid must be a nonempty list of positive integers")
        if not 0 <= self.warmup < self.sweeps:
            raise ValueError("need 0 <= warmup < sweeps")
        if self.replicates < 1:
            raise ValueError("replicates must be positive")
        _check_enum(self.schedule, ScheduleKind, "schedule")
        _check_enum(self.kernel, Kernel, "kernel")
        _check_enum(self.scenario, data_io.Scenario, "scenario")
        _check_enum(self.preprocess, data_io.PreprocessMode, "preprocess")


def _base_dataset(cfg, d_max: int) -> Dataset:
    if cfg.dataset == "synthetic":
        spec = data_io.SyntheticSpec(n=cfg.n, d=d_max, scenario=cfg.scenario,
                                     n_significant=min(cfg.n_significant, d_max - 1),
                                     intercept=cfg.intercept, seed=cfg.seed)
        return data_io.generate_synthetic(spec)[0]
    path = Path(cfg.dataset)
    if not path.exists():
        raise ConfigError(f"dataset file {path} does not exist")
    if cfg.data_format == "libsvm":
        raw = data_io.load_libsvm(path)
    elif cfg.data_format == "csv":
        raw = data_io.load_csv(path, cfg.y_column)
    else:
        raise ConfigError(f"unknown data_format {cfg.data_format!r}")
    return data_io.preprocess(raw, data_io.PreprocessSpec(mode=cfg.preprocess))


def _ess_row(tr: Trace, seconds: float) -> dict:
    rep = diagnostics.ess_report(tr, seconds)
    return {"sweeps_per_median_ess": tr.kept / rep.median_ess if rep.median_ess > 0 else math.nan,
            "sweeps_per_min_ess": tr.kept / rep.min_ess if rep.min_ess > 0 else math.nan,
            "seconds_per_ess": rep.seconds_per_ess, "median_ess": rep.median_ess,
            "min_ess": rep.min_ess, "unreliable": rep.unreliable}


def _chain_cell(cfg, model, ds, seed):
    start = time.perf_counter()
    tr = run_chain(model, ds, cfg.sweeps, cfg.warmup, schedule_kind=cfg.schedule,
                   kernel=cfg.kernel, seed=seed)
    seconds = time.perf_counter() - start
    if not tr.valid:
        return {"sweeps_per_median_ess": math.nan, "sweeps_per_min_ess": math.nan,
                "seconds_per_ess": math.nan, "median_ess": math.nan, "min_ess": math.nan,
                "unreliable": True, "error": tr.error}
    return {**_ess_row(tr, seconds), "error": ""}


def ess_scaling(cfg: EssScalingConfig) -> dict:
    base = _base_dataset(cfg, max(cfg.d_grid))
    if max(cfg.d_grid) > base.d:
        raise ConfigError(f"d grid exceeds the {base.d} available columns")
    model = _model(cfg.prior, cfg.prior_sd)
    cells = [(d, r) for r in range(cfg.replicates) for d in cfg.d_grid]

    def cell(key):
        d, rep = key
        # one permutation per replicate, shared across the grid
        ds = data_io.subsample_features(base, d, shuffle_seed=_seed(cfg.seed, rep))
        return {"source": "cggibbs", "d": d, "replicate": rep,
                **_chain_cell(cfg, model, ds, _seed(cfg.seed, d, rep, 2))}

    rows = _run_cells(cell, cells)
    for path in cfg.external_traces:
        rows.append({"source": str(path), "d": math.nan, "replicate": 0, **external_trace_row(path)})
    out = Path(cfg.out_dir)
    chash = config_hash(cfg)
    _write_csv(out / "ess_scaling.csv", rows, chash)
    grid = sorted(cfg.d_grid)
    med = [float(np.nanmedian([r["sweeps_per_median_ess"] for r in rows
                               if r["source"] == "cggibbs" and r["d"] == d])) for d in grid]
    k = cfg.tail_points
    summary = {
        "config_hash": chash, "d_grid": grid, "sweeps_per_median_ess": med,
        "tail_slope": loglog_slope(grid[-k:], med[-k:]) if len(grid) >= 2 else math.nan,
        "unreliable_cells": [(r["d"], r["replicate"]) for r in rows if r["unreliable"]],
    }
    _write_json(out / "summary.json", summary)
    return summary


def external_trace_row(path) -> dict:
    """ESS summary of another sampler's draws (CSV with a header row)."""
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ConfigError(f"external trace {path} has no draws")
    names = rows[0]
    try:
        X = np.array([[float(v) for v in r] for r in rows[1:]])
    except ValueError as exc:
        raise ConfigError(f"external trace {path}: {exc}") from None
    tr = Trace(samples=X, sweep_times=np.zeros(0), op_counts={}, seed=None, config={},
               column_names=names)
    return {**_ess_row(tr, math.nan), "error": ""}


# --------------------------------------------------------------------------
# irrelevant features


@dataclasses.dataclass(frozen=True)
class IrrelevantFeaturesConfig:
    d_grid: tuple[int, ...] = (31, 64, 128, 256, 512)
    scenarios: tuple[int, ...] = (1, 2, 3)
    n: int = 32
    n_significant: int = 30
    intercept: float = 0.0
    sweeps: int = 5000
    warmup: int = 500
    replicates: int = 1
    schedule: str = "DUGS"
    kernel: str = "slice"
    prior: str = "gaussian"
    prior_sd: float = 10.0
    seed: int = 0
    min_tolerance: float = 1.2
    out_dir: str = "results/irrelevant_features"

    def __post_init__(self):
        if not self.d_grid:
            raise ValueError("d_grid must be nonempty")
        if min(self.d_grid) < self.n_significant + 1:
            raise ValueError(f"every d must be at least n_significant + 1 = {self.n_significant + 1} "
                             "(intercept plus the significant block)")
        if not self.scenarios or not set(self.scenarios) <= {1, 2, 3}:
            raise ValueError("scenarios must be drawn from 1, 2, 3")
        if not 0 <= self.warmup < self.sweeps:
            raise ValueError("need 0 <= warmup < sweeps")
        _check_enum(self.schedule, ScheduleKind, "schedule")
        _check_enum(self.kernel, Kernel, "kernel")


_SCENARIOS = {1: data_io.Scenario.PREFIX_1, 2: data_io.Scenario.PREFIX_2, 3: data_io.Scenario.PREFIX_3}


def irrelevant_features(cfg: IrrelevantFeaturesConfig) -> dict:
    d_max = max(cfg.d_grid)
    model = _model(cfg.prior, cfg.prior_sd)
    bases = {}
    for s in cfg.scenarios:
        for rep in range(cfg.replicates):
            spec = data_io.SyntheticSpec(n=cfg.n, d=d_max, scenario=_SCENARIOS[s],
                                         n_significant=cfg.n_significant, intercept=cfg.intercept,
                                         seed=_seed(cfg.seed, rep))
            bases[s, rep] = data_io.generate_synthetic(spec)[0]
    cells = [(s, d, r) for s in cfg.scenarios for r in range(cfg.replicates) for d in cfg.d_grid]

    def cell(key):
        s, d, rep = key
        base = bases[s, rep]
        # columns kept in order: the irrelevant block grows behind the significant one
        ds = Dataset(base.X[:, :d], base.y, feature_names=base.feature_names[:d], has_intercept=True)
        return {"scenario": s, "d": d, "replicate": rep,
                **_chain_cell(cfg, model, ds, _seed(cfg.seed, d, rep, 3))}

    rows = _run_cells(cell, cells)
    out = Path(cfg.out_dir)
    chash = config_hash(cfg)
    _write_csv(out / "irrelevant_features.csv", rows, chash)
    summary = {"config_hash": chash, "scenarios": {}}
    grid = sorted(cfg.d_grid)
    for s in cfg.scenarios:
        def agg(col, d):
            return float(np.nanmedian([r[col] for r in rows if r["scenario"] == s and r["d"] == d]))
        med = [agg("sweeps_per_median_ess", d) for d in grid]
        mn = [agg("sweeps_per_min_ess", d) for d in grid]
        # ESS per sweep ratio between the largest and smallest d
        med_gain = med[0] / med[-1]
        min_gain = mn[0] / mn[-1]
        summary["scenarios"][s] = {
            "d_grid": grid, "sweeps_per_median_ess": med, "sweeps_per_min_ess": mn,
            "median_ess_per_sweep_gain": med_gain, "min_ess_per_sweep_gain": min_gain,
            "contrast": bool(med_gain > 1.0 and min_gain <= cfg.min_tolerance and min_gain < med_gain),
        }
    _write_json(out / "summary.json", summary)
    return summary


# --------------------------------------------------------------------------
# condition numbers vs dimension


@dataclasses.dataclass(frozen=True)
class CondScalingConfig:
    d_grid: tuple[int, ...] = (1, 2, 4, 8, 16, 32, 64, 128)
    dataset: str = "synthetic"
    data_format: str = "csv"
    y_column: str = "y"
    preprocess: str = "auto"
    n: int = 32
    scenario: str = "iid_normal"
    n_significant: int = 30
    intercept: float = 0.0
    replicates: int = 1
    prior_sd: float = 10.0
    kappa_r_budget: int = 2000
    seed: int = 0
    out_dir: str = "results/cond_scaling"

    def __post_init__(self):
        if not self.d_grid or min(self.d_grid) < 1:
            raise ValueError("d_grid must be a nonempty list of positive integers")
        _check_enum(self.scenario, data_io.Scenario, "scenario")
        _check_enum(self.preprocess, data_io.PreprocessMode, "preprocess")


def surrogate_covariance(X, prior_sd: float) -> np.ndarray:
    """Inverse curvature of the log posterior at zero with the logistic bound 1/4."""
    X = np.asarray(X, dtype=float)
    H = X.T @ X / 4.0 + np.eye(X.shape[1]) / prior_sd ** 2
    S = np.linalg.inv(H)
    return 0.5 * (S + S.T)


def cond_scaling(cfg: CondScalingConfig) -> dict:
    base = _base_dataset(cfg, max(cfg.d_grid))
    cells = [(d, r) for r in range(cfg.replicates) for d in cfg.d_grid]

    def cell(key):
        d, rep = key
        ds = data_io.subsample_features(base, d, shuffle_seed=_seed(cfg.seed, rep))
        row = {"d": d, "replicate": rep}
        try:
            S = surrogate_covariance(ds.dense(), cfg.prior_sd)
            row.update(kappa=gaussian_theory.kappa(S), kappa_cor=gaussian_theory.kappa_cor(S),
                       kappa_r_upper=gaussian_theory.kappa_r(S, budget=cfg.kappa_r_budget,
                                                             seed=_seed(cfg.seed, d, rep)),
                       flag="")
        except (np.linalg.LinAlgError, gaussian_theory.NotSPDError) as exc:
            row.update(kappa=math.nan, kappa_cor=math.nan, kappa_r_upper=math.nan, flag=f"not SPD: {exc}")
        return row

    rows = _run_cells(cell, cells)
    chash = config_hash(cfg)
    out = Path(cfg.out_dir)
    _write_csv(out / "cond_scaling.csv", rows, chash)
    ordering = all(r["kappa_r_upper"] <= min(r["kappa"], r["kappa_cor"]) * (1 + 1e-12) + 1e-9
                   for r in rows if not r["flag"])
    summary = {"config_hash": chash, "ordering_holds": ordering,
               "flagged": [(r["d"], r["replicate"]) for r in rows if r["flag"]]}
    _write_json(out / "summary.json", summary)
    return summary


# --------------------------------------------------------------------------
# Gaussian theory suite


@dataclasses.dataclass(frozen=True)
class TheoryCheckConfig:
    n_instances: int = 200
    d_min: int = 2
    d_max: int = 10
    seed: int = 0
    out_dir: str = "results/theory_check"

    def __post_init__(self):
        if self.n_instances < 1:
            raise ValueError("the suite is empty: n_instances must be at least 1")
        if not 1 <= self.d_min <= self.d_max:
            raise ValueError("need 1 <= d_min <= d_max")


def theory_check(cfg: TheoryCheckConfig) -> dict:
    records = gaussian_theory.theory_check_suite(cfg.n_instances, d_max=cfg.d_max, d_min=cfg.d_min,
                                                 seed=cfg.seed)
    fixture = gaussian_theory.GaussianTarget.from_covariance(np.array([[1.0, 0.5], [0.5, 1.0]]))
    rho, bound, holds = gaussian_theory.lemma1_check(fixture)
    bad = [r for r in records if not r["holds"] or r.get("slope_ok") is False]
    report = {
        "config_hash": config_hash(cfg),
        "instances": records,
        "fixture_2x2_r0.5": {"rho": rho, "lemma_bound": bound, "holds": holds},
        "failures": [{"instance": r["instance"], "seed": r["seed"]} for r in bad],
        "all_pass": not bad and holds,
    }
    _write_json(Path(cfg.out_dir) / "theory_check.json", report)
    if not report["all_pass"]:
        raise CheckFailed(f"{len(bad)} instances failed; seeds: {[r['seed'] for r in bad]}", report)
    return report


# --------------------------------------------------------------------------
# single chain


@dataclasses.dataclass(frozen=True)
class RunConfig:
    dataset: str = "synthetic"
    data_format: str = "csv"
    y_column: str = "y"
    preprocess: str = "auto"
    n: int = 100
    d: int = 10
    scenario: str = "iid_normal"
    n_significant: int = 30
    intercept: float = 0.0
    prior: str = "gaussian"
    prior_sd: float = 10.0
    use_likelihood: bool = True
    sweeps: int = 2000
    warmup: int = 200
    schedule: str = "DUGS"
    kernel: str = "slice"
    mode: str = "cached"
    slice_w: float = 10.0
    slice_max_doublings: int = 20
    step_sd: float = 1.0
    refresh_every: int = 100
    keep_latents: bool = False
    seed: int = 0
    out_dir: str = "results/run"

    def __post_init__(self):
        if not 0 <= self.warmup < self.sweeps:
            raise ValueError("need 0 <= warmup < sweeps")
        _check_enum(self.schedule, ScheduleKind, "schedule")
        _check_enum(self.kernel, Kernel, "kernel")
        _check_enum(self.mode, Mode, "mode")
        _check_enum(self.scenario, data_io.Scenario, "scenario")
        _check_enum(self.preprocess, data_io.PreprocessMode, "preprocess")
        if self.prior not in ("gaussian", "horseshoe"):
            raise ValueError("prior must be gaussian or horseshoe")


def run(cfg: RunConfig) -> dict:
    base = _base_dataset(cfg, cfg.d) if cfg.dataset != "synthetic" else data_io.generate_synthetic(
        data_io.SyntheticSpec(n=cfg.n, d=cfg.d, scenario=cfg.scenario,
                              n_significant=min(cfg.n_significant, cfg.d - 1),
                              intercept=cfg.intercept, seed=cfg.seed))[0]
    model = _model(cfg.prior, cfg.prior_sd, cfg.use_likelihood)
    start = time.perf_counter()
    tr = run_chain(model, base, cfg.sweeps, cfg.warmup, schedule_kind=cfg.schedule, kernel=cfg.kernel,
                   mode=cfg.mode, seed=cfg.seed,
                   slice_cfg=SliceConfig(cfg.slice_w, cfg.slice_max_doublings), step_sd=cfg.step_sd,
                   refresh_every=cfg.refresh_every, keep_latents=cfg.keep_latents)
    seconds = time.perf_counter() - start
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tr.config["config_hash"] = config_hash(cfg)
    tr.save(out / "trace.csv", out / "trace.json")
    if not tr.valid:
        raise RuntimeError(f"chain failed: {tr.error}")
    report = diagnostics.ess_report(tr, seconds)
    report.to_json(out / "ess.json")
    report.to_csv(out / "ess.csv")
    return {"config_hash": config_hash(cfg), "kept": tr.kept, "min_ess": report.min_ess,
            "median_ess": report.median_ess, "unreliable": report.unreliable}


COMMANDS = {
    "sweep-scaling": (SweepScalingConfig, sweep_scaling),
    "ess-scaling": (EssScalingConfig, ess_scaling),
    "irrelevant-features": (IrrelevantFeaturesConfig, irrelevant_features),
    "cond-scaling": (CondScalingConfig, cond_scaling),
    "theory-check": (TheoryCheckConfig, theory_check),
    "run": (RunConfig, run),
}
