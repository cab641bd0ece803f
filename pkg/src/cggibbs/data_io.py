"""Dataset loading, preprocessing and synthetic logistic-regression data."""

from __future__ import annotations

import csv
import enum
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .glm_core import Dataset

#: published shapes of the gene-expression and text benchmarks (n, d, zero fraction)
PAPER_DATASETS = {
    "ALLAML": (72, 7129, 3.3e-5),
    "BASEHOCK": (1993, 4862, 0.9861),
    "GLI_85": (85, 22283, 0.0),
    "PCMAC": (1943, 3289, 0.9854),
    "Prostate_GE": (102, 5966, 0.0),
    "RELATHE": (1427, 4322, 0.9805),
    "SMK_CAN_187": (187, 19993, 0.0),
    "arcene": (200, 10000, 0.4562),
    "colon": (62, 2000, 0.4158),
    "gisette": (7000, 5000, 0.87),
    "leukemia": (72, 7070, 0.4368),
    "madelon": (2600, 500, 7.6e-7),
}


class DataFormatError(ValueError):
    pass


def coerce_labels(raw, where="") -> np.ndarray:
    """Map responses to {0, 1}; {-1, +1} labels are accepted as well."""
    y = np.asarray(raw, dtype=float)
    vals = set(np.unique(y).tolist())
    if vals <= {0.0, 1.0}:
        return y
    if vals <= {-1.0, 1.0}:
        return (y > 0).astype(float)
    bad = sorted(vals - {0.0, 1.0, -1.0})
    raise DataFormatError(f"non-binary label {bad[0]!r}{where}")


def check_paper_shape(name: str, dataset: Dataset) -> None:
    """Raise if a loaded benchmark does not have its published n and d."""
    if name not in PAPER_DATASETS:
        raise KeyError(f"unknown benchmark {name!r}")
    n, d, _ = PAPER_DATASETS[name]
    if (dataset.n, dataset.d) != (n, d):
        raise DataFormatError(f"{name}: expected n={n}, d={d}, got n={dataset.n}, d={dataset.d}")


# --------------------------------------------------------------------------
# CSV


def load_csv(path, y_column: str = "y") -> Dataset:
    """Read a headed CSV; every column other than ``y_column`` is a feature."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if y_column not in header:
            raise DataFormatError(f"{path}: no label column {y_column!r} in header")
        yi = header.index(y_column)
        rows, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataFormatError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                vals = [float(c) for c in row]
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from None
            labels.append(vals.pop(yi))
            rows.append(vals)
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    names = [h for k, h in enumerate(header) if k != yi]
    y = coerce_labels(labels, f" in {path}")
    return Dataset(np.array(rows), y, feature_names=names,
                   has_intercept=bool(names and names[0] == "intercept"))


def save_csv(dataset: Dataset, path, y_column: str = "y") -> None:
    names = dataset.feature_names or [f"x{j}" for j in range(dataset.d)]
    X = dataset.dense()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(names) + [y_column])
        for i in range(dataset.n):
            w.writerow([f"{v:.17g}" for v in X[i]] + [f"{int(dataset.y[i])}"])


# --------------------------------------------------------------------------
# libsvm


def load_libsvm(path, d: int | None = None) -> Dataset:
    """Read ``label idx:val ...`` lines; indices are 1-based on disk.

    ``d`` fixes the column count; by default it is the largest index seen.
    """
    rows, cols, vals, labels = [], [], [], []
    max_idx = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                label = float(parts[0])
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: bad label {parts[0]!r}") from None
            i = len(labels)
            labels.append(label)
            prev = 0
            for tok in parts[1:]:
                idx_s, sep, val_s = tok.partition(":")
                try:
                    idx, val = int(idx_s), float(val_s)
                except ValueError:
                    raise DataFormatError(f"{path}:{lineno}: bad feature {tok!r}") from None
                if not sep or idx < 1:
                    raise DataFormatError(f"{path}:{lineno}: bad feature {tok!r}")
                if idx <= prev:
                    raise DataFormatError(f"{path}:{lineno}: indices must increase")
                prev = idx
                rows.append(i)
                cols.append(idx - 1)
                vals.append(val)
                max_idx = max(max_idx, idx)
    if not labels:
        raise DataFormatError(f"{path}: no data rows")
    d = max_idx if d is None else d
    if max_idx > d:
        raise DataFormatError(f"{path}: feature index {max_idx} exceeds d={d}")
    X = sp.csr_matrix((vals, (rows, cols)), shape=(len(labels), d))
    return Dataset(X, coerce_labels(labels, f" in {path}"))


# --------------------------------------------------------------------------
# preprocessing


class PreprocessMode(str, enum.Enum):
    STANDARDIZE = "standardize"
    SPARSE_MAX_ABS = "sparse_max_abs"
    AUTO = "auto"


@dataclass(frozen=True)
class PreprocessSpec:
    mode: PreprocessMode = PreprocessMode.AUTO
    sparsity_threshold: float = 0.85
    add_intercept: bool = True

    def __post_init__(self):
        object.__setattr__(self, "mode", PreprocessMode(self.mode))
        if not 0.0 <= self.sparsity_threshold <= 1.0:
            raise ValueError("sparsity_threshold must lie in [0, 1]")


def choose_mode(dataset: Dataset, spec: PreprocessSpec) -> PreprocessMode:
    if spec.mode is not PreprocessMode.AUTO:
        return spec.mode
    return (PreprocessMode.SPARSE_MAX_ABS if dataset.zero_fraction() > spec.sparsity_threshold
            else PreprocessMode.STANDARDIZE)


def preprocess(dataset: Dataset, spec: PreprocessSpec = PreprocessSpec()) -> Dataset:
    """Scale feature columns and optionally prepend an all-ones intercept.

    An existing intercept column (``dataset.has_intercept``) is left alone.
    """
    mode = choose_mode(dataset, spec)
    start = 1 if dataset.has_intercept else 0
    names = list(dataset.feature_names) if dataset.feature_names else [f"x{j}" for j in range(dataset.d)]
    if mode is PreprocessMode.STANDARDIZE:
        X = dataset.dense().copy()
        F = X[:, start:]
        mean = F.mean(axis=0)
        sd = F.std(axis=0)
        const = np.flatnonzero(sd == 0)
        if const.size:
            raise ValueError(f"zero-variance column {names[start + const[0]]!r} cannot be standardized")
        X[:, start:] = (F - mean) / sd
    else:
        X = sp.csc_matrix(dataset.X, dtype=float, copy=True)
        X.eliminate_zeros()
        for j in range(start, X.shape[1]):
            lo, hi = X.indptr[j], X.indptr[j + 1]
            if hi == lo:
                warnings.warn(f"column {names[j]!r} is all zero and is left unchanged", RuntimeWarning,
                              stacklevel=2)
                continue
            X.data[lo:hi] /= np.abs(X.data[lo:hi]).max()
    has_icpt = dataset.has_intercept
    if spec.add_intercept and not has_icpt:
        ones = np.ones((dataset.n, 1))
        X = sp.hstack([ones, X], format="csc") if sp.issparse(X) else np.hstack([ones, X])
        names = ["intercept"] + names
        has_icpt = True
    return Dataset(X, dataset.y, feature_names=names, has_intercept=has_icpt)


def subsample_features(dataset: Dataset, d_sub: int, shuffle_seed) -> Dataset:
    """Prefix of a seeded random column order; the intercept stays first.

    The permutation depends only on the seed and ``d``, so prefixes for
    increasing ``d_sub`` are nested.  ``d_sub`` counts the intercept.
    """
    if not 1 <= d_sub <= dataset.d:
        raise ValueError(f"d_sub must lie in [1, {dataset.d}], got {d_sub}")
    start = 1 if dataset.has_intercept else 0
    perm = np.random.default_rng(shuffle_seed).permutation(dataset.d - start) + start
    cols = np.concatenate([np.arange(start), perm])[:d_sub]
    X = dataset.X[:, cols]
    names = [dataset.feature_names[c] for c in cols] if dataset.feature_names else None
    return Dataset(X, dataset.y, feature_names=names,
                   has_intercept=dataset.has_intercept)


# --------------------------------------------------------------------------
# synthetic data


class Scenario(str, enum.Enum):
    IID_NORMAL = "iid_normal"
    PREFIX_1 = "prefix_significant_1"
    PREFIX_2 = "prefix_significant_2"
    PREFIX_3 = "prefix_significant_3"


@dataclass(frozen=True)
class SyntheticSpec:
    """Synthetic logistic data.

    ``IID_NORMAL`` has ``d`` standard-normal columns and no intercept, with
    true coefficients drawn ``N(0, 1/d)``.  The prefix scenarios have an
    intercept column followed by ``n_significant`` informative columns; the
    remaining columns are fresh normals (1), copies of the first feature
    (2) or zeros (3).  ``d`` always counts every column.
    """

    n: int
    d: int
    scenario: Scenario = Scenario.IID_NORMAL
    n_significant: int = 30
    intercept: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be positive")
        if self.scenario is not Scenario.IID_NORMAL and not 0 <= self.n_significant <= self.d - 1:
            raise ValueError(f"n_significant={self.n_significant} does not fit in d={self.d} "
                             "columns next to the intercept")


def fill_irrelevant_columns(X, first: int, scenario: Scenario) -> None:
    """Overwrite columns ``first:`` for the prefix scenarios, in place.

    Scenario (2) copies the first feature column (index 1, after the
    intercept); scenario (3) zeroes the columns.  Indices refer to feature
    columns, not observations.
    """
    if scenario is Scenario.PREFIX_2:
        X[:, first:] = X[:, [1]]
    elif scenario is Scenario.PREFIX_3:
        X[:, first:] = 0.0


def generate_synthetic(spec: SyntheticSpec):
    """Return ``(dataset, true_theta)``; a pure function of ``spec``."""
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    n, d = spec.n, spec.d
    if spec.scenario is Scenario.IID_NORMAL:
        X = rng.standard_normal((n, d))
        theta = rng.normal(scale=1.0 / np.sqrt(d), size=d)
        eta = X @ theta
        names = [f"x{j}" for j in range(d)]
        has_icpt = False
    else:
        X = np.empty((n, d))
        X[:, 0] = 1.0
        X[:, 1:] = rng.standard_normal((n, d - 1))
        k = spec.n_significant
        fill_irrelevant_columns(X, k + 1, spec.scenario)
        theta = np.zeros(d)
        theta[0] = spec.intercept
        theta[1:k + 1] = rng.standard_normal(k)
        eta = X @ theta
        names = ["intercept"] + [f"x{j}" for j in range(1, d)]
        has_icpt = True
    p = 0.5 * (1.0 + np.tanh(0.5 * eta))
    y = (rng.random(n) < p).astype(float)
    return Dataset(X, y, feature_names=names, has_intercept=has_icpt), theta
