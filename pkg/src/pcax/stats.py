"""Centering, standardization and pairwise joint-variation measures.

Data follow the features-as-rows layout: a ``DataMatrix`` holds N named
features (rows) measured on Q objects (columns). Every variance and standard
deviation here uses the ``Q - 1`` denominator, so the covariance matrix of
standardized data is exactly the Pearson correlation matrix.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError

# |row mean| allowed by covariance_matrix, relative to the row's spread
CENTERED_TOL = 1e-9


def _is_zero_std(std: np.ndarray, mean: np.ndarray) -> np.ndarray:
    # a constant row can leave roundoff-sized spread after centering
    return std <= 1e-12 * np.maximum(np.abs(mean), np.finfo(float).tiny)


@dataclass(frozen=True)
class DataMatrix:
    """N features x Q objects, with unique feature names."""

    values: np.ndarray
    feature_names: tuple[str, ...]

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim == 1:
            values = values[None, :]
        if values.ndim != 2:
            raise DataError(f"data must be 2-D (features x objects), got {values.shape}")
        names = tuple(str(n) for n in self.feature_names)
        if len(names) != values.shape[0]:
            raise DataError(f"{len(names)} feature names for {values.shape[0]} rows")
        if len(set(names)) != len(names):
            raise DataError("feature names must be unique")
        if values.shape[0] < 1:
            raise DataError("data has no features")
        if values.shape[1] < 2:
            raise DataError("need at least 2 objects")
        if not np.all(np.isfinite(values)):
            raise DataError("data contains NaN or infinite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "feature_names", names)

    @classmethod
    def from_rows(cls, rows, feature_names: Sequence[str] | None = None) -> "DataMatrix":
        values = np.array(rows, dtype=float)
        if values.ndim == 1:
            values = values[None, :]
        if feature_names is None:
            feature_names = [f"x{i + 1}" for i in range(values.shape[0])]
        return cls(values, tuple(feature_names))

    @classmethod
    def from_objects(cls, objects, feature_names: Sequence[str] | None = None) -> "DataMatrix":
        """Build from the usual objects-as-rows table (transposes it)."""
        return cls.from_rows(np.array(objects, dtype=float).T, feature_names)

    @property
    def n_features(self) -> int:
        return self.values.shape[0]

    @property
    def n_objects(self) -> int:
        return self.values.shape[1]

    def select(self, names: Sequence[str]) -> "DataMatrix":
        index = {n: i for i, n in enumerate(self.feature_names)}
        missing = [n for n in names if n not in index]
        if missing:
            raise DataError(f"features not present: {missing}")
        return DataMatrix(self.values[[index[n] for n in names]], tuple(names))


@dataclass(frozen=True)
class SummaryStats:
    means: np.ndarray
    stds: np.ndarray


def summarize(x: DataMatrix) -> SummaryStats:
    means = x.values.mean(axis=1)
    centered = x.values - means[:, None]
    stds = np.sqrt(np.sum(centered * centered, axis=1) / (x.n_objects - 1))
    return SummaryStats(means, stds)


def center(x: DataMatrix) -> DataMatrix:
    return DataMatrix(x.values - x.values.mean(axis=1)[:, None], x.feature_names)


def standardize(
    x: DataMatrix, zero_std_policy: str = "drop"
) -> tuple[DataMatrix, SummaryStats, list[str]]:
    """Subtract each feature's mean and divide by its standard deviation.

    Features with zero spread cannot be scaled. With ``zero_std_policy="drop"``
    they are removed (and absent from the returned ``kept_features``); with
    ``"error"`` a ``DataError`` is raised.

    Returns the standardized data, the statistics of the kept features and the
    names of the kept features.
    """
    if zero_std_policy not in ("drop", "error"):
        raise ValueError(f"unknown zero_std_policy {zero_std_policy!r}")
    stats = summarize(x)
    zero = _is_zero_std(stats.stds, stats.means)
    if np.any(zero):
        dropped = [n for n, z in zip(x.feature_names, zero) if z]
        if zero_std_policy == "error":
            raise DataError(f"zero-variance features cannot be standardized: {dropped}")
        if np.all(zero):
            raise DataError("every feature has zero variance")
    keep = ~zero
    kept = [n for n, k in zip(x.feature_names, keep) if k]
    means, stds = stats.means[keep], stats.stds[keep]
    values = (x.values[keep] - means[:, None]) / stds[:, None]
    return DataMatrix(values, tuple(kept)), SummaryStats(means, stds), kept


def covariance_matrix(x_hat: DataMatrix) -> np.ndarray:
    """``K = X_hat X_hat^T / (Q - 1)`` for already-centered data."""
    v = x_hat.values
    means = v.mean(axis=1)
    spread = np.sqrt(np.sum((v - means[:, None]) ** 2, axis=1) / (x_hat.n_objects - 1))
    scale = np.maximum(spread, np.finfo(float).eps * np.max(np.abs(v), axis=1))
    if np.any(np.abs(means) > CENTERED_TOL * np.maximum(scale, np.finfo(float).tiny)):
        raise DataError("covariance_matrix expects centered data (row means must be 0)")
    k = v @ v.T / (x_hat.n_objects - 1)
    return 0.5 * (k + k.T)


def _pair(x1, x2, min_len: int) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(x1, dtype=float).ravel()
    b = np.asarray(x2, dtype=float).ravel()
    if a.shape != b.shape:
        raise DataError(f"length mismatch: {a.size} vs {b.size}")
    if a.size < min_len:
        raise DataError(f"need at least {min_len} values")
    return a, b


def pearson(x1, x2) -> float:
    a, b = _pair(x1, x2, 2)
    da, db = a - a.mean(), b - b.mean()
    sa, sb = np.sqrt(np.sum(da * da)), np.sqrt(np.sum(db * db))
    if _is_zero_std(np.array([sa, sb]), np.array([a.mean(), b.mean()])).any():
        raise DataError("Pearson correlation is undefined for a constant input")
    r = float(np.sum(da * db) / (sa * sb))
    return min(1.0, max(-1.0, r))


def correlation_raw(x1, x2) -> float:
    """Mean of the elementwise product, ``E[X1 X2]`` (denominator Q)."""
    a, b = _pair(x1, x2, 1)
    return float(np.mean(a * b))
