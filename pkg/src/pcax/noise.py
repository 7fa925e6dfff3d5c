"""Attenuation of Pearson correlation by additive measurement noise.

Two perfectly correlated properties ``P1 = P2`` are observed as ``X1 = P1`` and
``X2 = P2 + eps``. The expected correlation of the observations depends only
on the ratio ``sigma_P / sigma_eps``; ``simulate`` checks that by Monte Carlo
and records how much variance the first principal axis explains once both
observed variables are standardized.

Random numbers come from numpy's PCG64 bit generator. Each grid point gets its
own stream, spawned from ``SeedSequence(seed)``, so a point's draws do not
depend on the rest of the grid.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import pca
from .errors import DataError
from .stats import DataMatrix, pearson

CSV_COLUMNS = ("ratio", "analytic_rho", "mean_rho", "std_rho", "mean_g1", "std_g1")


def default_grid() -> list[float]:
    return np.logspace(-1, 1, 30).tolist()


def analytic_rho(ratio: float) -> float:
    """Expected correlation ``1 / sqrt(1 + 1 / ratio**2)`` for ``ratio = sigma_P / sigma_eps``."""
    if not ratio > 0:
        raise DataError(f"ratio must be positive, got {ratio}")
    return float(ratio / np.hypot(ratio, 1.0))


@dataclass(frozen=True)
class NoiseSimConfig:
    ratio_grid: tuple[float, ...] = field(default_factory=lambda: tuple(default_grid()))
    objects_per_trial: int = 200
    realizations: int = 1000
    sigma_eps: float = 0.5
    seed: int = 0

    def __post_init__(self):
        grid = tuple(float(r) for r in self.ratio_grid)
        object.__setattr__(self, "ratio_grid", grid)
        if not grid:
            raise DataError("ratio grid is empty")
        if any(not (r > 0 and np.isfinite(r)) for r in grid):
            raise DataError("ratio grid values must be positive and finite")
        if self.objects_per_trial < 2:
            raise DataError("need at least 2 objects per trial")
        if self.realizations < 1:
            raise DataError("need at least 1 realization")
        if not self.sigma_eps > 0:
            raise DataError("sigma_eps must be positive")


@dataclass(frozen=True)
class NoisePoint:
    ratio: float
    analytic_rho: float
    mean_rho: float
    std_rho: float
    mean_g1: float
    std_g1: float
    trial_rho: np.ndarray | None = None
    trial_g1: np.ndarray | None = None


@dataclass(frozen=True)
class NoiseSimResult:
    config: NoiseSimConfig
    points: tuple[NoisePoint, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for p in self.points:
            writer.writerow([repr(float(getattr(p, c))) for c in
                             ("ratio", "analytic_rho", "mean_rho", "std_rho", "mean_g1", "std_g1")])
        return buf.getvalue()


def first_axis_explanation(x1: np.ndarray, x2: np.ndarray) -> float:
    """G(1) in percent from PCA on the two standardized variables."""
    model = pca.fit(DataMatrix(np.vstack([x1, x2]), ("x1", "x2")), mode="correlation",
                    zero_std_policy="error")
    return float(pca.variance_report(model).ratios[0])


def simulate(config: NoiseSimConfig, keep_trials: bool = False) -> NoiseSimResult:
    """Run the Monte-Carlo experiment over ``config.ratio_grid``.

    Means and standard deviations across realizations use ``ddof=1``. With
    ``keep_trials`` the per-realization correlations and G(1) values are kept
    on each point.
    """
    streams = np.random.SeedSequence(config.seed).spawn(len(config.ratio_grid))
    q, reps = config.objects_per_trial, config.realizations
    points = []
    for ratio, stream in zip(config.ratio_grid, streams):
        rng = np.random.Generator(np.random.PCG64(stream))
        sigma_p = ratio * config.sigma_eps
        prop = rng.normal(0.0, sigma_p, size=(reps, q))
        eps = rng.normal(0.0, config.sigma_eps, size=(reps, q))
        x1, x2 = prop, prop + eps
        rho = np.array([pearson(a, b) for a, b in zip(x1, x2)])
        g1 = np.array([first_axis_explanation(a, b) for a, b in zip(x1, x2)])
        ddof = 1 if reps > 1 else 0
        points.append(NoisePoint(
            ratio=ratio,
            analytic_rho=analytic_rho(ratio),
            mean_rho=float(rho.mean()),
            std_rho=float(rho.std(ddof=ddof)),
            mean_g1=float(g1.mean()),
            std_g1=float(g1.std(ddof=ddof)),
            trial_rho=rho if keep_trials else None,
            trial_g1=g1 if keep_trials else None,
        ))
    return NoiseSimResult(config, tuple(points))
