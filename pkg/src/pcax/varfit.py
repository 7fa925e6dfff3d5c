"""Exponential model of cumulative explained variance.

Curves of G(M)/100 against the number of components are fitted with
``f(x) = 1 - exp(-alpha x)`` by a one-parameter Levenberg-Marquardt loop.
Also here: averaging curves across datasets and correlating the fitted
``alpha`` with dataset properties.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError
from .stats import pearson

ALPHA_MIN, ALPHA_MAX = 1e-6, 1e6
_FLAT = 16 * np.finfo(float).eps


@dataclass(frozen=True)
class VarianceCurve:
    dataset_name: str
    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.array(self.xs, dtype=float)
        ys = np.array(self.ys, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape or xs.size == 0:
            raise DataError("curve needs equal-length, non-empty xs and ys")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @classmethod
    def from_ratios(cls, name: str, ratios_percent, normalize: bool = False) -> "VarianceCurve":
        """Curve from G(1..N) in percent; ``normalize`` maps x to the fraction M/N."""
        ys = np.asarray(ratios_percent, dtype=float) / 100.0
        if np.any(np.diff(ys) < -1e-12):
            raise DataError("cumulative variance ratios must be non-decreasing")
        if abs(ys[-1] - 1.0) > 1e-9:
            raise DataError("cumulative variance curve must end at 1")
        n = ys.size
        xs = np.arange(1, n + 1, dtype=float)
        return cls(name, xs / n if normalize else xs, ys)


@dataclass(frozen=True)
class AlphaFit:
    alpha: float
    rss: float
    iterations: int
    converged: bool
    dataset: str = ""


def model_curve(alpha: float, xs) -> np.ndarray:
    return 1.0 - np.exp(-alpha * np.asarray(xs, dtype=float))


def rss(alpha: float, curve: VarianceCurve) -> float:
    r = curve.ys - model_curve(alpha, curve.xs)
    return float(r @ r)


def rss_gradient(alpha: float, curve: VarianceCurve) -> float:
    """d(rss)/d(alpha), using df/dalpha = x exp(-alpha x)."""
    e = np.exp(-alpha * curve.xs)
    r = curve.ys - (1.0 - e)
    return float(-2.0 * np.sum(r * curve.xs * e))


def initial_alpha(curve: VarianceCurve) -> float:
    """Alpha that passes exactly through the first point, clamped; 1.0 if undefined."""
    x1, y1 = float(curve.xs[0]), float(curve.ys[0])
    if x1 <= 0 or not 0 < y1 < 1:
        return 1.0
    return min(max(-math.log1p(-y1) / x1, ALPHA_MIN), ALPHA_MAX)


def lm_fit_exponential(
    curve: VarianceCurve,
    alpha0: float | None = None,
    max_iter: int = 200,
    tol: float = 1e-10,
) -> AlphaFit:
    """Levenberg-Marquardt fit of ``alpha``.

    Damping starts at 1e-3 and is divided by 10 after an accepted step and
    multiplied by 10 after a rejected one; the step is scaled by the
    curvature (Marquardt's form). Steps must keep ``alpha`` positive and
    lower the residual, or leave it level to within roundoff while shrinking
    the gradient. Converged means ``|d rss / d alpha|
    <= tol``, or that the last accepted step satisfied ``|delta| <= tol * alpha``
    and no further step lowers the residual. Running out of iterations is not
    an error: the best ``alpha`` so far is returned with ``converged=False``.
    """
    alpha = initial_alpha(curve) if alpha0 is None else float(alpha0)
    if not alpha > 0:
        raise DataError("alpha0 must be positive")
    xs, ys = curve.xs, curve.ys
    damping = 1e-3
    current = rss(alpha, curve)
    small_step = False
    for it in range(1, max_iter + 1):
        e = np.exp(-alpha * xs)
        r = ys - (1.0 - e)
        jac = xs * e
        jtj = float(jac @ jac)
        jtr = float(jac @ r)
        if abs(2.0 * jtr) <= tol or jtj == 0.0:
            return AlphaFit(alpha, current, it - 1, True, curve.dataset_name)
        while True:
            delta = jtr / (jtj * (1.0 + damping))
            trial = alpha + delta
            trial_rss = rss(trial, curve) if trial > 0 else math.inf
            # near the optimum the rss gain drops below roundoff; a step that
            # keeps rss level and shrinks the gradient is still progress
            flat = trial_rss <= current + _FLAT * float(np.abs(r) @ (ys + 1.0)) and (
                abs(rss_gradient(trial, curve)) < abs(2.0 * jtr))
            if trial_rss < current or flat:
                trial_rss = min(trial_rss, current)
                alpha, current = trial, trial_rss
                damping = max(damping / 10.0, 1e-15)
                break
            damping *= 10.0
            if damping > 1e16:
                # no descent left at working precision
                return AlphaFit(alpha, current, it, small_step, curve.dataset_name)
        # a tiny step counts as convergence once the residual can no longer drop;
        # until then keep polishing so the gradient test gets its chance
        small_step = abs(delta) <= tol * alpha
    return AlphaFit(alpha, current, max_iter, small_step, curve.dataset_name)


def alpha_property_correlations(fits: Sequence[AlphaFit], manifests: Sequence) -> tuple[float, float, float]:
    """Pearson correlation of alpha with number of classes, samples and measurements.

    ``fits[i]`` belongs to ``manifests[i]``; the properties are the manifest's
    expected counts. Datasets without a class count are left out of the first
    correlation.
    """
    if len(fits) != len(manifests):
        raise DataError("need one manifest per fit")
    if len(fits) < 3:
        raise DataError("need at least 3 datasets")
    alphas = [f.alpha for f in fits]
    labeled = [(f.alpha, m.expected_classes) for f, m in zip(fits, manifests)
               if m.expected_classes is not None]
    if len(labeled) < 3:
        raise DataError("need at least 3 datasets with a class count")
    try:
        r_classes = pearson(*zip(*labeled))
        r_samples = pearson(alphas, [m.expected_samples for m in manifests])
        r_measurements = pearson(alphas, [m.expected_measurements for m in manifests])
    except DataError as exc:
        raise DataError(f"correlation undefined: {exc}") from None
    return r_classes, r_samples, r_measurements


@dataclass(frozen=True)
class AverageCurve:
    xs: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    n_curves: int


def average_curves(curves: Sequence[VarianceCurve], normalized: bool = False,
                   grid_points: int = 100) -> AverageCurve:
    """Mean and (population) standard deviation of several curves.

    With raw component counts the curves are truncated to the shortest one.
    With normalized x (fractions M/N) every curve is interpolated linearly,
    through the origin, onto ``grid_points`` evenly spaced fractions in (0, 1].
    """
    if not curves:
        raise DataError("no curves to average")
    if normalized:
        xs = np.arange(1, grid_points + 1) / grid_points
        stack = []
        for c in curves:
            frac = c.xs / c.xs[-1] if c.xs[-1] > 1.0 + 1e-12 else c.xs
            stack.append(np.interp(xs, np.concatenate([[0.0], frac]),
                                   np.concatenate([[0.0], c.ys])))
        ys = np.vstack(stack)
    else:
        n = min(c.xs.size for c in curves)
        xs = np.arange(1, n + 1, dtype=float)
        ys = np.vstack([c.ys[:n] for c in curves])
    return AverageCurve(xs, ys.mean(axis=0), ys.std(axis=0), len(curves))


def fits_to_csv(fits: Sequence[AlphaFit]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["dataset", "alpha", "rss", "iterations", "converged"])
    for f in fits:
        w.writerow([f.dataset, repr(f.alpha), repr(f.rss), f.iterations, int(f.converged)])
    return buf.getvalue()
