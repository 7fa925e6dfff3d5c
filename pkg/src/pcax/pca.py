"""Principal component analysis built on the Jacobi eigensolver.

``fit`` diagonalizes the covariance matrix of centered data (covariance mode)
or of standardized data (correlation mode). Rows of ``PcaModel.w`` are the
eigenvectors, so projecting is ``Y = W @ X_preprocessed``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DataError, NumericalError
from .linalg import symmetric_eigen
from .stats import DataMatrix, center, covariance_matrix, standardize, summarize

MODES = ("covariance", "correlation")
# eigenvalues below this fraction of the largest are treated as zero
ZERO_TOL = 1e-10


@dataclass(frozen=True)
class PcaModel:
    w: np.ndarray
    eigenvalues: np.ndarray
    means: np.ndarray
    scales: np.ndarray | None
    mode: str
    feature_names: tuple[str, ...]

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if (self.mode == "correlation") != (self.scales is not None):
            raise ValueError("scales are required exactly when mode='correlation'")
        for field in ("w", "eigenvalues", "means", "scales"):
            value = getattr(self, field)
            if value is not None:
                arr = np.array(value, dtype=float)
                arr.setflags(write=False)
                object.__setattr__(self, field, arr)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def to_dict(self) -> dict:
        return {
            "kind": "pca",
            "mode": self.mode,
            "feature_names": list(self.feature_names),
            "means": self.means.tolist(),
            "scales": None if self.scales is None else self.scales.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "w": self.w.tolist(),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, doc: dict) -> "PcaModel":
        if doc.get("kind", "pca") != "pca":
            raise DataError(f"not a PCA model document (kind={doc.get('kind')!r})")
        scales = doc.get("scales")
        return cls(
            w=np.array(doc["w"], dtype=float),
            eigenvalues=np.array(doc["eigenvalues"], dtype=float),
            means=np.array(doc["means"], dtype=float),
            scales=None if scales is None else np.array(scales, dtype=float),
            mode=doc["mode"],
            feature_names=tuple(doc["feature_names"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "PcaModel":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class VarianceReport:
    """Total variance, cumulative retained variance and ratios G(M) in percent."""

    total: float
    cumulative: np.ndarray
    ratios: np.ndarray


@dataclass(frozen=True)
class BiplotData:
    scores: np.ndarray  # 2 x Q, unit-variance component scores
    loadings: np.ndarray  # N x 2, one loading vector per feature
    feature_names: tuple[str, ...]


def _clamp_eigenvalues(values: np.ndarray) -> np.ndarray:
    values = values.copy()
    top = max(values[0], 0.0)
    tiny = values < 0
    if np.any(values[tiny] < -ZERO_TOL * top):
        raise NumericalError(
            f"covariance matrix has a negative eigenvalue {values.min():.3g}"
        )
    values[tiny] = 0.0
    return values


def fit(x: DataMatrix, mode: str = "correlation", zero_std_policy: str = "drop") -> PcaModel:
    """Fit PCA to ``x``.

    In correlation mode, zero-variance features are handled according to
    ``zero_std_policy`` and dropped ones are absent from the model.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if mode == "correlation":
        prepared, stats, kept = standardize(x, zero_std_policy)
        scales = stats.stds
    else:
        prepared, stats, kept = center(x), summarize(x), list(x.feature_names)
        scales = None
    eig = symmetric_eigen(covariance_matrix(prepared))
    return PcaModel(
        w=eig.vectors,
        eigenvalues=_clamp_eigenvalues(eig.values),
        means=stats.means,
        scales=scales,
        mode=mode,
        feature_names=tuple(kept),
    )


def preprocess(model: PcaModel, x: DataMatrix) -> np.ndarray:
    """Center (and in correlation mode scale) ``x`` with the training statistics.

    Features are picked from ``x`` by name, so extra columns are ignored.
    """
    if x.feature_names != model.feature_names:
        try:
            x = x.select(model.feature_names)
        except DataError as exc:
            raise DataError(f"feature mismatch with model: {exc}") from None
    values = x.values - model.means[:, None]
    if model.scales is not None:
        values = values / model.scales[:, None]
    return values


def transform(model: PcaModel, x: DataMatrix, m: int | None = None) -> np.ndarray:
    """Scores of the first ``m`` components, an ``m x Q`` array."""
    if m is None:
        m = model.n_features
    if not 1 <= m <= model.n_features:
        raise DataError(f"m must be in [1, {model.n_features}], got {m}")
    return model.w[:m] @ preprocess(model, x)


def variance_report(model: PcaModel) -> VarianceReport:
    lam = model.eigenvalues
    cumulative = np.cumsum(lam)
    total = float(cumulative[-1])
    if total <= 0.0:
        raise NumericalError("all eigenvalues are zero; variance ratios are undefined")
    return VarianceReport(total, cumulative, 100.0 * cumulative / total)


def select_components(report: VarianceReport, target_g: float) -> int:
    """Smallest M whose ratio G(M) reaches ``target_g`` percent."""
    if not 0 < target_g <= 100:
        raise ValueError(f"target_g must be in (0, 100], got {target_g}")
    hits = np.nonzero(report.ratios >= target_g - 1e-9)[0]
    return int(hits[0]) + 1


def loadings(model: PcaModel) -> np.ndarray:
    """``L[i, j] = sqrt(lambda_i) * W[i, j]``.

    For standardized data this is the Pearson correlation between component
    ``i`` and feature ``j``. Covariance-mode models are rejected because that
    interpretation does not hold for them.
    """
    if model.mode != "correlation":
        raise DataError("loadings are defined for correlation-mode models only")
    return np.sqrt(model.eigenvalues)[:, None] * model.w


def biplot_data(model: PcaModel, x: DataMatrix) -> BiplotData:
    if model.n_features < 2:
        raise DataError("a biplot needs at least 2 features")
    lam = model.eigenvalues
    if lam[1] <= ZERO_TOL * lam[0]:
        raise NumericalError("second eigenvalue is zero; the biplot is degenerate")
    scores = transform(model, x, 2)
    sigma = scores.std(axis=1, ddof=1)
    if np.any(sigma == 0):
        raise DataError("component scores have zero spread on this data")
    return BiplotData(scores / sigma[:, None], loadings(model)[:2].T.copy(), model.feature_names)


def entropy_logdet(cov) -> float:
    """Differential entropy of a Gaussian with covariance ``cov``: ``0.5 ln|2 pi e cov|``."""
    lam = symmetric_eigen(cov).values
    if lam[-1] <= 0:
        raise NumericalError("covariance must be positive definite")
    return float(0.5 * np.sum(np.log(2 * np.pi * np.e * lam)))
