"""Linear discriminant analysis from within- and between-group scatter matrices.

The discriminant directions are the eigenvectors of
``S = (S_intra + ridge I)^-1 S_inter``. ``S`` is not symmetric, so the
equivalent symmetric problem is solved instead: with
``S_intra + ridge I = L L^T`` (Cholesky), the symmetric matrix
``L^-1 S_inter L^-T`` has the same eigenvalues, and its eigenvectors ``u`` map
back to discriminant directions ``L^-T u``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError, NumericalError
from .linalg import SINGULAR_TOL, apply_sign_convention, solve_linear, symmetric_eigen
from .stats import DataMatrix

# eigenvalues at or below this fraction of the largest count as zero
RANK_TOL = 1e-9
AUTO_RIDGE = 1e-8


@dataclass(frozen=True)
class LabeledData:
    data: DataMatrix
    labels: tuple

    def __post_init__(self):
        labels = tuple(self.labels)
        if len(labels) != self.data.n_objects:
            raise DataError(f"{len(labels)} labels for {self.data.n_objects} objects")
        object.__setattr__(self, "labels", labels)
        small = {c: n for c, n in self.counts.items() if n < 2}
        if small:
            raise DataError(f"every category needs at least 2 members, got {small}")

    @property
    def categories(self) -> list:
        # first-appearance order keeps results independent of label types
        return list(dict.fromkeys(self.labels))

    @property
    def counts(self) -> dict:
        out: dict = {}
        for label in self.labels:
            out[label] = out.get(label, 0) + 1
        return out


@dataclass(frozen=True)
class LdaModel:
    s_intra: np.ndarray
    s_inter: np.ndarray
    axes: np.ndarray  # rows are unit-norm discriminant directions
    eigenvalues: np.ndarray
    means: np.ndarray
    feature_names: tuple[str, ...]
    n_axes: int
    ridge: float = 0.0
    separation: float = 0.0  # trace of (S_intra + ridge I)^-1 S_inter

    def to_dict(self) -> dict:
        return {
            "kind": "lda",
            "feature_names": list(self.feature_names),
            "means": self.means.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "axes": self.axes.tolist(),
            "n_axes": self.n_axes,
            "ridge": self.ridge,
            "separation": self.separation,
            "s_intra": self.s_intra.tolist(),
            "s_inter": self.s_inter.tolist(),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, doc: dict) -> "LdaModel":
        if doc.get("kind") != "lda":
            raise DataError(f"not an LDA model document (kind={doc.get('kind')!r})")
        arr = lambda key: np.array(doc[key], dtype=float)  # noqa: E731
        return cls(
            s_intra=arr("s_intra"),
            s_inter=arr("s_inter"),
            axes=arr("axes"),
            eigenvalues=arr("eigenvalues"),
            means=arr("means"),
            feature_names=tuple(doc["feature_names"]),
            n_axes=int(doc["n_axes"]),
            ridge=float(doc["ridge"]),
            separation=float(doc["separation"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "LdaModel":
        return cls.from_dict(json.loads(text))


def scatter_matrices(d: LabeledData) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(S_intra, S_inter)``.

    ``S_intra`` sums each category's scatter about its own centroid;
    ``S_inter`` weights each centroid's offset from the global mean by the
    category size.
    """
    x = d.data.values
    n = x.shape[0]
    mu = x.mean(axis=1)
    labels = np.array(d.labels, dtype=object)
    s_intra = np.zeros((n, n))
    s_inter = np.zeros((n, n))
    for cat in d.categories:
        members = x[:, labels == cat]
        centroid = members.mean(axis=1)
        dev = members - centroid[:, None]
        s_intra += dev @ dev.T
        offset = centroid - mu
        s_inter += members.shape[1] * np.outer(offset, offset)
    return 0.5 * (s_intra + s_intra.T), 0.5 * (s_inter + s_inter.T)


def _cholesky(a: np.ndarray) -> np.ndarray | None:
    try:
        low = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return None
    if np.min(np.diag(low)) ** 2 < SINGULAR_TOL * np.linalg.norm(a):
        return None
    return low


def fit_lda(d: LabeledData, ridge: float | None = None) -> LdaModel:
    """Fit discriminant axes.

    ``ridge=None`` uses no regularization when ``S_intra`` is invertible and
    ``1e-8 * trace(S_intra) / N`` otherwise; the value used is stored on the
    model. An explicit ``ridge=0`` with singular ``S_intra`` raises
    ``NumericalError``.
    """
    if ridge is not None and ridge < 0:
        raise ValueError("ridge must be non-negative")
    s_intra, s_inter = scatter_matrices(d)
    n = s_intra.shape[0]
    used = 0.0 if ridge is None else float(ridge)
    low = _cholesky(s_intra + used * np.eye(n))
    if low is None and ridge is None:
        used = AUTO_RIDGE * float(np.trace(s_intra)) / n
        if used > 0:
            low = _cholesky(s_intra + used * np.eye(n))
    if low is None:
        raise NumericalError("within-group scatter matrix is singular; pass a positive ridge")

    half = solve_linear(low, s_inter)  # L^-1 S_inter
    sym = solve_linear(low, half.T)  # L^-1 S_inter L^-T
    eig = symmetric_eigen(0.5 * (sym + sym.T))
    values = np.where(eig.values < 0, 0.0, eig.values)

    axes = solve_linear(low.T, eig.vectors.T).T  # rows L^-T u
    axes /= np.linalg.norm(axes, axis=1)[:, None]
    axes = apply_sign_convention(axes)

    top = values[0]
    significant = int(np.sum(values > RANK_TOL * top)) if top > 0 else 0
    n_axes = min(significant, len(d.categories) - 1)
    separation = float(np.trace(solve_linear(s_intra + used * np.eye(n), s_inter)))
    return LdaModel(
        s_intra=s_intra,
        s_inter=s_inter,
        axes=axes,
        eigenvalues=values,
        means=d.data.values.mean(axis=1),
        feature_names=d.data.feature_names,
        n_axes=n_axes,
        ridge=used,
        separation=separation,
    )


def transform_lda(model: LdaModel, x: DataMatrix, m: int) -> np.ndarray:
    """Project ``x`` on the first ``m`` retained axes after centering on the training mean."""
    if not 1 <= m <= model.n_axes:
        raise DataError(f"m must be in [1, {model.n_axes}], got {m}")
    if x.feature_names != model.feature_names:
        x = x.select(model.feature_names)
    return model.axes[:m] @ (x.values - model.means[:, None])


def labeled(values, labels: Sequence, feature_names: Sequence[str] | None = None) -> LabeledData:
    """Convenience constructor from a features x objects array."""
    return LabeledData(DataMatrix.from_rows(values, feature_names), tuple(labels))
