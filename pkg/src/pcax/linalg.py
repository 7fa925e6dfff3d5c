"""Dense matrix primitives and a Jacobi eigensolver for symmetric matrices.

Matrices are plain 2-D ``float64`` numpy arrays. ``as_matrix`` is the single
entry point that validates them (finite entries, at least one row and column).

The eigensolver is a cyclic Jacobi method using the round-robin (Brent-Luk)
pair ordering: each step rotates ``n // 2`` disjoint index pairs at once, so a
step is one orthogonal similarity transform applied with two matrix products.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, DataError, NumericalError

SYMMETRY_TOL = 1e-9
OFFDIAG_TOL = 1e-12
MAX_SWEEPS = 100
SINGULAR_TOL = 1e-12


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    m = np.array(a, dtype=float)
    if m.ndim != 2:
        raise DataError(f"{name} must be 2-D, got shape {m.shape}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise DataError(f"{name} must have at least one row and one column")
    if not np.all(np.isfinite(m)):
        raise DataError(f"{name} contains NaN or infinite entries")
    return m


@dataclass(frozen=True)
class EigenPairs:
    """Eigenvalues in non-increasing order; ``vectors[i]`` pairs with ``values[i]``.

    Each eigenvector row has its largest-magnitude entry non-negative (first
    such entry on ties). Within a repeated eigenvalue the basis is whatever the
    Jacobi iteration produced.
    """

    values: np.ndarray
    vectors: np.ndarray
    sweeps: int = 0


def matmul(a, b) -> np.ndarray:
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise DataError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def apply_sign_convention(vectors: np.ndarray) -> np.ndarray:
    """Flip rows so the entry of largest magnitude is non-negative."""
    v = np.array(vectors, dtype=float)
    idx = np.argmax(np.abs(v), axis=1)  # argmax returns the lowest index on ties
    signs = np.where(v[np.arange(v.shape[0]), idx] < 0, -1.0, 1.0)
    return v * signs[:, None]


@lru_cache(maxsize=64)
def _round_robin(n: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    # circle method; index n (when n is odd) is a bye
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = []
        for k in range(m // 2):
            p, q = players[k], players[m - 1 - k]
            if p < n and q < n:
                pairs.append((min(p, q), max(p, q)))
        if pairs:
            rounds.append((np.array([pq[0] for pq in pairs]), np.array([pq[1] for pq in pairs])))
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(rounds)


def _offdiag_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def symmetric_eigen(k, *, tol: float = OFFDIAG_TOL, max_sweeps: int = MAX_SWEEPS) -> EigenPairs:
    """Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Iterates until the off-diagonal Frobenius norm is at most ``tol * ||k||_F``.

    Raises
    ------
    DataError
        ``k`` is not square or is asymmetric beyond ``1e-9`` relative.
    ConvergenceError
        The tolerance was not reached within ``max_sweeps`` sweeps.
    """
    a = as_matrix(k, "k")
    n = a.shape[0]
    if a.shape[1] != n:
        raise DataError(f"eigendecomposition needs a square matrix, got {a.shape}")
    fro = float(np.linalg.norm(a))
    if np.max(np.abs(a - a.T)) > SYMMETRY_TOL * max(fro, 1.0):
        raise DataError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    v = np.eye(n)

    threshold = tol * fro
    rounds = _round_robin(n)
    sweeps = 0
    while _offdiag_norm(a) > threshold:
        if sweeps >= max_sweeps:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
        sweeps += 1
        for p, q in rounds:
            apq = a[p, q]
            active = apq != 0.0
            if not np.any(active):
                continue
            p, q, apq = p[active], q[active], apq[active]
            theta = (a[q, q] - a[p, p]) / (2.0 * apq)
            big = np.abs(theta) > 1e150
            theta_sq = np.where(big, 0.0, theta) ** 2
            t = np.where(
                big,
                0.5 / np.where(big, theta, 1.0),  # tan ~ 1/(2 theta), no overflow
                np.sign(theta) / (np.abs(theta) + np.sqrt(theta_sq + 1.0)),
            )
            t[theta == 0.0] = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            rot = np.eye(n)
            rot[p, p] = c
            rot[q, q] = c
            rot[p, q] = s
            rot[q, p] = -s
            a = rot.T @ a @ rot
            a[p, q] = 0.0
            a[q, p] = 0.0
            a = 0.5 * (a + a.T)
            v = v @ rot

    values = np.diag(a).copy()
    order = np.argsort(-values, kind="stable")
    return EigenPairs(values[order], apply_sign_convention(v[:, order].T), sweeps)


def solve_linear(a, b) -> np.ndarray:
    """Solve ``a @ x = b`` by LU with partial pivoting.

    ``b`` may be a vector or a matrix of right-hand sides. A pivot below
    ``1e-12 * ||a||_F`` is treated as singular.
    """
    a = as_matrix(a, "a")
    b_arr = np.array(b, dtype=float)
    vector = b_arr.ndim == 1
    b_mat = as_matrix(b_arr[:, None] if vector else b_arr, "b")
    n = a.shape[0]
    if a.shape[1] != n:
        raise DataError(f"solve_linear needs a square matrix, got {a.shape}")
    if b_mat.shape[0] != n:
        raise DataError(f"right-hand side has {b_mat.shape[0]} rows, expected {n}")
    with warnings.catch_warnings():
        # singularity is judged below against our own threshold
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    if np.min(np.abs(np.diag(lu))) < SINGULAR_TOL * np.linalg.norm(a):
        raise NumericalError("matrix is singular to working tolerance")
    x = scipy.linalg.lu_solve((lu, piv), b_mat, check_finite=False)
    return x[:, 0] if vector else x


def random_orthogonal(n: int, seed: int) -> np.ndarray:
    """Haar-distributed orthogonal ``n x n`` matrix, deterministic in ``seed``."""
    if n < 1:
        raise DataError("n must be at least 1")
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return q * d
