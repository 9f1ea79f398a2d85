"""Orthogonal Matching Pursuit and sparsity utilities (real data only)."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import InvalidArgumentError

__all__ = [
    "UnderdeterminedWarning",
    "SparseSolution",
    "least_squares",
    "omp",
    "best_s_term_error",
]


class UnderdeterminedWarning(UserWarning):
    """OMP was asked for more iterations than there are measurements."""


@dataclass
class SparseSolution:
    """Support (0-based column indices, in selection order) and values.

    ``residual_norms[k]`` is ``|A x_k - b|_2`` after ``k`` iterations and
    ``support_correlations[k-1]`` is ``max |A_S^T r|`` over the support after
    iteration ``k``.
    """

    support: list[int]
    values: np.ndarray
    N: int
    iterations_run: int
    underdetermined: bool = False
    rank_deficient: bool = False
    residual_norms: list[float] = field(default_factory=list)
    support_correlations: list[float] = field(default_factory=list)

    def to_dense(self) -> np.ndarray:
        x = np.zeros(self.N)
        x[self.support] = self.values
        return x


def least_squares(A_S: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, bool]:
    """Minimize ``|A_S y - b|_2`` via Householder QR.

    Returns the minimizer and a rank-deficiency flag; when the columns are
    numerically dependent the minimum-norm solution (SVD) is returned instead.
    """
    A_S = np.atleast_2d(np.asarray(A_S, dtype=float))
    if A_S.shape[0] < A_S.shape[1]:
        y, *_ = np.linalg.lstsq(A_S, b, rcond=None)
        return y, True
    Q, R = np.linalg.qr(A_S)
    diag = np.abs(np.diag(R))
    tol = max(A_S.shape) * np.finfo(float).eps * (diag.max() if diag.size else 0.0)
    if diag.size and diag.min() <= tol:
        y, *_ = np.linalg.lstsq(A_S, b, rcond=None)
        return y, True
    return solve_triangular(R, Q.T @ b), False


def omp(A: np.ndarray, b: np.ndarray, K: int, eligible: np.ndarray | None = None,
        stop_tol: float = 1e-12) -> SparseSolution:
    """Run ``K`` iterations of Orthogonal Matching Pursuit.

    Each iteration picks the eligible column most correlated with the current
    residual (lowest index on ties), adds it to the support and re-solves the
    least-squares problem on the support from scratch. Iteration stops early
    once the largest correlation drops below ``stop_tol * |b|_2``.

    Parameters
    ----------
    A : ndarray, shape (m, N)
        Sensing matrix with unit-norm eligible columns.
    b : ndarray, shape (m,)
    K : int
        Maximum number of iterations.
    eligible : ndarray of bool, optional
        Columns that may be selected; defaults to all.
    stop_tol : float
        Relative threshold on the maximal correlation.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or b.shape != (A.shape[0],):
        raise InvalidArgumentError(f"shape mismatch: A {A.shape}, b {b.shape}")
    if K < 0:
        raise InvalidArgumentError(f"K must be >= 0, got {K}")
    m, N = A.shape
    allowed = np.ones(N, dtype=bool) if eligible is None else np.array(eligible, dtype=bool)
    if allowed.shape != (N,):
        raise InvalidArgumentError(f"eligible mask has shape {allowed.shape}, expected ({N},)")

    underdetermined = K > m
    if underdetermined:
        warnings.warn(f"K={K} exceeds m={m}; least squares becomes underdetermined",
                      UnderdeterminedWarning, stacklevel=2)

    bnorm = float(np.linalg.norm(b))
    threshold = stop_tol * bnorm
    support: list[int] = []
    values = np.zeros(0)
    residual = b.copy()
    res_norms = [bnorm]
    supp_corr: list[float] = []
    rank_deficient = False

    for _ in range(min(K, N)):
        corr = np.abs(A.T @ residual)
        corr[~allowed] = -1.0
        j = int(np.argmax(corr))
        if bnorm == 0.0 or corr[j] <= threshold:
            break
        support.append(j)
        allowed[j] = False
        A_S = A[:, support]
        values, deficient = least_squares(A_S, b)
        rank_deficient |= deficient
        residual = b - A_S @ values
        res_norms.append(float(np.linalg.norm(residual)))
        supp_corr.append(float(np.max(np.abs(A_S.T @ residual))))

    return SparseSolution(
        support=support,
        values=np.asarray(values, dtype=float),
        N=N,
        iterations_run=len(support),
        underdetermined=underdetermined,
        rank_deficient=rank_deficient,
        residual_norms=res_norms,
        support_correlations=supp_corr,
    )


def best_s_term_error(x, s: int, p: int = 2) -> float:
    """``l^p`` norm of ``x`` after removing its ``s`` largest-magnitude entries.

    On ties the entry with the lower index counts as larger.
    """
    if p not in (1, 2):
        raise InvalidArgumentError(f"p must be 1 or 2, got {p}")
    x = np.asarray(x, dtype=float).ravel()
    if not 0 <= s <= x.size:
        raise InvalidArgumentError(f"need 0 <= s <= {x.size}, got {s}")
    order = np.argsort(-np.abs(x), kind="stable")
    tail = x[order[s:]]
    return float(np.linalg.norm(tail, ord=p)) if tail.size else 0.0
