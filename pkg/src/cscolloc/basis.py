"""Sine eigenbasis on the unit cube, collocation grid and 1D transform matrices.

Multi-indices are tuples of positive integers in ``[n] = {1, ..., n}``.
Whenever a set of multi-indices is flattened into a vector, the ordering is
lexicographic with the last coordinate running fastest; ``lex_rank`` gives
the 1-based position of a multi-index in that ordering, and row ``i`` of
``multi_indices(n, d)`` holds the multi-index of rank ``i + 1``.

Points are arrays whose last axis has length ``d``; all evaluators accept a
single point of shape ``(d,)`` or a batch of shape ``(P, d)``.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import InvalidArgumentError, InvalidIndexError

__all__ = [
    "check_multi_index",
    "lex_rank",
    "lex_unrank",
    "multi_indices",
    "grid_point",
    "grid_points",
    "eval_xi",
    "eval_psi",
    "eval_grad_psi",
    "eval_laplacian_psi",
    "evaluate_basis",
    "sine_matrix",
    "cosine_matrix",
    "checkerboard",
    "kron_power",
]


def check_multi_index(j: Sequence[int], n: int, d: int | None = None) -> tuple[int, ...]:
    """Validate ``j`` as an element of ``[n]^d`` and return it as a tuple."""
    j = tuple(int(v) for v in np.atleast_1d(j))
    if d is not None and len(j) != d:
        raise InvalidIndexError(f"multi-index {j} has dimension {len(j)}, expected {d}")
    if n < 1:
        raise InvalidArgumentError(f"order n must be >= 1, got {n}")
    for v in j:
        if not 1 <= v <= n:
            raise InvalidIndexError(f"multi-index {j} has entry {v} outside [1, {n}]")
    return j


def lex_rank(j: Sequence[int], n: int) -> int:
    """1-based lexicographic rank of ``j`` in ``[n]^d`` (last coordinate fastest).

    >>> lex_rank((1, 3), 3), lex_rank((3, 3), 3)
    (3, 9)
    """
    j = check_multi_index(j, n)
    rank = 0
    for v in j:
        rank = rank * n + (v - 1)
    return rank + 1


def lex_unrank(rank: int, n: int, d: int) -> tuple[int, ...]:
    """Inverse of :func:`lex_rank`."""
    if not 1 <= rank <= n**d:
        raise InvalidIndexError(f"rank {rank} outside [1, {n**d}]")
    r = rank - 1
    out = []
    for _ in range(d):
        r, v = divmod(r, n)
        out.append(v + 1)
    return tuple(reversed(out))


def multi_indices(n: int, d: int) -> np.ndarray:
    """All of ``[n]^d`` as an ``(n**d, d)`` integer array in lexicographic order."""
    if n < 1 or d < 1:
        raise InvalidArgumentError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    axes = np.meshgrid(*([np.arange(1, n + 1)] * d), indexing="ij")
    return np.stack([a.ravel() for a in axes], axis=-1)


def grid_point(q: Sequence[int], n: int) -> np.ndarray:
    """Collocation node ``q / (n + 1)``."""
    q = check_multi_index(q, n)
    return np.asarray(q, dtype=float) / (n + 1)


def grid_points(n: int, d: int) -> np.ndarray:
    """All collocation nodes, one row per multi-index in lexicographic order."""
    return multi_indices(n, d) / (n + 1)


def _as_points(z, d: int) -> tuple[np.ndarray, bool]:
    z = np.asarray(z, dtype=float)
    single = z.ndim == 1
    z = np.atleast_2d(z)
    if z.shape[-1] != d:
        raise InvalidArgumentError(f"points have dimension {z.shape[-1]}, expected {d}")
    return z, single


def _xi_scale(j: np.ndarray) -> float:
    d = j.size
    return 2.0 ** (d / 2) / (np.pi**2 * float(j @ j))


def eval_xi(j: Sequence[int], z) -> np.ndarray | float:
    """Evaluate ``xi_j(z) = 2^{d/2} / (pi^2 |j|^2) * prod_k sin(pi j_k z_k)``."""
    j = np.asarray(j, dtype=float)
    z, single = _as_points(z, j.size)
    val = _xi_scale(j) * np.prod(np.sin(np.pi * j * z), axis=-1)
    return float(val[0]) if single else val


def eval_psi(j: Sequence[int], z, n: int) -> np.ndarray | float:
    """Evaluate the rescaled basis function ``psi_j = xi_j / (n+1)^{d/2}``."""
    j = np.asarray(j, dtype=float)
    z, single = _as_points(z, j.size)
    scale = _xi_scale(j) / (n + 1) ** (j.size / 2)
    val = scale * np.prod(np.sin(np.pi * j * z), axis=-1)
    return float(val[0]) if single else val


def eval_grad_psi(j: Sequence[int], z, n: int) -> np.ndarray:
    """Gradient of ``psi_j``; returns shape ``(d,)`` or ``(P, d)``."""
    j = np.asarray(j, dtype=float)
    z, single = _as_points(z, j.size)
    scale = _xi_scale(j) / (n + 1) ** (j.size / 2)
    s = np.sin(np.pi * j * z)
    c = np.pi * j * np.cos(np.pi * j * z)
    grad = np.empty_like(z)
    for k in range(j.size):
        others = np.delete(s, k, axis=-1)
        grad[:, k] = scale * c[:, k] * np.prod(others, axis=-1)
    return grad[0] if single else grad


def eval_laplacian_psi(j: Sequence[int], z, n: int) -> np.ndarray | float:
    """Laplacian of ``psi_j``, which equals ``-pi^2 |j|^2 psi_j``."""
    j = np.asarray(j, dtype=float)
    lap = -np.pi**2 * float(j @ j) * np.asarray(eval_psi(j, z, n))
    return float(lap) if lap.ndim == 0 else lap


def _outer_rows(tables: list[np.ndarray]) -> np.ndarray:
    # (P, n) per axis -> (P, n**d), last axis fastest
    out = tables[0]
    for t in tables[1:]:
        out = (out[:, :, None] * t[:, None, :]).reshape(out.shape[0], -1)
    return out


def evaluate_basis(points, n: int, *, grad: bool = False, laplacian: bool = False):
    """Evaluate every ``psi_j``, ``j in [n]^d``, at a batch of points.

    Parameters
    ----------
    points : array_like, shape (P, d)
    n : int
        Truncation order.
    grad, laplacian : bool
        Also return gradients ``(P, N, d)`` and Laplacians ``(P, N)``.

    Returns
    -------
    dict
        Keys ``"psi"`` and, on request, ``"grad"`` and ``"laplacian"``.
        Columns follow the lexicographic ordering of :func:`multi_indices`.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    d = points.shape[1]
    freqs = np.pi * np.arange(1, n + 1)
    sines = [np.sin(np.outer(points[:, k], freqs)) for k in range(d)]
    prod_sin = _outer_rows(sines)
    j = multi_indices(n, d)
    norm2 = (j**2).sum(axis=1)
    # psi_j = (2/(n+1))^{d/2} / (pi^2 |j|^2) * prod sin
    amp = (2.0 / (n + 1)) ** (d / 2)
    weight = amp / (np.pi**2 * norm2)
    out = {"psi": prod_sin * weight}
    if laplacian:
        out["laplacian"] = -amp * prod_sin
    if grad:
        g = np.empty(prod_sin.shape + (d,))
        for k in range(d):
            tabs = list(sines)
            tabs[k] = np.cos(np.outer(points[:, k], freqs)) * freqs
            g[:, :, k] = _outer_rows(tabs) * weight
        out["grad"] = g
    return out


def _check_order(n: int) -> None:
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"transform order must be a positive integer, got {n}")


def sine_matrix(n: int) -> np.ndarray:
    """Orthogonal DST-I matrix ``sqrt(2/(n+1)) sin(pi i j / (n+1))``."""
    _check_order(n)
    i = np.arange(1, n + 1)
    return np.sqrt(2.0 / (n + 1)) * np.sin(np.pi * np.outer(i, i) / (n + 1))


def cosine_matrix(n: int) -> np.ndarray:
    """``sqrt(2/(n+1)) cos(pi i j / (n+1))``; satisfies ``C^T C = I - 2/(n+1) Q``."""
    _check_order(n)
    i = np.arange(1, n + 1)
    return np.sqrt(2.0 / (n + 1)) * np.cos(np.pi * np.outer(i, i) / (n + 1))


def checkerboard(n: int) -> np.ndarray:
    """0/1 matrix with ones where ``i + j`` is even."""
    _check_order(n)
    i = np.arange(1, n + 1)
    return ((np.add.outer(i, i) % 2) == 0).astype(float)


def kron_power(mat: np.ndarray, d: int) -> np.ndarray:
    """``mat ⊗ ... ⊗ mat`` with ``d`` factors."""
    out = mat
    for _ in range(d - 1):
        out = np.kron(out, mat)
    return out
