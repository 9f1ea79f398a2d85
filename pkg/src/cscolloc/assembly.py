"""Full collocation system for ``-div(eta grad u) = F`` with the sine basis.

Two independent assembly paths are provided. :func:`assemble_full` evaluates
the entry formula

    B[q, j] = -eta(t_q) * lap psi_j(t_q) - grad eta(t_q) . grad psi_j(t_q)

directly, while :func:`assemble_structured` builds the same matrix from
Kronecker products of the 1D sine/cosine transforms. Agreement of the two is
one of the package's main self-checks.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import basis
from .errors import InvalidArgumentError, ResourceLimitError

__all__ = [
    "MAX_SIZE",
    "DiffusionCoefficient",
    "CollocationSystem",
    "SpectralBounds",
    "check_size",
    "assemble_rows",
    "assemble_full",
    "assemble_structured",
    "spectral_bounds",
    "coherence_bound",
    "forcing_from_manufactured",
]

MAX_SIZE = 2**20

PointFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class DiffusionCoefficient:
    """Diffusion coefficient together with certified sup-norm bounds.

    ``eval`` maps points of shape ``(P, d)`` to ``(P,)`` and ``grad`` maps them
    to ``(P, d)``. For general coefficients the bounds are the caller's
    responsibility; the :meth:`affine` and :meth:`constant` constructors
    compute them exactly.
    """

    eval: PointFn
    grad: PointFn
    eta_min: float
    sup_eta: float
    sup_grad: np.ndarray
    weights: np.ndarray | None = None
    offset: float = 1.0

    @property
    def d(self) -> int:
        return len(self.sup_grad)

    @classmethod
    def affine(cls, weights, offset: float = 1.0) -> "DiffusionCoefficient":
        """``eta(z) = offset + w . z`` with non-negative weights ``w``."""
        w = np.asarray(weights, dtype=float).ravel()
        if np.any(w < 0):
            raise InvalidArgumentError("affine weights must be non-negative")
        if offset <= 0:
            raise InvalidArgumentError("affine offset must be positive")

        def value(z):
            return offset + np.atleast_2d(z) @ w

        def gradient(z):
            z = np.atleast_2d(z)
            return np.broadcast_to(w, z.shape).copy()

        return cls(
            eval=value,
            grad=gradient,
            eta_min=float(offset),
            sup_eta=float(offset + w.sum()),
            sup_grad=w.copy(),
            weights=w.copy(),
            offset=float(offset),
        )

    @classmethod
    def constant(cls, d: int, value: float = 1.0) -> "DiffusionCoefficient":
        return cls.affine(np.zeros(d), offset=value)

    @property
    def is_constant(self) -> bool:
        return self.weights is not None and not np.any(self.weights)

    def describe(self) -> dict:
        if self.weights is None:
            return {"kind": "general", "eta_min": self.eta_min, "sup_eta": self.sup_eta,
                    "sup_grad": self.sup_grad.tolist()}
        return {"kind": "affine", "offset": self.offset, "weights": self.weights.tolist()}


@dataclass
class CollocationSystem:
    """Dense collocation matrix ``B`` and right-hand side ``c``.

    Rows are indexed by collocation nodes and columns by basis functions, both
    in lexicographic multi-index order.
    """

    B: np.ndarray
    c: np.ndarray
    n: int
    d: int
    ordering: str = field(default="lex-last-fastest")

    @property
    def N(self) -> int:
        return self.n**self.d

    _MAGIC = b"CSCB"
    _VERSION = 1

    def dump(self, path) -> None:
        """Write ``(B, c)`` as little-endian binary.

        Layout: ``b"CSCB"``, then ``u32`` version, ``u32`` n, ``u32`` d, then
        ``B`` row-major as ``f64`` and ``c`` as ``f64``.
        """
        with open(path, "wb") as fh:
            fh.write(self._MAGIC)
            fh.write(struct.pack("<III", self._VERSION, self.n, self.d))
            fh.write(np.ascontiguousarray(self.B, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(self.c, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path) -> "CollocationSystem":
        raw = Path(path).read_bytes()
        if raw[:4] != cls._MAGIC:
            raise ValueError(f"{path}: bad magic {raw[:4]!r}")
        version, n, d = struct.unpack_from("<III", raw, 4)
        if version != cls._VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        N = n**d
        expected = 16 + 8 * (N * N + N)
        if len(raw) != expected:
            raise ValueError(f"{path}: expected {expected} bytes, found {len(raw)}")
        data = np.frombuffer(raw, dtype="<f8", offset=16)
        B = data[: N * N].reshape(N, N).astype(float)
        c = data[N * N:].astype(float)
        return cls(B=B, c=c, n=n, d=d)


@dataclass(frozen=True)
class SpectralBounds:
    """Bounds ``r <= lambda(B^T B) <= R`` valid when ``admissible``."""

    r: float
    R: float
    admissible: bool


def check_size(n: int, d: int, max_size: int = MAX_SIZE) -> int:
    if n < 1 or d < 1:
        raise InvalidArgumentError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    N = n**d
    if N > max_size:
        raise ResourceLimitError(f"N = {n}^{d} = {N} exceeds the cap {max_size}")
    return N


def assemble_rows(eta: DiffusionCoefficient, points: np.ndarray, n: int) -> np.ndarray:
    """Rows of ``B`` for arbitrary collocation points, from the entry formula."""
    points = np.atleast_2d(points)
    vals = basis.evaluate_basis(points, n, grad=not eta.is_constant, laplacian=True)
    rows = -eta.eval(points)[:, None] * vals["laplacian"]
    if "grad" in vals:
        rows -= np.einsum("pk,pjk->pj", eta.grad(points), vals["grad"])
    return rows


def assemble_full(eta: DiffusionCoefficient, forcing: PointFn | None, n: int, d: int,
                  max_size: int = MAX_SIZE) -> CollocationSystem:
    """Assemble ``B`` and ``c = F(t_q)`` on the full tensor grid.

    ``forcing`` may be ``None``, in which case ``c`` is all zeros (useful when
    the right-hand side is synthesized from a known coefficient vector).
    """
    N = check_size(n, d, max_size)
    pts = basis.grid_points(n, d)
    B = assemble_rows(eta, pts, n)
    c = np.zeros(N) if forcing is None else np.asarray(forcing(pts), dtype=float)
    return CollocationSystem(B=B, c=c, n=n, d=d)


def assemble_structured(eta: DiffusionCoefficient, n: int, d: int,
                        max_size: int = MAX_SIZE) -> np.ndarray:
    """Assemble ``B`` from Kronecker factors.

    ``B = D0 (S ⊗ ... ⊗ S) - sum_k Dk (S ⊗ .. ⊗ C E ⊗ .. ⊗ S) J`` where
    ``D0``/``Dk`` hold ``eta`` and ``d eta / dz_k`` at the nodes, ``E =
    diag(pi j)`` and ``J = diag(1 / (pi^2 |j|^2))``. The first term is the
    diffusion part, the sum is the gradient part.
    """
    check_size(n, d, max_size)
    pts = basis.grid_points(n, d)
    S = basis.sine_matrix(n)
    CE = basis.cosine_matrix(n) * (np.pi * np.arange(1, n + 1))
    j = basis.multi_indices(n, d)
    J = 1.0 / (np.pi**2 * (j**2).sum(axis=1))

    B = eta.eval(pts)[:, None] * basis.kron_power(S, d)
    if not eta.is_constant:
        deta = eta.grad(pts)
        for k in range(d):
            factors = [S] * d
            factors[k] = CE
            K = factors[0]
            for f in factors[1:]:
                K = np.kron(K, f)
            B -= deta[:, k][:, None] * K * J[None, :]
    return B


def spectral_bounds(eta: DiffusionCoefficient, d: int | None = None) -> SpectralBounds:
    """Lower/upper spectral bounds of ``B^T B`` and the admissibility test."""
    grad_sum = float(np.sum(eta.sup_grad))
    r = eta.eta_min**2 - (2.0 / np.pi) * eta.sup_eta * grad_sum
    R = (eta.sup_eta + grad_sum / np.pi) ** 2
    admissible = eta.eta_min > 0 and eta.sup_eta * grad_sum < (np.pi / 2) * eta.eta_min**2
    return SpectralBounds(r=float(r), R=float(R), admissible=bool(admissible))


def coherence_bound(system: CollocationSystem, bounds: SpectralBounds):
    """Local coherence bound ``nu_q = 2^d R / N`` and whether ``B`` obeys it.

    Returns
    -------
    nu : ndarray, shape (N,)
    holds : bool
        ``max_j B[q, j]^2 <= nu_q`` for every row ``q``.
    """
    N = system.B.shape[0]
    nu = np.full(N, 2.0**system.d * bounds.R / N)
    holds = bool(np.all(np.max(system.B**2, axis=1) <= nu))
    return nu, holds


def forcing_from_manufactured(u: PointFn, grad_u: PointFn, lap_u: PointFn,
                              eta: DiffusionCoefficient) -> PointFn:
    """Forcing ``F = -eta lap u - grad eta . grad u`` for a chosen solution ``u``."""
    del u  # only derivatives enter

    def forcing(z):
        z = np.atleast_2d(z)
        return -eta.eval(z) * lap_u(z) - np.sum(eta.grad(z) * grad_u(z), axis=-1)

    return forcing
