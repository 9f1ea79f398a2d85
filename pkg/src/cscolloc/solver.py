"""Full and compressive spectral collocation solvers and error metrics."""
from __future__ import annotations

import json
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve
from scipy.linalg.lapack import dgecon

from . import basis
from .assembly import (
    DiffusionCoefficient,
    PointFn,
    assemble_full,
    check_size,
    forcing_from_manufactured,
)
from .errors import InvalidArgumentError, NumericalError
from .omp import SparseSolution, omp
from .sampling import build_compressive, column_norms, default_m_K, draw_indices

__all__ = [
    "ManufacturedSolution",
    "ProblemSpec",
    "SolveReport",
    "SpectralExpansion",
    "bubble_problem",
    "fd_divergence_form",
    "solve_full",
    "solve_compressive",
    "evaluate_solution",
    "relative_l2_coeff_error",
    "relative_L2_function_error",
    "gauss_legendre_1d",
    "gauss_legendre_grid",
]

MAX_CONDITION = 1e12


@dataclass(frozen=True)
class ManufacturedSolution:
    """Exact solution ``u`` with its gradient and Laplacian (all vectorized)."""

    u: PointFn
    grad: PointFn
    laplacian: PointFn

    @classmethod
    def bubble(cls, d: int = 2) -> "ManufacturedSolution":
        """``u(z) = (4^d prod_k z_k (1 - z_k))^2``; for d = 2 the 16 z1 z2 (1-z1)(1-z2) bubble squared."""
        c2 = float(4**d) ** 2

        def parts(z):
            z = np.atleast_2d(z)
            g = z * (1 - z)
            return z, g, np.prod(g, axis=-1)

        def others(g, k):
            return np.prod(np.delete(g, k, axis=-1), axis=-1)

        def u(z):
            _, _, P = parts(z)
            return c2 * P**2

        def grad(z):
            z, g, P = parts(z)
            out = np.empty_like(z)
            for k in range(z.shape[1]):
                out[:, k] = 2 * c2 * P * (1 - 2 * z[:, k]) * others(g, k)
            return out

        def lap(z):
            z, g, P = parts(z)
            total = np.zeros(z.shape[0])
            for k in range(z.shape[1]):
                rest = others(g, k)
                dP = (1 - 2 * z[:, k]) * rest
                total += 2 * c2 * (dP**2 - 2 * P * rest)
            return total

        return cls(u=u, grad=grad, laplacian=lap)


@dataclass(frozen=True)
class ProblemSpec:
    """``-div(eta grad u) = F`` on ``(0,1)^d`` with ``u = 0`` on the boundary.

    The right-hand side comes from ``forcing`` or, for synthetic studies, from
    a prescribed coefficient vector via ``c = B @ coefficients``.
    """

    eta: DiffusionCoefficient
    n: int
    d: int
    forcing: PointFn | None = None
    exact: ManufacturedSolution | None = None
    coefficients: np.ndarray | None = None

    def __post_init__(self):
        check_size(self.n, self.d)
        if self.eta.d != self.d:
            raise InvalidArgumentError(f"coefficient has dimension {self.eta.d}, problem {self.d}")
        if self.forcing is None and self.coefficients is None:
            raise InvalidArgumentError("need a forcing term or a coefficient vector")
        if self.coefficients is not None and np.shape(self.coefficients) != (self.n**self.d,):
            raise InvalidArgumentError("coefficient vector must have length n**d")

    @property
    def N(self) -> int:
        return self.n**self.d

    def check_consistency(self, samples: int = 20, seed: int = 0, tol: float = 1e-4) -> float:
        """Spot-check ``forcing`` against a finite-difference divergence of ``exact``.

        Returns the largest error relative to ``max |F|`` over the samples and
        raises :class:`ValueError` if it exceeds ``tol``.
        """
        if self.forcing is None or self.exact is None:
            raise InvalidArgumentError("consistency check needs both forcing and exact solution")
        rng = np.random.default_rng(seed)
        z = rng.uniform(0.05, 0.95, size=(samples, self.d))
        F = self.forcing(z)
        ref = fd_divergence_form(self.eta.eval, self.exact.u, z)
        err = float(np.max(np.abs(F - ref)) / max(np.max(np.abs(F)), 1e-300))
        if err > tol:
            raise ValueError(f"forcing inconsistent with exact solution (rel. error {err:.2e})")
        return err


def bubble_problem(n: int = 32, d: int = 2, weights=None) -> ProblemSpec:
    """Affine coefficient ``1 + w.z`` (default ``w = 1/4``) with the bubble solution."""
    w = np.full(d, 0.25) if weights is None else np.asarray(weights, dtype=float)
    eta = DiffusionCoefficient.affine(w)
    exact = ManufacturedSolution.bubble(d)
    forcing = forcing_from_manufactured(exact.u, exact.grad, exact.laplacian, eta)
    return ProblemSpec(eta=eta, n=n, d=d, forcing=forcing, exact=exact)


def fd_divergence_form(eta: PointFn, u: PointFn, z, h: float = 1e-3) -> np.ndarray:
    """Second-order finite-difference approximation of ``-div(eta grad u)``.

    Uses only point values of ``eta`` and ``u`` (flux differences at half
    steps), so it can serve as an independent check of analytic derivatives.
    """
    z = np.atleast_2d(np.asarray(z, dtype=float))
    out = np.zeros(z.shape[0])
    for k in range(z.shape[1]):
        e = np.zeros(z.shape[1])
        e[k] = h
        flux_plus = eta(z + e / 2) * (u(z + e) - u(z))
        flux_minus = eta(z - e / 2) * (u(z) - u(z - e))
        out -= (flux_plus - flux_minus) / h**2
    return out


class SpectralExpansion:
    """The function ``sum_j x_j psi_j`` for a coefficient vector ``x``."""

    chunk = 2048

    def __init__(self, coefficients, n: int, d: int):
        if isinstance(coefficients, SparseSolution):
            coefficients = coefficients.to_dense()
        self.x = np.asarray(coefficients, dtype=float)
        if self.x.shape != (n**d,):
            raise InvalidArgumentError(f"expected {n**d} coefficients, got {self.x.shape}")
        self.n, self.d = n, d
        self._nz = np.flatnonzero(self.x)
        self._j = basis.multi_indices(n, d)

    def _apply(self, z, key: str) -> np.ndarray:
        z = np.atleast_2d(np.asarray(z, dtype=float))
        if self._nz.size == 0:
            return np.zeros(z.shape[0])
        if self._nz.size <= self.x.size // 8:
            # few active modes: evaluate them one at a time
            ev = basis.eval_psi if key == "psi" else basis.eval_laplacian_psi
            return sum(self.x[i] * np.atleast_1d(ev(self._j[i], z, self.n)) for i in self._nz)
        out = np.empty(z.shape[0])
        for start in range(0, z.shape[0], self.chunk):
            pts = z[start:start + self.chunk]
            vals = basis.evaluate_basis(pts, self.n, laplacian=key == "laplacian")
            out[start:start + self.chunk] = vals[key] @ self.x
        return out

    def __call__(self, z) -> np.ndarray:
        return self._apply(z, "psi")

    def on_tensor_grid(self, x1d, laplacian: bool = False) -> np.ndarray:
        """Values on the tensor grid ``x1d^d``, raveled in ``ij`` order.

        Contracts one axis at a time with a 1D sine table, which is far cheaper
        than evaluating every basis function at every grid point.
        """
        n, d = self.n, self.d
        norm2 = (self._j**2).sum(axis=1)
        amp = (2.0 / (n + 1)) ** (d / 2)
        w = -amp if laplacian else amp / (np.pi**2 * norm2)
        coef = (self.x * w).reshape((n,) * d)
        table = np.sin(np.pi * np.outer(np.asarray(x1d, dtype=float), np.arange(1, n + 1)))
        vals = coef
        for _ in range(d):
            # contract the leading coefficient axis, append the grid axis last
            vals = np.tensordot(vals, table, axes=([0], [1]))
        return vals.ravel()

    def laplacian(self, z) -> np.ndarray:
        return self._apply(z, "laplacian")


def evaluate_solution(coefficients, z, n: int):
    """Evaluate ``sum_j x_j psi_j`` at a point ``(d,)`` or batch ``(P, d)``."""
    z = np.asarray(z, dtype=float)
    d = z.shape[-1]
    vals = SpectralExpansion(coefficients, n, d)(z)
    return float(vals[0]) if z.ndim == 1 else vals


@dataclass
class SolveReport:
    """Coefficients plus the assembly/recovery cost split of one solve."""

    method: str
    n: int
    d: int
    coefficients: np.ndarray
    assembly_seconds: float
    recovery_seconds: float
    sparse: SparseSolution | None = None
    seed: int | None = None
    m: int | None = None
    K: int | None = None
    s: int | None = None
    condition: float | None = None
    extras: dict = field(default_factory=dict)

    def expansion(self) -> SpectralExpansion:
        return SpectralExpansion(self.coefficients, self.n, self.d)

    def to_dict(self, include_coefficients: bool = False) -> dict:
        out = {
            "method": self.method,
            "n": self.n,
            "d": self.d,
            "assembly_seconds": self.assembly_seconds,
            "recovery_seconds": self.recovery_seconds,
            "seed": self.seed,
            "m": self.m,
            "K": self.K,
            "s": self.s,
            "condition": self.condition,
        }
        if self.sparse is not None:
            out["support"] = [int(i) for i in self.sparse.support]
            out["iterations_run"] = self.sparse.iterations_run
        out.update(self.extras)
        if include_coefficients:
            out["coefficients"] = self.coefficients.tolist()
        return out

    def to_json(self, include_coefficients: bool = False, **kwargs) -> str:
        return json.dumps(self.to_dict(include_coefficients), **kwargs)


def _direct_solve(B: np.ndarray, c: np.ndarray, max_condition: float):
    with warnings.catch_warnings():
        # singularity is reported through the condition estimate below
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(B, check_finite=False)
    anorm = np.linalg.norm(B, 1)
    rcond, info = dgecon(lu, anorm, norm="1")
    cond = np.inf if rcond == 0 else 1.0 / rcond
    if info != 0 or not np.isfinite(cond) or cond > max_condition:
        raise NumericalError(f"collocation matrix is ill-conditioned (1-norm condition ~ {cond:.3e})")
    return lu_solve((lu, piv), c, check_finite=False), float(cond)


def solve_full(problem: ProblemSpec, method: str = "direct", K: int | None = None,
               max_condition: float = MAX_CONDITION) -> SolveReport:
    """Solve the full ``N x N`` collocation system.

    ``method="direct"`` runs an LU solve (with a 1-norm condition estimate);
    ``method="omp"`` runs ``K`` OMP iterations on the column-normalized ``B``.
    """
    if method not in ("direct", "omp"):
        raise InvalidArgumentError(f"unknown full-solve method {method!r}")
    t0 = time.perf_counter()
    system = assemble_full(problem.eta, problem.forcing, problem.n, problem.d)
    c = system.B @ problem.coefficients if problem.coefficients is not None else system.c
    t1 = time.perf_counter()
    if method == "direct":
        x, cond = _direct_solve(system.B, c, max_condition)
        sparse = None
    else:
        if K is None:
            raise InvalidArgumentError("OMP recovery of the full system needs K")
        M, eligible = column_norms(system.B)
        sparse = omp(system.B / M, c, K, eligible=eligible)
        x = sparse.to_dense() / M
        cond = None
    t2 = time.perf_counter()
    return SolveReport(method=f"full-{method}", n=problem.n, d=problem.d, coefficients=x,
                       assembly_seconds=t1 - t0, recovery_seconds=t2 - t1, sparse=sparse,
                       K=K, condition=cond)


def solve_compressive(problem: ProblemSpec, s: int | None = None, m: int | None = None,
                      K: int | None = None, seed: int = 0, draw=None) -> SolveReport:
    """Compressive collocation: random rows, column normalization, OMP, rescaling.

    Either ``s`` (giving the default ``m`` and ``K``) or explicit ``m`` and
    ``K`` must be supplied. An explicit ``draw`` overrides the random one.
    """
    if s is not None:
        m_def, K_def = default_m_K(s, problem.N)
        m = m_def if m is None else m
        K = K_def if K is None else K
    if K is None or (m is None and draw is None):
        raise InvalidArgumentError("need s, or both m and K")
    if K < 1:
        raise InvalidArgumentError(f"K must be >= 1, got {K}")

    t0 = time.perf_counter()
    if draw is None:
        draw = draw_indices(m, problem.n, problem.d, seed)
    system = build_compressive(problem.eta, problem.forcing, problem.n, problem.d, draw)
    if problem.coefficients is not None:
        system.b = system.A @ problem.coefficients
    t1 = time.perf_counter()
    sparse = omp(system.normalized, system.b, K, eligible=system.eligible)
    # OMP works on A M^{-1}; dividing by M maps back to coefficients of A
    x = sparse.to_dense() / system.M
    t2 = time.perf_counter()
    return SolveReport(method="compressive", n=problem.n, d=problem.d, coefficients=x,
                       assembly_seconds=t1 - t0, recovery_seconds=t2 - t1, sparse=sparse,
                       seed=draw.seed, m=draw.m, K=K, s=s,
                       extras={"tau": draw.tau.tolist()})


def relative_l2_coeff_error(x_hat, x_ref) -> float:
    """``|x_hat - x_ref|_2 / |x_ref|_2``."""
    x_hat = np.asarray(x_hat, dtype=float)
    x_ref = np.asarray(x_ref, dtype=float)
    if x_hat.shape != x_ref.shape:
        raise InvalidArgumentError(f"shape mismatch {x_hat.shape} vs {x_ref.shape}")
    ref = np.linalg.norm(x_ref)
    if ref == 0:
        raise ZeroDivisionError("reference vector has zero norm")
    return float(np.linalg.norm(x_hat - x_ref) / ref)


def gauss_legendre_1d(cells: int = 64, nodes: int = 5):
    """Composite Gauss-Legendre nodes and weights on ``[0, 1]``."""
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    left = np.arange(cells) / cells
    x1 = (left[:, None] + (xg[None, :] + 1) / (2 * cells)).ravel()
    w1 = np.tile(wg / (2 * cells), cells)
    return x1, w1


def gauss_legendre_grid(d: int, cells: int = 64, nodes: int = 5):
    """Composite tensor-product Gauss-Legendre rule on ``[0,1]^d``.

    Returns points ``(P, d)`` and weights ``(P,)`` for ``cells^d`` uniform
    cells with ``nodes`` points per direction in each, in ``ij`` order.
    """
    x1, w1 = gauss_legendre_1d(cells, nodes)
    axes = np.meshgrid(*([x1] * d), indexing="ij")
    waxes = np.meshgrid(*([w1] * d), indexing="ij")
    pts = np.stack([a.ravel() for a in axes], axis=-1)
    wts = np.prod(np.stack([w.ravel() for w in waxes], axis=-1), axis=-1)
    return pts, wts


def relative_L2_function_error(u_hat: Callable, u_exact: Callable, d: int,
                               cells: int | None = None, nodes: int = 5) -> float:
    """Relative ``L^2((0,1)^d)`` error by composite Gauss-Legendre quadrature.

    Defaults to 64 cells per direction for ``d <= 2`` and 16 for ``d = 3``.
    """
    if cells is None:
        cells = 64 if d <= 2 else 16
    pts, wts = gauss_legendre_grid(d, cells, nodes)
    ue = np.asarray(u_exact(pts), dtype=float)
    den = np.sqrt(np.sum(wts * ue**2))
    if den == 0:
        raise ZeroDivisionError("exact solution has zero L2 norm")
    if isinstance(u_hat, SpectralExpansion):
        uh = u_hat.on_tensor_grid(gauss_legendre_1d(cells, nodes)[0])
    else:
        uh = np.asarray(u_hat(pts), dtype=float)
    diff = uh - ue
    return float(np.sqrt(np.sum(wts * diff**2)) / den)
