"""Randomized collocation rows and the scaled compressive system."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import basis
from .assembly import DiffusionCoefficient, PointFn, assemble_rows, check_size
from .errors import InvalidArgumentError

__all__ = [
    "make_rng",
    "SampleDraw",
    "CompressiveSystem",
    "draw_indices",
    "build_compressive",
    "default_m_K",
]


def make_rng(seed: int) -> np.random.Generator:
    """Seeded Philox (counter-based, 64-bit) generator used throughout."""
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(frozen=True)
class SampleDraw:
    """``m`` i.i.d. uniform multi-indices (repeats allowed).

    ``tau`` has shape ``(m, d)`` with entries in ``[1, n]``; ``rows`` gives the
    matching 0-based row numbers of the full matrix.
    """

    seed: int
    tau: np.ndarray
    n: int

    @property
    def m(self) -> int:
        return self.tau.shape[0]

    @property
    def d(self) -> int:
        return self.tau.shape[1]

    @property
    def rows(self) -> np.ndarray:
        r = np.zeros(self.m, dtype=np.int64)
        for k in range(self.d):
            r = r * self.n + (self.tau[:, k] - 1)
        return r

    @classmethod
    def from_rows(cls, rows, n: int, d: int, seed: int = -1) -> "SampleDraw":
        """Build a draw from explicit 0-based row numbers (e.g. every row once)."""
        rows = np.asarray(rows, dtype=np.int64)
        return cls(seed=seed, tau=basis.multi_indices(n, d)[rows], n=n)


@dataclass
class CompressiveSystem:
    """``A = sqrt(N/m) B[tau, :]``, ``b = sqrt(N/m) c[tau]`` and column norms ``M``.

    Columns with zero norm get ``M = 1`` and are marked ineligible so OMP
    never selects them.
    """

    A: np.ndarray
    b: np.ndarray
    M: np.ndarray
    eligible: np.ndarray
    draw: SampleDraw

    @property
    def normalized(self) -> np.ndarray:
        return self.A / self.M


def draw_indices(m: int, n: int, d: int, seed: int) -> SampleDraw:
    """Draw ``m`` multi-indices i.i.d. uniformly from ``[n]^d``."""
    if m < 1:
        raise InvalidArgumentError(f"m must be >= 1, got {m}")
    N = check_size(n, d, max_size=np.iinfo(np.int64).max)
    rows = make_rng(seed).integers(0, N, size=m)
    return SampleDraw.from_rows(rows, n, d, seed=seed)


ZERO_COLUMN_RTOL = 1e-12


def column_norms(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column 2-norms with (numerically) zero ones replaced by 1, plus eligibility.

    A column counts as zero when its norm is at most ``ZERO_COLUMN_RTOL``
    times the largest column norm; e.g. ``sin(pi)`` evaluates to ~1e-16.
    """
    M = np.linalg.norm(A, axis=0)
    eligible = M > ZERO_COLUMN_RTOL * (M.max() if M.size else 0.0)
    M = np.where(eligible, M, 1.0)
    return M, eligible


def build_compressive(eta: DiffusionCoefficient, forcing: PointFn | None, n: int, d: int,
                      draw: SampleDraw) -> CompressiveSystem:
    """Assemble only the sampled rows, scale them and compute column norms.

    With ``forcing=None`` the measurement vector is left at zero.
    """
    if draw.n != n or draw.d != d:
        raise InvalidArgumentError(f"draw is for (n={draw.n}, d={draw.d}), not (n={n}, d={d})")
    N = check_size(n, d)
    scale = math.sqrt(N / draw.m)
    pts = draw.tau / (n + 1)
    A = scale * assemble_rows(eta, pts, n)
    b = np.zeros(draw.m) if forcing is None else scale * np.asarray(forcing(pts), dtype=float)
    M, eligible = column_norms(A)
    return CompressiveSystem(A=A, b=b, M=M, eligible=eligible, draw=draw)


def default_m_K(s: int, N: int) -> tuple[int, int]:
    """``m = ceil(2 s ln N)`` collocation points and ``K = s`` OMP iterations."""
    if not 1 <= s <= N:
        raise InvalidArgumentError(f"need 1 <= s <= N, got s={s}, N={N}")
    # N = 1 would give m = 0
    return max(1, math.ceil(2 * s * math.log(N))), s
