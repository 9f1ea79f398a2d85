"""Brute-force restricted isometry constants for small matrices."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .assembly import DiffusionCoefficient, spectral_bounds
from .errors import InvalidArgumentError, ResourceLimitError
from .sampling import build_compressive, draw_indices

__all__ = ["RipReport", "RipTrendReport", "rip_constant", "verify_rip_theorem"]

MAX_SUPPORTS = 200_000
_BATCH = 4096


@dataclass(frozen=True)
class RipReport:
    s: int
    delta: float
    worst_support: tuple[int, ...]
    enumerated_supports: int

    @property
    def is_rip(self) -> bool:
        """The formal definition only admits constants below one."""
        return self.delta < 1.0


def rip_constant(A, s: int, max_supports: int = MAX_SUPPORTS) -> RipReport:
    """Exact ``delta_s(A)`` by enumerating all supports of size ``s``.

    By eigenvalue interlacing, Gram matrices of smaller supports cannot have
    a larger deviation from the identity, so only ``|S| = s`` is scanned.
    Ties in the maximum keep the lexicographically smallest support. The
    deviation is reported even when it is ``>= 1``.
    """
    A = np.asarray(A, dtype=float)
    N = A.shape[1]
    if not 0 <= s <= N:
        raise InvalidArgumentError(f"need 0 <= s <= N={N}, got s={s}")
    if s == 0:
        return RipReport(s=0, delta=0.0, worst_support=(), enumerated_supports=0)
    total = math.comb(N, s)
    if total > max_supports:
        raise ResourceLimitError(
            f"C({N}, {s}) = {total} supports exceeds the cap {max_supports}; use a smaller N or s")

    G = A.T @ A
    best, worst = -np.inf, ()
    combos = itertools.combinations(range(N), s)
    while True:
        chunk = np.array(list(itertools.islice(combos, _BATCH)), dtype=np.intp)
        if chunk.size == 0:
            break
        grams = G[chunk[:, :, None], chunk[:, None, :]]
        eig = np.linalg.eigvalsh(grams)
        dev = np.maximum(eig[:, -1] - 1.0, 1.0 - eig[:, 0])
        i = int(np.argmax(dev))
        if dev[i] > best:
            best, worst = float(dev[i]), tuple(int(v) for v in chunk[i])
    return RipReport(s=s, delta=max(best, 0.0), worst_support=worst, enumerated_supports=total)


@dataclass(frozen=True)
class RipTrendReport:
    m: int
    success_rate: float
    deltas: np.ndarray
    R: float


def verify_rip_theorem(eta: DiffusionCoefficient, n: int, d: int, s: int, delta_target: float,
                       trials: int, seed: int, m: int) -> RipTrendReport:
    """Fraction of random draws for which ``delta_s(A / sqrt(R)) <= delta_target``.

    Trial ``t`` uses seed ``seed + t``. This is an empirical check; comparing
    rates across ``m`` exposes the trend, not the unknown constants.
    """
    if trials < 1:
        raise InvalidArgumentError("trials must be >= 1")
    R = spectral_bounds(eta, d).R
    deltas = np.empty(trials)
    for t in range(trials):
        draw = draw_indices(m, n, d, seed + t)
        A = build_compressive(eta, None, n, d, draw).A
        deltas[t] = rip_constant(A / math.sqrt(R), s).delta
    return RipTrendReport(m=m, success_rate=float(np.mean(deltas <= delta_target)),
                          deltas=deltas, R=R)
