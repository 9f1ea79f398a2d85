"""Matrix-property checks run by ``cscolloc verify``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import basis
from .assembly import (
    DiffusionCoefficient,
    assemble_full,
    assemble_structured,
    coherence_bound,
    spectral_bounds,
)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def transform_checks(max_n: int = 64) -> list[Check]:
    worst_s = worst_c = 0.0
    for n in range(1, max_n + 1):
        S, C, Q = basis.sine_matrix(n), basis.cosine_matrix(n), basis.checkerboard(n)
        eye = np.eye(n)
        worst_s = max(worst_s, np.abs(S.T @ S - eye).max())
        worst_c = max(worst_c, np.abs(C.T @ C - (eye - 2.0 / (n + 1) * Q)).max())
    return [
        Check(f"S^T S = I (n<={max_n})", worst_s < 1e-12, f"max dev {worst_s:.2e}"),
        Check(f"C^T C = I - 2Q/(n+1) (n<={max_n})", worst_c < 1e-12, f"max dev {worst_c:.2e}"),
    ]


def poisson_checks(orders=(4, 8, 16), d: int = 2) -> list[Check]:
    eta = DiffusionCoefficient.constant(d)
    out = []
    for n in orders:
        B = assemble_full(eta, None, n, d).B
        kron = np.abs(B - basis.kron_power(basis.sine_matrix(n), d)).max()
        orth = np.abs(B.T @ B - np.eye(n**d)).max()
        out.append(Check(f"Poisson B = S⊗S, n={n}", kron < 1e-12, f"max dev {kron:.2e}"))
        out.append(Check(f"Poisson B^T B = I, n={n}", orth < 1e-10, f"max dev {orth:.2e}"))
    return out


def coefficient_checks(weights=(0.25, 0.25), orders=(4, 8, 16)) -> list[Check]:
    eta = DiffusionCoefficient.affine(weights)
    d = len(weights)
    bounds = spectral_bounds(eta, d)
    out = [Check("admissibility", bounds.admissible, f"r={bounds.r:.6f}, R={bounds.R:.6f}")]
    for n in orders:
        system = assemble_full(eta, None, n, d)
        eig = np.linalg.eigvalsh(system.B.T @ system.B)
        inside = eig[0] >= bounds.r - 1e-8 and eig[-1] <= bounds.R + 1e-8
        out.append(Check(f"spectrum in [r, R], n={n}", bool(inside),
                         f"lambda in [{eig[0]:.6f}, {eig[-1]:.6f}]"))
        _, holds = coherence_bound(system, bounds)
        ratio = np.max(system.B**2) / (2**d * bounds.R / n**d)
        out.append(Check(f"coherence <= 2^d R/N, n={n}", holds, f"max ratio {ratio:.4f}"))
        if n <= 8:
            dev = np.abs(assemble_structured(eta, n, d) - system.B).max()
            out.append(Check(f"structured = direct assembly, n={n}", dev < 1e-10,
                             f"max dev {dev:.2e}"))
    return out


def run_all(weights=(0.25, 0.25)) -> list[Check]:
    return transform_checks() + poisson_checks(d=len(weights)) + coefficient_checks(weights)
