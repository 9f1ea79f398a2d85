import math

import numpy as np
import pytest

from cscolloc.assembly import DiffusionCoefficient, assemble_full, spectral_bounds
from cscolloc.errors import ResourceLimitError
from cscolloc.rip import rip_constant, verify_rip_theorem
from cscolloc.sampling import SampleDraw, build_compressive


def normalized_gaussian(m, N, seed):
    A = np.random.default_rng(seed).standard_normal((m, N))
    return A / np.linalg.norm(A, axis=0)


def sparse_rayleigh(A, s, count, seed):
    """Rayleigh quotients |Av|^2/|v|^2 of random vectors with at most s nonzeros."""
    rng = np.random.default_rng(seed)
    N = A.shape[1]
    V = np.zeros((count, N))
    for i in range(count):
        k = rng.integers(1, s + 1)
        V[i, rng.choice(N, k, replace=False)] = rng.standard_normal(k)
    return np.sum((V @ A.T) ** 2, axis=1) / np.sum(V**2, axis=1)


def test_identity_has_zero_constant():
    for s in range(1, 6):
        assert rip_constant(np.eye(5), s).delta == pytest.approx(0, abs=1e-15)


def test_diagonal_example():
    A = np.diag([1.0, math.sqrt(0.5)])
    assert rip_constant(A, 1).delta == pytest.approx(0.5)
    assert rip_constant(A, 2).delta == pytest.approx(0.5)


def test_gaussian_pairs_against_sampled_lower_bound():
    A = normalized_gaussian(6, 10, seed=0)
    rep = rip_constant(A, 2)
    assert rep.enumerated_supports == 45
    # every pair has Gram eigenvalues 1 +- |<a_i, a_j>|
    G = A.T @ A
    assert rep.delta == pytest.approx(np.max(np.abs(G - np.eye(10))), abs=1e-12)
    q = sparse_rayleigh(A, 2, 100_000, seed=1)
    lower = max(q.max() - 1, 1 - q.min())
    assert lower <= rep.delta + 1e-9


def test_worst_support_is_reported():
    A = normalized_gaussian(6, 10, seed=0)
    rep = rip_constant(A, 2)
    sub = A[:, list(rep.worst_support)]
    eig = np.linalg.eigvalsh(sub.T @ sub)
    assert max(eig[-1] - 1, 1 - eig[0]) == pytest.approx(rep.delta)


def test_cap_exceeded():
    with pytest.raises(ResourceLimitError):
        rip_constant(np.eye(40), 10)


@pytest.mark.parametrize("seed", range(5))
def test_monotone_in_s(seed):
    A = normalized_gaussian(6, 10, seed)
    deltas = [rip_constant(A, s).delta for s in range(0, 6)]
    assert all(a <= b + 1e-15 for a, b in zip(deltas, deltas[1:]))
    assert deltas[1] < 1e-12


def test_all_rows_poisson_is_isometry():
    n, d = 3, 2
    draw = SampleDraw.from_rows(np.arange(9), n, d)
    A = build_compressive(DiffusionCoefficient.constant(2), None, n, d, draw).A
    for s in range(1, 4):
        assert rip_constant(A, s).delta < 1e-12


def test_success_rate_grows_with_m():
    eta = DiffusionCoefficient.constant(2)
    low = verify_rip_theorem(eta, 3, 2, s=2, delta_target=0.5, trials=500, seed=0, m=2)
    high = verify_rip_theorem(eta, 3, 2, s=2, delta_target=0.5, trials=500, seed=0, m=8)
    sigma = math.sqrt(sum(p * (1 - p) / 500 for p in (low.success_rate, high.success_rate)))
    assert high.success_rate >= low.success_rate - 2 * sigma
    assert high.success_rate > low.success_rate


def test_normalized_gram_spectrum_within_bounds():
    eta = DiffusionCoefficient.affine([0.25, 0.25])
    b = spectral_bounds(eta, 2)
    assert b.r / b.R == pytest.approx(0.18982, abs=1e-5)
    B = assemble_full(eta, None, 3, 2).B
    eig = np.linalg.eigvalsh(B.T @ B / b.R)
    assert eig[0] >= b.r / b.R - 1e-12 and eig[-1] <= 1 + 1e-12
