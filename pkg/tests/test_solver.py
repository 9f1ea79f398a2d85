import json
import math

import numpy as np
import pytest

from cscolloc import basis
from cscolloc.assembly import DiffusionCoefficient, assemble_full, forcing_from_manufactured
from cscolloc.errors import InvalidArgumentError, NumericalError
from cscolloc.omp import SparseSolution
from cscolloc.sampling import SampleDraw
from cscolloc.solver import (
    ManufacturedSolution,
    ProblemSpec,
    SpectralExpansion,
    evaluate_solution,
    gauss_legendre_grid,
    bubble_problem,
    relative_l2_coeff_error,
    relative_L2_function_error,
    solve_compressive,
    solve_full,
)

POISSON = DiffusionCoefficient.constant(2)


def single_mode_problem(n):
    # u = xi_(1,1), so F = -lap xi = 2 sin(pi z1) sin(pi z2)
    def forcing(z):
        return 2 * np.sin(np.pi * z[:, 0]) * np.sin(np.pi * z[:, 1])
    return ProblemSpec(eta=POISSON, n=n, d=2, forcing=forcing)


def test_full_single_mode():
    n = 4
    rep = solve_full(single_mode_problem(n))
    expected = np.zeros(n * n)
    expected[basis.lex_rank((1, 1), n) - 1] = (n + 1) ** (2 / 2)
    np.testing.assert_allclose(rep.coefficients, expected, atol=1e-10)
    assert rep.assembly_seconds >= 0 and rep.recovery_seconds >= 0


def test_full_poisson_solution_is_transpose_product():
    n = 6
    rng = np.random.default_rng(0)
    coeffs = rng.standard_normal(3)

    def forcing(z):
        return coeffs[0] + coeffs[1] * z[:, 0] + coeffs[2] * np.cos(z[:, 1])
    prob = ProblemSpec(eta=POISSON, n=n, d=2, forcing=forcing)
    sys = assemble_full(POISSON, forcing, n, 2)
    np.testing.assert_allclose(solve_full(prob).coefficients, sys.B.T @ sys.c, atol=1e-10)


def test_full_solver_rejects_ill_conditioned():
    # a vanishing coefficient at interior nodes makes B singular-ish
    def zero(z):
        return np.zeros(len(np.atleast_2d(z)))
    eta = DiffusionCoefficient(eval=zero, grad=lambda z: np.zeros_like(np.atleast_2d(z)),
                               eta_min=1.0, sup_eta=1.0, sup_grad=np.zeros(2))
    with pytest.raises(NumericalError):
        solve_full(ProblemSpec(eta=eta, n=3, d=2, forcing=zero))


def test_full_bubble_problem_error():
    prob = bubble_problem(32)
    rep = solve_full(prob)
    err = relative_L2_function_error(rep.expansion(), prob.exact.u, 2)
    assert 3.0e-3 <= err <= 5.0e-3


def test_compressive_with_all_rows_matches_full():
    n = 4
    prob = bubble_problem(n)
    draw = SampleDraw.from_rows(np.arange(n * n), n, 2)
    comp = solve_compressive(prob, K=n * n, draw=draw)
    full = solve_full(prob)
    np.testing.assert_allclose(comp.coefficients, full.coefficients, atol=1e-8)


def test_compressive_recovers_sparse_vector_at_n32():
    n, s = 32, 2
    rng = np.random.default_rng(42)
    x = np.zeros(n * n)
    x[rng.choice(n * n, s, replace=False)] = rng.standard_normal(s)
    prob = ProblemSpec(eta=DiffusionCoefficient.affine([0.25, 0.25]), n=n, d=2, coefficients=x)
    rep = solve_compressive(prob, s=s, seed=3)
    assert (rep.m, rep.K) == (28, 2)
    assert relative_l2_coeff_error(rep.coefficients, x) < 1e-10


def test_compressive_zero_rhs():
    prob = ProblemSpec(eta=POISSON, n=4, d=2, coefficients=np.zeros(16))
    rep = solve_compressive(prob, s=2, seed=0)
    assert rep.sparse.iterations_run == 0 and not rep.coefficients.any()


def test_compressive_is_deterministic_per_seed():
    prob = bubble_problem(8)
    a = solve_compressive(prob, s=4, seed=5)
    b = solve_compressive(prob, s=4, seed=5)
    assert a.coefficients.tobytes() == b.coefficients.tobytes()
    assert a.extras["tau"] == b.extras["tau"]


def test_compressive_needs_sizes():
    with pytest.raises(InvalidArgumentError):
        solve_compressive(bubble_problem(4), K=2)


@pytest.mark.parametrize("n", [4, 8])
def test_full_solution_solves_compressive_system(n):
    prob = bubble_problem(n)
    x_full = solve_full(prob).coefficients
    from cscolloc.sampling import build_compressive, draw_indices
    sysc = build_compressive(prob.eta, prob.forcing, n, 2, draw_indices(3 * n, n, 2, seed=1))
    assert np.linalg.norm(sysc.A @ x_full - sysc.b) < 1e-8


def test_evaluate_solution_examples():
    n = 3
    rng = np.random.default_rng(0)
    z = rng.uniform(size=(10, 2))
    assert not evaluate_solution(np.zeros(9), z, n).any()
    e = np.zeros(9)
    e[4] = 1.0
    np.testing.assert_allclose(evaluate_solution(e, z, n), basis.eval_psi((2, 2), z, n))
    x = rng.standard_normal(9)
    for zb in ([0.0, 0.3], [0.7, 1.0], [1.0, 0.0]):
        assert evaluate_solution(x, zb, n) == pytest.approx(0.0, abs=1e-15)


def test_spectral_expansion_paths_agree():
    n, d = 5, 2
    rng = np.random.default_rng(1)
    dense = rng.standard_normal(n**d)
    sparse = np.zeros(n**d)
    sparse[[3, 11]] = [1.5, -0.5]
    pts, _ = gauss_legendre_grid(d, cells=3, nodes=2)
    x1 = np.unique(pts[:, 0])
    for x in (dense, sparse):
        ex = SpectralExpansion(x, n, d)
        ref = sum(x[i] * basis.eval_psi(j, pts, n) for i, j in enumerate(basis.multi_indices(n, d)))
        np.testing.assert_allclose(ex(pts), ref, atol=1e-14)
        np.testing.assert_allclose(ex.on_tensor_grid(x1), ref, atol=1e-14)
        lap = sum(x[i] * basis.eval_laplacian_psi(j, pts, n)
                  for i, j in enumerate(basis.multi_indices(n, d)))
        np.testing.assert_allclose(ex.laplacian(pts), lap, atol=1e-12)


def test_sparse_solution_expansion():
    sol = SparseSolution(support=[2], values=np.array([3.0]), N=4, iterations_run=1)
    np.testing.assert_allclose(SpectralExpansion(sol, 2, 2).x, [0, 0, 3, 0])


@pytest.mark.parametrize("x_hat, expected", [("same", 0.0), ("double", 1.0), ("zero", 1.0)])
def test_relative_coeff_error(x_hat, expected):
    x = np.array([1.0, -2.0, 0.5])
    xh = {"same": x, "double": 2 * x, "zero": np.zeros(3)}[x_hat]
    assert relative_l2_coeff_error(xh, x) == pytest.approx(expected)


def test_relative_coeff_error_zero_reference():
    with pytest.raises(ZeroDivisionError):
        relative_l2_coeff_error(np.ones(2), np.zeros(2))


def test_relative_function_error_trivial_cases():
    u = ManufacturedSolution.bubble(2).u
    assert relative_L2_function_error(u, u, 2) == 0.0
    assert relative_L2_function_error(lambda z: np.zeros(len(z)), u, 2) == pytest.approx(1.0)
    with pytest.raises(ZeroDivisionError):
        relative_L2_function_error(u, lambda z: np.zeros(len(z)), 2)


def test_relative_function_error_closed_form():
    # |xi_(1,1)|_L2 = 1/(2 pi^2) and |u|_L2 = 256 * B(5,5) = 256/630
    u = ManufacturedSolution.bubble(2).u

    def perturbed(z):
        return u(z) + basis.eval_xi((1, 1), z)
    expected = (1 / (2 * math.pi**2)) / (256 / 630)
    assert relative_L2_function_error(perturbed, u, 2) == pytest.approx(expected, rel=1e-10)


def test_bubble_derivatives_against_finite_differences():
    for d in (1, 2, 3):
        ex = ManufacturedSolution.bubble(d)
        z = np.random.default_rng(d).uniform(0.1, 0.9, size=(15, d))
        h = 1e-5
        for k in range(d):
            e = np.zeros(d)
            e[k] = h
            fd = (ex.u(z + e) - ex.u(z - e)) / (2 * h)
            np.testing.assert_allclose(ex.grad(z)[:, k], fd, atol=1e-6)
        eta = DiffusionCoefficient.constant(d)
        prob = ProblemSpec(eta=eta, n=4, d=d, exact=ex,
                           forcing=forcing_from_manufactured(ex.u, ex.grad, ex.laplacian, eta))
        assert prob.check_consistency() < 1e-4


def test_bubble_problem_consistency():
    assert bubble_problem(8).check_consistency() < 1e-4


def test_solve_report_json():
    rep = solve_compressive(bubble_problem(4), s=2, seed=9)
    data = json.loads(rep.to_json(include_coefficients=True))
    assert data["method"] == "compressive" and data["seed"] == 9
    assert data["m"] == rep.m and len(data["coefficients"]) == 16
    assert len(data["tau"]) == rep.m
    assert "coefficients" not in json.loads(rep.to_json())


@pytest.mark.parametrize("n, s, seed", [(4, 2, 0), (6, 3, 1), (8, 4, 2), (8, 8, 3)])
def test_laplacian_error_identity(n, s, seed):
    prob = bubble_problem(n)
    full = solve_full(prob).coefficients
    comp = solve_compressive(prob, s=s, seed=seed).coefficients
    diff = SpectralExpansion(full - comp, n, 2)
    pts, w = gauss_legendre_grid(2, cells=64, nodes=5)
    lhs = math.sqrt(np.sum(w * diff.laplacian(pts) ** 2))
    rhs = np.linalg.norm(full - comp) / (n + 1)
    assert lhs == pytest.approx(rhs, rel=1e-6)
