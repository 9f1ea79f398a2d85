"""Compressive spectral collocation for the diffusion equation on the unit cube.

The sine eigenbasis of the Dirichlet Laplacian is collocated at randomly
drawn grid nodes and the coefficients are recovered with Orthogonal Matching
Pursuit. Submodules:

``basis``        multi-indices, grid, basis functions, 1D transform matrices
``assembly``     full collocation matrix, spectral and coherence bounds
``sampling``     random row draws and the scaled compressive system
``omp``          Orthogonal Matching Pursuit, least squares, best s-term error
``solver``       full/compressive solvers, evaluation, error norms
``rip``          brute-force restricted isometry constants
``experiments``  trial harness behind the command-line interface
"""
from .assembly import (
    CollocationSystem,
    DiffusionCoefficient,
    SpectralBounds,
    assemble_full,
    assemble_structured,
    coherence_bound,
    forcing_from_manufactured,
    spectral_bounds,
)
from .basis import (
    checkerboard,
    cosine_matrix,
    eval_grad_psi,
    eval_laplacian_psi,
    eval_psi,
    eval_xi,
    grid_point,
    lex_rank,
    sine_matrix,
)
from .errors import (
    CollocationError,
    ConfigError,
    InvalidArgumentError,
    InvalidIndexError,
    NumericalError,
    ResourceLimitError,
)
from .omp import SparseSolution, best_s_term_error, least_squares, omp
from .rip import RipReport, rip_constant, verify_rip_theorem
from .sampling import (
    CompressiveSystem,
    SampleDraw,
    build_compressive,
    default_m_K,
    draw_indices,
)
from .solver import (
    ManufacturedSolution,
    ProblemSpec,
    SolveReport,
    bubble_problem,
    evaluate_solution,
    relative_l2_coeff_error,
    relative_L2_function_error,
    solve_compressive,
    solve_full,
)

__version__ = "0.1.0"
