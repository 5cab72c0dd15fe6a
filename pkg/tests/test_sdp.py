import numpy as np
import pytest
from numpy.testing import assert_allclose

from entanglement_compass.hermitian import DimensionError, InvariantError, random_hermitian
from entanglement_compass.sdp import (
    HermitianBasis,
    InteriorPointSolver,
    LMIBlock,
    SDPProblem,
    SolverSettings,
    SolverStatus,
    affine_problem,
    check_solution,
    compile_lmi,
    solve,
)


def _random_feasible_problem(rng, num_vars, block_sizes):
    """A problem with a known strictly feasible point and a bounded objective.

    F_0 = S_0 - sum_i x_i F_i makes F(x_interior) = S_0 positive definite, and
    c_i = Tr(F_i Z_0) with Z_0 positive definite keeps the dual strictly feasible.
    """
    x_interior = rng.standard_normal(num_vars)
    objective = np.zeros(num_vars)
    blocks = []
    for n in block_sizes:
        coefficients = np.stack([random_hermitian(rng, n) / np.sqrt(n) for _ in range(num_vars)])
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        s0 = g @ g.conj().T / n + np.eye(n)
        h = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        z0 = h @ h.conj().T / n + np.eye(n)
        constant = s0 - np.tensordot(x_interior, coefficients, axes=1)
        constant = (constant + constant.conj().T) / 2
        objective += np.real(np.einsum("kij,ji->k", coefficients, z0))
        blocks.append(LMIBlock(constant, coefficients))
    return SDPProblem(objective, tuple(blocks))


class TestHermitianBasis:
    """Real coordinates of Hermitian matrix variables"""

    def test_coordinates_reproduce_matrix(self, rng):
        basis = HermitianBasis(4)
        h = random_hermitian(rng, 4)
        assert basis.size == 16
        assert_allclose(basis.to_matrix(basis.from_matrix(h)), h, atol=1e-15)

    def test_basis_matrices_are_hermitian(self):
        matrices = HermitianBasis(3).matrices
        assert matrices.shape == (9, 3, 3)
        assert_allclose(matrices, matrices.conj().transpose(0, 2, 1))

    def test_pairing_and_trace_row(self, rng):
        basis = HermitianBasis(3)
        w, rho = random_hermitian(rng, 3), random_hermitian(rng, 3)
        x = basis.from_matrix(w)
        assert basis.pairing(rho) @ x == pytest.approx(np.trace(w @ rho).real, abs=1e-12)
        assert basis.trace_row() @ x == pytest.approx(np.trace(w).real, abs=1e-12)

    def test_wrong_coordinate_count(self):
        with pytest.raises(DimensionError):
            HermitianBasis(2).to_matrix(np.zeros(3))

    def test_compile_lmi_matches_map(self, rng):
        basis = HermitianBasis(2)
        lmi = compile_lmi(lambda w: np.kron(w, np.eye(2)) + np.eye(4), basis)
        x = rng.standard_normal(basis.size)
        assert_allclose(lmi.value(x), np.kron(basis.to_matrix(x), np.eye(2)) + np.eye(4), atol=1e-14)


class TestProblemValidation:
    """Shape and Hermiticity checks on problem data"""

    def test_non_hermitian_block(self):
        with pytest.raises(InvariantError, match="not Hermitian"):
            SDPProblem(np.ones(1), (LMIBlock(np.array([[0.0, 1.0], [0.0, 0.0]]), np.zeros((1, 2, 2))),))

    def test_coefficient_count_mismatch(self):
        with pytest.raises(DimensionError):
            SDPProblem(np.ones(2), (LMIBlock(np.eye(2), np.zeros((1, 2, 2))),))

    def test_equality_length_mismatch(self):
        with pytest.raises(DimensionError):
            affine_problem([1.0, 0.0], [(np.eye(1), [np.eye(1), np.eye(1)])], equalities=[([1.0], 1.0)])

    def test_settings_validation(self):
        with pytest.raises(ValueError):
            SolverSettings(gap_tol=0.0)
        with pytest.raises(ValueError):
            SolverSettings(max_iterations=0)

    def test_problem_accessors(self):
        p = affine_problem([1.0, 2.0], [(np.eye(2), [np.eye(2), np.zeros((2, 2))])], equalities=[([0.0, 1.0], 3.0)])
        assert p.num_vars == 2
        assert p.block_dims == [2]
        row, rhs = p.equalities[0]
        assert_allclose(row, [0.0, 1.0])
        assert rhs == 3.0


class TestSmallPrograms:
    """Programs whose optimum is known in closed form"""

    def test_scalar_lower_bound(self):
        # minimize x subject to x - 1 >= 0
        p = affine_problem([1.0], [(np.array([[-1.0]]), [np.array([[1.0]])])])
        solution = solve(p)
        assert solution.status is SolverStatus.OPTIMAL
        assert solution.objective == pytest.approx(1.0, abs=1e-6)

    def test_two_by_two_with_equality(self):
        # minimize x1 subject to [[x1, 1], [1, x2]] >= 0 and x2 = 1, optimum x1 = 1
        f1 = np.array([[1.0, 0.0], [0.0, 0.0]])
        f2 = np.array([[0.0, 0.0], [0.0, 1.0]])
        f0 = np.array([[0.0, 1.0], [1.0, 0.0]])
        p = affine_problem([1.0, 0.0], [(f0, [f1, f2])], equalities=[([0.0, 1.0], 1.0)])
        solution = solve(p)
        assert solution.is_optimal
        assert_allclose(solution.x, [1.0, 1.0], atol=1e-5)
        assert solution.equality_residual <= 1e-8

    def test_complex_block(self):
        # minimize x subject to [[x, i], [-i, x]] >= 0, optimum x = 1
        f0 = np.array([[0.0, 1j], [-1j, 0.0]])
        p = affine_problem([1.0], [(f0, [np.eye(2)])])
        solution = solve(p)
        assert solution.is_optimal
        assert solution.objective == pytest.approx(1.0, abs=1e-6)

    def test_fully_determined_by_equalities(self):
        p = affine_problem([1.0], [(np.zeros((1, 1)), [np.eye(1)])], equalities=[([1.0], 2.0)])
        solution = solve(p)
        assert solution.is_optimal
        assert solution.iterations == 0
        assert solution.objective == pytest.approx(2.0)

    def test_certificates_and_check(self):
        p = affine_problem([1.0], [(np.array([[-1.0]]), [np.array([[1.0]])])])
        solution = solve(p)
        certificates = solution.certificates()
        for key in ("status", "duality_gap", "primal_residual", "equality_residual", "iterations"):
            assert key in certificates
        assert certificates["duality_gap"] <= 1e-8
        cert = check_solution(p, [3.0])
        assert cert.block_min_eigenvalues == (pytest.approx(2.0),)
        assert cert.objective == pytest.approx(3.0)


class TestInfeasibility:
    """Infeasible programs never come back Optimal"""

    def test_inconsistent_equalities(self):
        p = affine_problem([1.0], [(np.eye(1), [np.eye(1)])], equalities=[([1.0], 1.0), ([1.0], 2.0)])
        solution = solve(p)
        assert solution.status is SolverStatus.INFEASIBLE
        assert "inconsistent" in solution.message

    def test_fixed_point_violates_lmi(self):
        p = affine_problem([1.0], [(-np.eye(1), [np.eye(1)])], equalities=[([1.0], 0.5)])
        assert solve(p).status is SolverStatus.INFEASIBLE

    def test_unreachable_negative_block(self):
        # the (0, 0) entry is -1 whatever x is
        f0 = np.array([[-1.0, 0.0], [0.0, 0.0]])
        f1 = np.array([[0.0, 0.0], [0.0, 1.0]])
        solution = solve(affine_problem([1.0], [(f0, [f1])]))
        assert solution.status is SolverStatus.INFEASIBLE
        assert solution.iterations == 0
        assert "no variable reaches" in solution.message
        assert solution.message.startswith("primal infeasible")

    def test_unbounded_objective_reports_the_dual(self):
        solution = solve(affine_problem([1.0], []))
        assert solution.status is SolverStatus.INFEASIBLE
        assert solution.message.startswith("dual infeasible")
        assert "unbounded" in solution.message

    def test_free_variable_without_cost_is_optimal(self):
        solution = solve(affine_problem([0.0], []))
        assert solution.is_optimal

    def test_contradictory_bounds(self):
        # x >= 1 and x <= 0
        p = affine_problem([1.0], [
            (np.array([[-1.0]]), [np.array([[1.0]])]),
            (np.array([[0.0]]), [np.array([[-1.0]])]),
        ])
        solution = solve(p)
        assert not solution.is_optimal


class TestRandomPrograms:
    """Strictly feasible random programs with known interior points"""

    @pytest.mark.parametrize("seed", range(50))
    def test_random_strictly_feasible(self, seed):
        rng = np.random.default_rng(seed)
        block_sizes = [int(n) for n in rng.integers(1, 9, size=int(rng.integers(1, 3)))]
        # more variables than Hermitian coordinates would make the coefficients dependent
        num_vars = min(int(rng.integers(1, 21)), sum(n * n for n in block_sizes))
        p = _random_feasible_problem(rng, num_vars, block_sizes)

        solution = solve(p, SolverSettings(gap_tol=1e-7, feas_tol=1e-8))

        assert solution.status is SolverStatus.OPTIMAL, solution.message
        assert solution.duality_gap <= 1e-7
        assert solution.primal_residual >= -1e-8
        assert solution.dual_objective == pytest.approx(solution.objective, abs=1e-6)

    def test_deterministic_iterates(self):
        p = _random_feasible_problem(np.random.default_rng(7), 10, [4, 3])
        first = InteriorPointSolver().solve(p)
        second = InteriorPointSolver().solve(p)
        assert first.iterations == second.iterations
        assert np.array_equal(first.x, second.x)
        assert first.history == second.history
