"""Standard-form semidefinite programs and a primal-dual interior-point solver.

A problem is

    minimize    c . x
    subject to  F_b(x) = F_b0 + sum_i x_i F_bi  >= 0   for every block b
                a_k . x = b_k                           for every equality k

with Hermitian block data and a real variable vector x. Hermitian matrix
variables are parameterized through `HermitianBasis` (d^2 real coordinates).

The solver eliminates the equalities (x = x0 + N y), embeds every Hermitian
block into a real symmetric one of twice the size and runs an infeasible-start
path-following method with the HKM direction and a Mehrotra predictor-corrector
step on the inequality-form problem in y.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from .hermitian import DimensionError, InvariantError, real_embedding, symmetrize

logger = logging.getLogger(__name__)

REGULARIZATION_STEPS = (1e-14, 1e-12, 1e-10, 1e-8)


class SolverStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    MAX_ITERATIONS = "MaxIterations"
    NUMERICAL_FAILURE = "NumericalFailure"


class SolverError(RuntimeError):
    """The interior-point method could not certify a solution"""

    def __init__(self, message: str, solution: Optional["SDPSolution"] = None):
        super().__init__(message)
        self.solution = solution


class _NumericalTrouble(Exception):
    pass


@dataclass(frozen=True)
class SolverSettings:
    gap_tol: float = 1e-8
    feas_tol: float = 1e-8
    max_iterations: int = 200
    centering: float = 0.1
    step_fraction: float = 0.98
    stall_iterations: int = 30

    def __post_init__(self):
        if self.gap_tol <= 0 or self.feas_tol <= 0:
            raise ValueError("solver tolerances must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not 0 < self.centering < 1:
            raise ValueError("centering parameter must lie in (0, 1)")
        if not 0 < self.step_fraction < 1:
            raise ValueError("step fraction to the boundary must lie in (0, 1)")


class HermitianBasis:
    """Real coordinates of a d x d Hermitian matrix.

    Coordinates are the d diagonal entries, then the real parts of the strict
    upper triangle, then the imaginary parts, both in row-major order.
    """

    def __init__(self, dim: int):
        self.dim = int(dim)
        self.rows, self.cols = np.triu_indices(self.dim, 1)
        self.size = self.dim * self.dim
        self._matrices = None

    @property
    def matrices(self) -> NDArray[np.complex128]:
        if self._matrices is None:
            d, n_off = self.dim, len(self.rows)
            basis = np.zeros((self.size, d, d), dtype=np.complex128)
            diag = np.arange(d)
            basis[diag, diag, diag] = 1.0
            off = np.arange(n_off)
            basis[d + off, self.rows, self.cols] = 1.0
            basis[d + off, self.cols, self.rows] = 1.0
            basis[d + n_off + off, self.rows, self.cols] = 1j
            basis[d + n_off + off, self.cols, self.rows] = -1j
            basis.setflags(write=False)
            self._matrices = basis
        return self._matrices

    def to_matrix(self, x) -> NDArray[np.complex128]:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.size,):
            raise DimensionError(f"expected {self.size} coordinates, got shape {x.shape}")
        d, n_off = self.dim, len(self.rows)
        matrix = np.diag(x[:d]).astype(np.complex128)
        upper = x[d:d + n_off] + 1j * x[d + n_off:]
        matrix[self.rows, self.cols] = upper
        matrix[self.cols, self.rows] = upper.conj()
        return matrix

    def from_matrix(self, matrix) -> NDArray[np.float64]:
        matrix = np.asarray(matrix, dtype=np.complex128)
        upper = matrix[self.rows, self.cols]
        return np.concatenate([np.real(np.diag(matrix)), np.real(upper), np.imag(upper)])

    def trace_row(self) -> NDArray[np.float64]:
        row = np.zeros(self.size)
        row[:self.dim] = 1.0
        return row

    def pairing(self, rho) -> NDArray[np.float64]:
        """Vector c with c . x = Re Tr(W(x) rho)"""
        rho = np.asarray(rho, dtype=np.complex128)
        return np.real(np.einsum("kij,ji->k", self.matrices, rho))


@dataclass(frozen=True, eq=False)
class LMIBlock:
    """Affine Hermitian matrix function F(x) = constant + sum_i x_i coefficients[i]"""

    constant: NDArray[np.complex128]
    coefficients: NDArray[np.complex128]
    label: str = ""

    @property
    def dim(self) -> int:
        return self.constant.shape[0]

    def value(self, x) -> NDArray[np.complex128]:
        return self.constant + np.tensordot(np.asarray(x, dtype=float), self.coefficients, axes=1)


def compile_lmis(fn: Callable[[NDArray[np.complex128]], Sequence[Tuple[str, NDArray[np.complex128]]]],
                 basis: HermitianBasis) -> Tuple[LMIBlock, ...]:
    """Tabulate affine maps of a Hermitian matrix variable as LMI blocks.

    `fn` maps a matrix value of the variable to a list of (label, block) pairs;
    it is evaluated once at zero and once per basis matrix.
    """
    at_zero = fn(np.zeros((basis.dim, basis.dim), dtype=np.complex128))
    labels = [label for label, _ in at_zero]
    constants = [symmetrize(np.asarray(value, dtype=np.complex128)) for _, value in at_zero]
    columns = [[] for _ in constants]
    for e in basis.matrices:
        for index, (_, value) in enumerate(fn(e)):
            columns[index].append(symmetrize(np.asarray(value, dtype=np.complex128)) - constants[index])
    return tuple(
        LMIBlock(constant, np.stack(column), label)
        for label, constant, column in zip(labels, constants, columns)
    )


def compile_lmi(fn: Callable[[NDArray[np.complex128]], NDArray[np.complex128]],
                basis: HermitianBasis, label: str = "") -> LMIBlock:
    """Tabulate a single affine map of a Hermitian matrix variable as an LMI block"""
    return compile_lmis(lambda w: [(label, fn(w))], basis)[0]


@dataclass(frozen=True, eq=False)
class SDPProblem:
    objective: NDArray[np.float64]
    blocks: Tuple[LMIBlock, ...]
    eq_matrix: NDArray[np.float64] = None
    eq_rhs: NDArray[np.float64] = None

    def __post_init__(self):
        objective = np.asarray(self.objective, dtype=float).ravel()
        m = objective.size
        eq_matrix = np.zeros((0, m)) if self.eq_matrix is None else np.atleast_2d(np.asarray(self.eq_matrix, dtype=float))
        eq_rhs = np.zeros(0) if self.eq_rhs is None else np.asarray(self.eq_rhs, dtype=float).ravel()
        if eq_matrix.shape[1] != m:
            raise DimensionError(f"equality vectors have length {eq_matrix.shape[1]}, expected {m}")
        if eq_matrix.shape[0] != eq_rhs.size:
            raise DimensionError("equality matrix and right-hand side disagree in length")
        checked = []
        for index, lmi in enumerate(self.blocks):
            constant = np.asarray(lmi.constant, dtype=np.complex128)
            coefficients = np.asarray(lmi.coefficients, dtype=np.complex128).reshape(-1, *constant.shape)
            n = constant.shape[0]
            if constant.shape != (n, n) or coefficients.shape != (m, n, n):
                raise DimensionError(
                    f"block {index} data has shapes {constant.shape}/{coefficients.shape}, expected ({n},{n})/({m},{n},{n})"
                )
            scale = max(1.0, float(np.max(np.abs(coefficients), initial=0.0)), float(np.max(np.abs(constant), initial=0.0)))
            deviation = max(
                float(np.max(np.abs(constant - constant.conj().T), initial=0.0)),
                float(np.max(np.abs(coefficients - coefficients.conj().transpose(0, 2, 1)), initial=0.0)),
            )
            if deviation > 1e-10 * scale:
                raise InvariantError(f"block {index} data is not Hermitian (deviation {deviation:.3e})")
            checked.append(LMIBlock(constant, coefficients, lmi.label))
        object.__setattr__(self, "objective", objective)
        object.__setattr__(self, "blocks", tuple(checked))
        object.__setattr__(self, "eq_matrix", eq_matrix)
        object.__setattr__(self, "eq_rhs", eq_rhs)

    @property
    def num_vars(self) -> int:
        return self.objective.size

    @property
    def equalities(self) -> List[Tuple[NDArray[np.float64], float]]:
        return [(row.copy(), float(rhs)) for row, rhs in zip(self.eq_matrix, self.eq_rhs)]

    @property
    def block_dims(self) -> List[int]:
        return [lmi.dim for lmi in self.blocks]


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    primal_objective: float
    dual_objective: float
    gap: float
    primal_infeasibility: float
    dual_infeasibility: float
    step_primal: float
    step_dual: float


@dataclass(frozen=True, eq=False)
class SDPSolution:
    status: SolverStatus
    x: NDArray[np.float64]
    objective: float
    duality_gap: float
    primal_residual: float
    equality_residual: float
    dual_objective: float = float("nan")
    dual_residual: float = float("nan")
    iterations: int = 0
    history: Tuple[IterationRecord, ...] = field(default_factory=tuple)
    message: str = ""

    @property
    def is_optimal(self) -> bool:
        return self.status is SolverStatus.OPTIMAL

    def certificates(self) -> dict:
        return {
            "status": self.status.value,
            "duality_gap": self.duality_gap,
            "primal_residual": self.primal_residual,
            "equality_residual": self.equality_residual,
            "dual_residual": self.dual_residual,
            "iterations": self.iterations,
        }


@dataclass(frozen=True)
class Certificate:
    block_min_eigenvalues: Tuple[float, ...]
    primal_residual: float
    equality_residuals: Tuple[float, ...]
    equality_residual: float
    objective: float


def check_solution(p: SDPProblem, x) -> Certificate:
    """Re-evaluate a candidate point independently of the solver"""
    x = np.asarray(x, dtype=float).ravel()
    if x.size != p.num_vars:
        raise DimensionError(f"candidate has {x.size} entries, problem has {p.num_vars} variables")
    minima = tuple(float(np.linalg.eigvalsh(symmetrize(lmi.value(x)))[0]) for lmi in p.blocks)
    residuals = tuple(float(abs(r)) for r in (p.eq_matrix @ x - p.eq_rhs))
    return Certificate(
        block_min_eigenvalues=minima,
        primal_residual=min(minima) if minima else 0.0,
        equality_residuals=residuals,
        equality_residual=max(residuals) if residuals else 0.0,
        objective=float(p.objective @ x),
    )


def _sym(matrix):
    return (matrix + matrix.T) / 2


def _inner(a_blocks, b_blocks) -> float:
    return float(sum(np.sum(a * b) for a, b in zip(a_blocks, b_blocks)))


def _cholesky(matrix):
    try:
        return scipy.linalg.cholesky(matrix, lower=True)
    except np.linalg.LinAlgError as exc:
        raise _NumericalTrouble("iterate lost positive definiteness") from exc


def _max_step(x_blocks, dx_blocks) -> float:
    """Largest alpha with X + alpha dX still positive semidefinite"""
    alpha = np.inf
    for x, dx in zip(x_blocks, dx_blocks):
        lower = _cholesky(x)
        half = scipy.linalg.solve_triangular(lower, dx, lower=True)
        scaled = scipy.linalg.solve_triangular(lower, half.T, lower=True)
        lam = np.linalg.eigvalsh(_sym(scaled))[0]
        if lam < 0:
            alpha = min(alpha, -1.0 / lam)
    return alpha


class InteriorPointSolver:
    """Primal-dual path-following solver for `SDPProblem` instances"""

    def __init__(self, settings: Optional[SolverSettings] = None):
        self.settings = settings or SolverSettings()

    def solve(self, problem: SDPProblem) -> SDPSolution:
        s = self.settings
        m = problem.num_vars
        x0, null = self._eliminate_equalities(problem)
        if x0 is None:
            return self._finish(problem, np.zeros(m), SolverStatus.INFEASIBLE, (),
                                "primal infeasible: equality constraints are inconsistent")

        # reduced data: G_b(y) = G0_b + sum_k y_k G_bk
        g0 = []
        g = []
        for lmi in problem.blocks:
            g0.append(real_embedding(lmi.value(x0)))
            g.append(real_embedding(np.tensordot(null.T, lmi.coefficients, axes=1)))
        b = null.T @ problem.objective
        offset = float(problem.objective @ x0)
        k = null.shape[1]

        if k == 0 or not problem.blocks:
            status = SolverStatus.OPTIMAL
            message = "no free variables after equality elimination"
            if problem.blocks and check_solution(problem, x0).primal_residual < -s.feas_tol:
                status = SolverStatus.INFEASIBLE
                message = "primal infeasible: the unique equality solution violates the LMI"
            elif not problem.blocks and k > 0 and np.linalg.norm(b) > 0:
                status = SolverStatus.INFEASIBLE
                message = "dual infeasible: objective unbounded without LMI constraints"
            return self._finish(problem, x0, status, (), message)

        fixed = self._fixed_negative_direction(g0, g)
        if fixed is not None:
            return self._finish(problem, x0, SolverStatus.INFEASIBLE, (), f"primal infeasible: {fixed}")

        gflat = [gb.reshape(k, -1) for gb in g]
        n_total = sum(gb.shape[0] for gb in g0)
        s_scale = max(10.0, np.sqrt(n_total),
                      max(np.linalg.norm(gb) for gb in g0),
                      max(np.linalg.norm(gf, axis=1).max() for gf in gflat))
        a_norms = np.sqrt(sum(np.sum(gf ** 2, axis=1) for gf in gflat))
        z_scale = max(10.0, np.sqrt(n_total), n_total * float(np.max((1.0 + np.abs(b)) / (1.0 + a_norms))))
        y = np.zeros(k)
        S = [s_scale * np.eye(gb.shape[0]) for gb in g0]
        Z = [z_scale * np.eye(gb.shape[0]) for gb in g0]

        history: List[IterationRecord] = []
        status = SolverStatus.MAX_ITERATIONS
        message = f"duality gap not reached within {s.max_iterations} iterations"
        step_p = step_d = 0.0
        for iteration in range(s.max_iterations):
            gy = [g0b + np.tensordot(y, gb, axes=1) for g0b, gb in zip(g0, g)]
            rp = [gyb - sb for gyb, sb in zip(gy, S)]
            az = sum(gf @ zb.ravel() for gf, zb in zip(gflat, Z))
            rd = b - az
            complementarity = _inner(S, Z)
            primal_obj = offset + float(b @ y)
            dual_obj = offset - _inner(g0, Z)
            gap = max(complementarity, abs(primal_obj - dual_obj))
            rp_norm = float(np.sqrt(sum(np.sum(r ** 2) for r in rp)))
            rd_norm = float(np.linalg.norm(rd))
            history.append(IterationRecord(iteration, primal_obj, dual_obj, gap, rp_norm, rd_norm, step_p, step_d))
            logger.debug(
                f"iter {iteration:3d} pobj={primal_obj:+.10e} dobj={dual_obj:+.10e} "
                f"gap={gap:.2e} pinf={rp_norm:.2e} dinf={rd_norm:.2e}"
            )

            if gap <= s.gap_tol and rp_norm <= s.feas_tol and rd_norm <= s.feas_tol:
                status, message = SolverStatus.OPTIMAL, "duality gap and residuals within tolerance"
                break
            ray = -_inner(g0, Z)
            if rp_norm > s.feas_tol and ray > 0 and np.linalg.norm(az) <= s.feas_tol * ray:
                status, message = SolverStatus.INFEASIBLE, "primal infeasible: infeasibility certificate found"
                break
            if iteration >= s.stall_iterations:
                before = history[iteration - s.stall_iterations]
                if rp_norm > s.feas_tol and rp_norm > 0.5 * before.primal_infeasibility:
                    status = SolverStatus.INFEASIBLE
                    message = "primal infeasible: primal residual stalled above tolerance"
                    logger.warning(f"Primal residual stalled at {rp_norm:.3e} after {iteration} iterations")
                    break
                if rd_norm > s.feas_tol and rd_norm > 0.5 * before.dual_infeasibility:
                    status = SolverStatus.INFEASIBLE
                    message = "dual infeasible: dual residual stalled above tolerance"
                    logger.warning(f"Dual residual stalled at {rd_norm:.3e} after {iteration} iterations")
                    break

            try:
                y, S, Z, step_p, step_d = self._step(iteration, y, S, Z, g, gflat, rp, rd, n_total)
            except _NumericalTrouble as exc:
                status, message = SolverStatus.NUMERICAL_FAILURE, str(exc)
                logger.error(f"Interior-point iteration {iteration} failed: {exc}")
                break

        x = x0 + null @ y
        return self._finish(problem, x, status, tuple(history), message)

    def _eliminate_equalities(self, problem: SDPProblem):
        m = problem.num_vars
        a, rhs = problem.eq_matrix, problem.eq_rhs
        if a.shape[0] == 0:
            return np.zeros(m), np.eye(m)
        x0, *_ = scipy.linalg.lstsq(a, rhs)
        if np.max(np.abs(a @ x0 - rhs)) > self.settings.feas_tol:
            return None, None
        return x0, scipy.linalg.null_space(a)

    def _fixed_negative_direction(self, g0, g) -> Optional[str]:
        """Detect a principal submatrix that no variable reaches and on which G_0 is not PSD.

        Its lowest eigenvector v, padded with zeros, satisfies v^T G_k v = 0 for
        every k and v^T G_0 v < 0, so Z = v v^T certifies infeasibility.
        """
        for index, (g0b, gb) in enumerate(zip(g0, g)):
            scale = max(1.0, float(np.max(np.abs(gb), initial=0.0)))
            inert = np.all(np.abs(gb) <= 1e-12 * scale, axis=0)
            chosen: List[int] = []
            for i in np.flatnonzero(np.diag(inert)):
                if all(inert[i, j] for j in chosen):
                    chosen.append(int(i))
            if not chosen:
                continue
            lam = float(np.linalg.eigvalsh(_sym(g0b[np.ix_(chosen, chosen)]))[0])
            if lam < -self.settings.feas_tol:
                return f"block {index} is negative ({lam:.3e}) on coordinates no variable reaches"
        return None

    def _factor_schur(self, schur):
        scale = max(1.0, float(np.max(np.abs(np.diag(schur)))))
        try:
            return scipy.linalg.cho_factor(schur, lower=True)
        except np.linalg.LinAlgError:
            pass
        identity = np.eye(schur.shape[0])
        for shift in REGULARIZATION_STEPS:
            try:
                factor = scipy.linalg.cho_factor(schur + shift * scale * identity, lower=True)
                logger.warning(f"Schur complement regularized with shift {shift:.0e}")
                return factor
            except np.linalg.LinAlgError:
                continue
        raise _NumericalTrouble("Newton system singular after regularization retries")

    def _step(self, iteration, y, S, Z, g, gflat, rp, rd, n_total):
        s = self.settings
        k = y.size
        s_inv = []
        for sb in S:
            factor = (_cholesky(sb), True)
            s_inv.append(scipy.linalg.cho_solve(factor, np.eye(sb.shape[0])))

        schur = np.zeros((k, k))
        for gb, gf, si, zb in zip(g, gflat, s_inv, Z):
            u = np.matmul(np.matmul(si, gb), zb)
            schur += gf @ u.reshape(k, -1).T
        schur = _sym(schur)
        factor = self._factor_schur(schur)

        def direction(rc_terms):
            rhs = -rd.copy()
            for gf, rc, si, rpb, zb in zip(gflat, rc_terms, s_inv, rp, Z):
                rhs += gf @ (rc - si @ rpb @ zb).ravel()
            dy = scipy.linalg.cho_solve(factor, rhs)
            dy += scipy.linalg.cho_solve(factor, rhs - schur @ dy)
            if not np.all(np.isfinite(dy)):
                raise _NumericalTrouble("non-finite Newton direction")
            ds = [rpb + np.tensordot(dy, gb, axes=1) for rpb, gb in zip(rp, g)]
            dz = [_sym(rc - si @ dsb @ zb) for rc, si, dsb, zb in zip(rc_terms, s_inv, ds, Z)]
            return dy, ds, dz

        mu = _inner(S, Z) / n_total
        # predictor: affine scaling direction towards mu = 0
        dy_a, ds_a, dz_a = direction([-zb for zb in Z])
        alpha_p = min(1.0, _max_step(S, ds_a))
        alpha_d = min(1.0, _max_step(Z, dz_a))
        mu_aff = _inner([sb + alpha_p * d for sb, d in zip(S, ds_a)],
                        [zb + alpha_d * d for zb, d in zip(Z, dz_a)]) / n_total
        if iteration == 0:
            sigma = s.centering
        else:
            sigma = float(np.clip(mu_aff / mu, 0.0, 1.0)) ** 3

        # corrector with second-order term
        rc_terms = [sigma * mu * si - zb - si @ dsa @ dza
                    for si, zb, dsa, dza in zip(s_inv, Z, ds_a, dz_a)]
        dy, ds, dz = direction(rc_terms)
        step_p = min(1.0, s.step_fraction * _max_step(S, ds))
        step_d = min(1.0, s.step_fraction * _max_step(Z, dz))

        y = y + step_p * dy
        S = [_sym(sb + step_p * d) for sb, d in zip(S, ds)]
        Z = [_sym(zb + step_d * d) for zb, d in zip(Z, dz)]
        return y, S, Z, step_p, step_d

    def _finish(self, problem, x, status, history, message) -> SDPSolution:
        s = self.settings
        cert = check_solution(problem, x)
        last = history[-1] if history else None
        if status is SolverStatus.OPTIMAL and (
            cert.primal_residual < -s.feas_tol or cert.equality_residual > s.feas_tol
        ):
            status = SolverStatus.NUMERICAL_FAILURE
            message = (
                f"certificate check failed: min eigenvalue {cert.primal_residual:.3e}, "
                f"equality residual {cert.equality_residual:.3e}"
            )
        solution = SDPSolution(
            status=status,
            x=x,
            objective=cert.objective,
            duality_gap=last.gap if last else 0.0,
            primal_residual=cert.primal_residual,
            equality_residual=cert.equality_residual,
            dual_objective=last.dual_objective if last else cert.objective,
            dual_residual=last.dual_infeasibility if last else 0.0,
            iterations=len(history),
            history=history,
            message=message,
        )
        log = logger.info if status is SolverStatus.OPTIMAL else logger.warning
        log(f"SDP finished: {status.value} after {solution.iterations} iterations, "
            f"objective={solution.objective:.10g}, gap={solution.duality_gap:.2e} ({message})")
        return solution


def solve(p: SDPProblem, s: Optional[SolverSettings] = None) -> SDPSolution:
    return InteriorPointSolver(s).solve(p)


def affine_problem(objective: Sequence[float], blocks: Sequence[Tuple[NDArray, Sequence[NDArray]]],
                   equalities: Sequence[Tuple[Sequence[float], float]] = ()) -> SDPProblem:
    """Build a problem from (F0, [F1..Fm]) tuples and (a, b) equality pairs"""
    objective = np.asarray(objective, dtype=float)
    lmi_blocks = tuple(
        LMIBlock(np.asarray(f0, dtype=np.complex128), np.asarray(list(fs), dtype=np.complex128).reshape(len(objective), *np.shape(f0)))
        for f0, fs in blocks
    )
    if equalities:
        eq_matrix = np.array([list(a) for a, _ in equalities], dtype=float)
        eq_rhs = np.array([rhs for _, rhs in equalities], dtype=float)
    else:
        eq_matrix = eq_rhs = None
    return SDPProblem(objective, lmi_blocks, eq_matrix, eq_rhs)
