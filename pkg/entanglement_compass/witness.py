"""Entanglement witnesses from the pairwise block relaxation of the robust program.

The robust constraint sum_ij a_i* a_j W_ij >= 0 (for all a in C^dA) is replaced
by sufficient LMIs on the blocks W_ij = <i|_A W |j>_A:

    W_kk >= 0
    W_kk/(dA-1) +- (sqrt2/2)(W_kj + W_jk) >= 0
    W_kk/(dA-1) +- (sqrt2/2i)(W_kj - W_jk) >= 0

for every ordered pair k != j. A negative optimum of Tr(W rho) under these
constraints and Tr W = 1 certifies that rho is entangled.
"""

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from .hermitian import (
    DensityOperator,
    DimensionError,
    HermitianOperator,
    InvariantError,
    TRACE_TOL,
    eigenvalues,
    kron_all,
    partial_transpose,
    random_unit_vector,
    symmetrize,
    trace_product,
)
from .sdp import (
    HermitianBasis,
    SDPProblem,
    SDPSolution,
    SolverError,
    SolverSettings,
    compile_lmis,
    solve,
)

logger = logging.getLogger(__name__)

DETECT_EPS = 1e-6
PPT_TOL = 1e-9
SEESAW_TOL = 1e-12
PRODUCT_TOL = 1e-7


class VerdictKind(str, Enum):
    ENTANGLED = "Entangled"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True, eq=False)
class Witness:
    """Trace-one Hermitian operator on H_A (x) H_B ... with its value on the originating state"""

    op: HermitianOperator
    dims: Tuple[int, ...]
    objective: float = float("nan")

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if self.op.dim != int(np.prod(dims)):
            raise DimensionError(f"witness dimension {self.op.dim} does not match dims {list(dims)}")
        trace = self.op.trace()
        if abs(trace - 1.0) > TRACE_TOL:
            raise InvariantError(f"witness trace invariant violated: Tr W = {trace:.12g}, expected 1")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def from_matrix(cls, matrix, dims: Sequence[int], state: Optional[DensityOperator] = None) -> "Witness":
        op = HermitianOperator(np.asarray(matrix, dtype=np.complex128))
        objective = trace_product(op, state.op) if state is not None else float("nan")
        return cls(op, tuple(dims), objective)

    @property
    def matrix(self) -> NDArray[np.complex128]:
        return self.op.matrix

    def min_eigenvalue(self) -> float:
        return float(eigenvalues(self.op)[0])


@dataclass(frozen=True, eq=False)
class ProductState:
    """Unit vectors, one per subsystem"""

    factors: Tuple[NDArray[np.complex128], ...]

    def __post_init__(self):
        factors = tuple(np.asarray(f, dtype=np.complex128).ravel() for f in self.factors)
        for index, factor in enumerate(factors):
            norm = np.linalg.norm(factor)
            if abs(norm - 1.0) > 1e-12:
                raise InvariantError(f"product factor {index} has norm {norm:.15g}, expected 1")
        object.__setattr__(self, "factors", factors)

    @property
    def a(self) -> NDArray[np.complex128]:
        return self.factors[0]

    @property
    def b(self) -> NDArray[np.complex128]:
        return self.factors[-1]

    def vector(self) -> NDArray[np.complex128]:
        return kron_all(self.factors).ravel()


@dataclass(frozen=True, eq=False)
class Verdict:
    kind: VerdictKind
    value: float
    witness: Optional[Witness]
    method: str
    detect_eps: float = DETECT_EPS
    solution: Optional[SDPSolution] = None
    details: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        entangled = self.value < -self.detect_eps
        if entangled != (self.kind is VerdictKind.ENTANGLED):
            raise InvariantError(
                f"verdict {self.kind.value} inconsistent with value {self.value:.6g} and eps {self.detect_eps:g}"
            )

    @property
    def is_entangled(self) -> bool:
        return self.kind is VerdictKind.ENTANGLED


@dataclass(frozen=True)
class DetectionSettings:
    solver: SolverSettings = field(default_factory=SolverSettings)
    detect_eps: float = DETECT_EPS

    def __post_init__(self):
        if self.detect_eps <= 0:
            raise ValueError("detect_eps must be positive")


def _require_bipartite(rho: DensityOperator) -> Tuple[int, int]:
    if not rho.is_bipartite:
        raise DimensionError(f"expected a bipartite state, got dims {list(rho.dims)}")
    return rho.dims


def theorem2_blocks(matrix, dA: int, dB: int) -> List[Tuple[str, NDArray[np.complex128]]]:
    """The PSD blocks of the pairwise relaxation, as functions of W.

    Diagonal blocks W_kk come first. Each unordered pair k < j then yields one
    block per (family, sign), holding the (k, j) and (j, k) constraints
    side by side: Diag(W_kk/(dA-1) + sF, W_jj/(dA-1) + sF).
    """
    if dA < 2:
        raise DimensionError("the pairwise relaxation needs dA >= 2")
    parts = np.asarray(matrix, dtype=np.complex128).reshape(dA, dB, dA, dB).transpose(0, 2, 1, 3)
    scale = 1.0 / (dA - 1)
    half_root2 = np.sqrt(2.0) / 2.0
    result = [(f"W{k}{k}", parts[k, k]) for k in range(dA)]
    for k, j in itertools.combinations(range(dA), 2):
        families = (
            ("re", half_root2 * (parts[k, j] + parts[j, k])),
            ("im", (half_root2 / 1j) * (parts[k, j] - parts[j, k])),
        )
        for family, term in families:
            for sign, tag in ((1.0, "+"), (-1.0, "-")):
                pair = scipy.linalg.block_diag(scale * parts[k, k] + sign * term,
                                               scale * parts[j, j] + sign * term)
                result.append((f"pair{k}{j}:{family}{tag}", pair))
    return result


def build_theorem2(rho: DensityOperator) -> SDPProblem:
    """Compile the pairwise relaxation for `rho` into a standard-form SDP over W"""
    dA, dB = _require_bipartite(rho)
    basis = HermitianBasis(rho.dim)
    lmi_blocks = compile_lmis(lambda w: theorem2_blocks(w, dA, dB), basis)
    logger.debug(f"Relaxation for {dA}x{dB}: {len(lmi_blocks)} blocks, {basis.size} real variables")
    return SDPProblem(
        objective=basis.pairing(rho.matrix),
        blocks=lmi_blocks,
        eq_matrix=basis.trace_row()[None, :],
        eq_rhs=np.array([1.0]),
    )


def theorem2_violation(w: HermitianOperator, dA: int, dB: int) -> float:
    """Most negative eigenvalue over all relaxation blocks (>= 0 means feasible)"""
    if w.dim != dA * dB:
        raise DimensionError(f"operator dimension {w.dim} != dA*dB = {dA * dB}")
    return min(float(np.linalg.eigvalsh(symmetrize(b))[0]) for _, b in theorem2_blocks(w.matrix, dA, dB))


def verdict_from_solution(rho: DensityOperator, solution: SDPSolution, method: str,
                          detect_eps: float = DETECT_EPS) -> Verdict:
    """Turn an optimal solution over the coordinates of W into a verdict"""
    if not solution.is_optimal:
        raise SolverError(f"{method}: solver returned {solution.status.value} ({solution.message})", solution)
    basis = HermitianBasis(rho.dim)
    op = HermitianOperator(basis.to_matrix(solution.x))
    value = solution.objective
    if value < -detect_eps:
        witness = Witness(op, rho.dims, trace_product(op, rho.op))
        kind = VerdictKind.ENTANGLED
    else:
        witness, kind = None, VerdictKind.INCONCLUSIVE
    logger.info(f"{method}: {kind.value} with optimum {value:.6g}")
    return Verdict(kind, value, witness, method, detect_eps, solution)


def detect_entanglement(rho: DensityOperator, settings: Optional[DetectionSettings] = None) -> Verdict:
    settings = settings or DetectionSettings()
    problem = build_theorem2(rho)
    solution = solve(problem, settings.solver)
    return verdict_from_solution(rho, solution, "theorem2", settings.detect_eps)


def robust_constraint_matrix(matrix, a, dA: int, dB: int) -> NDArray[np.complex128]:
    """sum_ij a_i* a_j W_ij for a raw matrix W on C^dA (x) C^dB"""
    a = np.asarray(a, dtype=np.complex128).ravel()
    if a.shape != (dA,):
        raise DimensionError(f"coefficient vector has length {a.size}, expected {dA}")
    parts = np.asarray(matrix, dtype=np.complex128).reshape(dA, dB, dA, dB)
    return symmetrize(np.einsum("i,ikjl,j->kl", a.conj(), parts, a))


def evaluate_robust_constraint(w: Witness, a) -> HermitianOperator:
    dA, dB = w.dims
    return HermitianOperator(robust_constraint_matrix(w.matrix, a, dA, dB))


def _contraction(factors: Sequence[NDArray[np.complex128]], dims: Sequence[int], k: int) -> NDArray[np.complex128]:
    """Isometry V_k with V_k^dagger W V_k = W contracted with every factor except the k-th"""
    columns = [np.eye(d, dtype=np.complex128) if index == k else f.reshape(-1, 1)
               for index, (f, d) in enumerate(zip(factors, dims))]
    return kron_all(columns)


def cyclic_seesaw(matrix, dims: Sequence[int], restarts: int = 8, iters: int = 500,
                  seed: int = 0) -> Tuple[float, ProductState]:
    """Minimize <x_1 ... x_n|W|x_1 ... x_n> over unit product vectors by coordinate descent.

    Every step replaces one factor by the smallest eigenvector of W contracted
    with all other factors, cycling over the parties in order. Restart r draws
    its starting factors (in party order) from SeedSequence(seed).spawn(restarts)[r].
    The result is an upper bound on the true product-state minimum.
    """
    dims = tuple(int(d) for d in dims)
    matrix = np.asarray(matrix, dtype=np.complex128)
    if restarts < 1 or iters < 1:
        raise ValueError("see-saw needs at least one restart and one sweep")
    if matrix.shape != (int(np.prod(dims)),) * 2:
        raise DimensionError(f"operator of shape {matrix.shape} does not match dims {list(dims)}")
    best_value, best_state = np.inf, None
    for child in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.default_rng(child)
        factors = [random_unit_vector(rng, d) for d in dims]
        value = np.inf
        for _ in range(iters):
            for k in range(len(dims)):
                v = _contraction(factors, dims, k)
                vals, vecs = np.linalg.eigh(symmetrize(v.conj().T @ matrix @ v))
                factors[k] = vecs[:, 0] / np.linalg.norm(vecs[:, 0])
            new_value = float(vals[0])
            converged = abs(value - new_value) < SEESAW_TOL
            value = new_value
            if converged:
                break
        else:
            logger.warning(f"See-saw restart did not converge within {iters} sweeps (value {value:.3e})")
        if value < best_value:
            best_value, best_state = value, ProductState(tuple(factors))
    return float(best_value), best_state


def seesaw_min_product(w: Witness, restarts: int = 8, iters: int = 500,
                       seed: int = 0) -> Tuple[float, ProductState]:
    """Alternating minimization of <psi phi|W|psi phi> over unit product vectors"""
    if len(w.dims) != 2:
        raise DimensionError(f"expected a bipartite witness, got dims {list(w.dims)}")
    return cyclic_seesaw(w.matrix, w.dims, restarts, iters, seed)


def ppt_check(rho: DensityOperator) -> Tuple[bool, float]:
    _require_bipartite(rho)
    min_eig = float(eigenvalues(partial_transpose(rho, 1))[0])
    return min_eig >= -PPT_TOL, min_eig


def sample_separable(dims: Sequence[int], mixture_size: int, seed=None) -> DensityOperator:
    """Random convex mixture of Haar-random product pure states with Dirichlet weights"""
    if mixture_size < 1:
        raise ValueError("mixture_size must be at least 1")
    dims = tuple(int(d) for d in dims)
    rng = np.random.default_rng(seed)
    weights = rng.dirichlet(np.ones(mixture_size))
    total = int(np.prod(dims))
    rho = np.zeros((total, total), dtype=np.complex128)
    for weight in weights:
        psi = kron_all([random_unit_vector(rng, d) for d in dims]).ravel()
        rho += weight * np.outer(psi, psi.conj())
    return DensityOperator(dims, HermitianOperator(rho))


@dataclass(frozen=True, eq=False)
class WitnessCheck:
    trace: float
    min_eigenvalue: float
    seesaw_value: float
    product_state: Optional[ProductState]
    state_value: Optional[float]
    failures: Tuple[str, ...]

    @property
    def passes(self) -> bool:
        return not self.failures


def verify_witness(matrix, dims: Sequence[int], rho: Optional[DensityOperator] = None,
                   restarts: int = 8, iters: int = 500, seed: int = 0) -> WitnessCheck:
    """Check the witness conditions: unit trace, a negative eigenvalue, non-negative on product states"""
    op = HermitianOperator.from_data(matrix)
    dims = tuple(int(d) for d in dims)
    if op.dim != int(np.prod(dims)):
        raise DimensionError(f"witness dimension {op.dim} does not match dims {list(dims)}")
    trace = op.trace()
    min_eig = float(eigenvalues(op)[0])
    failures = []
    if abs(trace - 1.0) > TRACE_TOL:
        failures.append(f"trace is {trace:.12g}, expected 1")
    if min_eig >= 0:
        failures.append("no negative eigenvalue")
    seesaw_value, state = cyclic_seesaw(op.matrix, dims, restarts, iters, seed)
    if seesaw_value < -PRODUCT_TOL:
        failures.append(f"negative on a product state: {seesaw_value:.3e}")

    state_value = None
    if rho is not None:
        if rho.dim != op.dim:
            raise DimensionError(f"state dimension {rho.dim} does not match witness dimension {op.dim}")
        state_value = trace_product(op, rho.op)
    return WitnessCheck(trace, min_eig, seesaw_value, state, state_value, tuple(failures))


def min_separable_value(w: HermitianOperator, dims: Sequence[int], samples: int, seed: int = 0,
                        mixture_size: int = 1) -> float:
    """Smallest Tr(W sigma) over sampled separable states"""
    if samples < 1:
        raise ValueError("need at least one separable sample")
    seeds = np.random.SeedSequence(seed).spawn(samples)
    return min(
        trace_product(w, sample_separable(dims, mixture_size, child).op) for child in seeds
    )
