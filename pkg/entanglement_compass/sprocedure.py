"""Full-block S-procedure relaxation of the robust witness constraint.

Given the witness LFR (A = 0, B linear in W, fixed C and D) and a multiplier
P = [[Q, S], [S^dagger, R]] valid on the structure,

    [[I, 0], [A, B], [0, I], [C, D]]^dagger Diag([[0, X], [X, 0]], P) [[...]] <= 0

with X = -I is an LMI in W. It is handed to the solver as its negation >= 0.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from numpy.typing import NDArray

from .hermitian import (
    DensityOperator,
    DimensionError,
    HermitianOperator,
    InvariantError,
    PSD_TOL,
    hermitian_deviation,
    min_eigenvalue,
    random_unit_vector,
)
from .lfr import DeltaStructure, build_delta, witness_lfr, witness_structure
from .sdp import HermitianBasis, SDPProblem, SolverError, SolverStatus, compile_lmi, solve
from .witness import DetectionSettings, Verdict, VerdictKind, verdict_from_solution

logger = logging.getLogger(__name__)

MULTIPLIER_SAMPLES = 1000


class InvalidMultiplierError(ValueError):
    """The multiplier fails the validity condition on the uncertainty structure"""


@dataclass(frozen=True, eq=False)
class Multiplier:
    Q: NDArray[np.complex128]
    S: NDArray[np.complex128]
    R: NDArray[np.complex128]

    def __post_init__(self):
        Q, S, R = (np.atleast_2d(np.asarray(m, dtype=np.complex128)) for m in (self.Q, self.S, self.R))
        n = Q.shape[0]
        if Q.shape != (n, n) or R.shape != (n, n) or S.shape != (n, n):
            raise DimensionError(f"multiplier blocks have shapes {Q.shape}, {S.shape}, {R.shape}")
        for name, matrix in (("Q", Q), ("R", R)):
            deviation = hermitian_deviation(matrix)
            if deviation > 1e-12:
                raise InvariantError(f"multiplier block {name} is not Hermitian (deviation {deviation:.3e})")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "R", R)

    @classmethod
    def from_matrix(cls, p: HermitianOperator) -> "Multiplier":
        """Split a 2N x 2N Hermitian matrix into its Q, S, R blocks"""
        if p.dim % 2:
            raise DimensionError(f"multiplier matrix must have even dimension, got {p.dim}")
        n = p.dim // 2
        m = p.matrix
        return cls(m[:n, :n], m[:n, n:], m[n:, n:])

    @property
    def size(self) -> int:
        return self.Q.shape[0]

    @property
    def P(self) -> NDArray[np.complex128]:
        return np.block([[self.Q, self.S], [self.S.conj().T, self.R]])

    @property
    def is_simple(self) -> bool:
        eye = np.eye(self.size)
        return bool(
            np.array_equal(self.Q, -eye) and not np.any(self.S) and np.array_equal(self.R, eye)
        )


def simple_multiplier(N: int) -> Multiplier:
    """P = Diag(-I_N, I_N), valid whenever Delta^dagger Delta <= I"""
    if N < 1:
        raise ValueError("multiplier size must be at least 1")
    eye = np.eye(N)
    return Multiplier(-eye, np.zeros((N, N)), eye)


def multiplier_condition(p: Multiplier, delta) -> NDArray[np.complex128]:
    """[Delta; I]^dagger P [Delta; I]"""
    delta = np.asarray(delta, dtype=np.complex128)
    stacked = np.vstack([delta, np.eye(p.size)])
    return stacked.conj().T @ p.P @ stacked


def check_multiplier(p: Multiplier, structure: DeltaStructure, samples: int = MULTIPLIER_SAMPLES,
                     seed: int = 0) -> Tuple[bool, float]:
    """Sample the multiplier condition at a = 0 and at `samples` unit-norm coefficient vectors"""
    if p.size != structure.size:
        raise DimensionError(f"multiplier size {p.size} does not match structure size {structure.size}")
    if p.is_simple:
        # I - Delta^dagger Delta with |a_i| <= 1, infimum 0 at basis vectors
        return True, 0.0
    rng = np.random.default_rng(seed)
    points = [np.zeros(structure.num_params, dtype=np.complex128)]
    points += [random_unit_vector(rng, structure.num_params) for _ in range(samples)]
    worst = min(min_eigenvalue(multiplier_condition(p, build_delta(structure, a))) for a in points)
    ok = worst >= -PSD_TOL
    if not ok:
        logger.warning(f"Multiplier condition violated: worst eigenvalue {worst:.3e}")
    return ok, float(worst)


def sprocedure_lmi(B, C, D, multiplier: Multiplier) -> NDArray[np.complex128]:
    """The quadratic-form matrix with A = 0 and X = -I (required to be <= 0)"""
    B, C, D = (np.asarray(m, dtype=np.complex128) for m in (B, C, D))
    Q, S, R = multiplier.Q, multiplier.S, multiplier.R
    Ch, Dh, Sh = C.conj().T, D.conj().T, S.conj().T
    top_left = Ch @ R @ C
    top_right = -B + Ch @ Sh + Ch @ R @ D
    bottom_right = Q + S @ D + Dh @ Sh + Dh @ R @ D
    return np.block([[top_left, top_right], [top_right.conj().T, bottom_right]])


def build_sprocedure_sdp(rho: DensityOperator, p: Multiplier) -> SDPProblem:
    if not rho.is_bipartite:
        raise DimensionError(f"expected a bipartite state, got dims {list(rho.dims)}")
    dA, dB = rho.dims
    structure = witness_structure(dA, dB)
    if p.size != structure.size:
        raise DimensionError(f"multiplier size {p.size} does not match structure size {structure.size}")
    basis = HermitianBasis(rho.dim)

    def negated_lmi(w):
        lfr = witness_lfr(HermitianOperator(w), dA, dB)
        return -sprocedure_lmi(lfr.B, lfr.C, lfr.D, p)

    block = compile_lmi(negated_lmi, basis, label="s-procedure")
    logger.debug(f"S-procedure LMI for {dA}x{dB}: dimension {block.dim}")
    return SDPProblem(
        objective=basis.pairing(rho.matrix),
        blocks=(block,),
        eq_matrix=basis.trace_row()[None, :],
        eq_rhs=np.array([1.0]),
    )


def detect_with_sprocedure(rho: DensityOperator, p: Optional[Multiplier] = None,
                           settings: Optional[DetectionSettings] = None,
                           samples: int = MULTIPLIER_SAMPLES, seed: int = 0) -> Verdict:
    settings = settings or DetectionSettings()
    if not rho.is_bipartite:
        raise DimensionError(f"expected a bipartite state, got dims {list(rho.dims)}")
    structure = witness_structure(*rho.dims)
    p = p if p is not None else simple_multiplier(structure.size)
    if p.size != structure.size:
        raise InvalidMultiplierError(f"multiplier size {p.size} does not match structure size {structure.size}")
    ok, worst = check_multiplier(p, structure, samples, seed)
    if not ok:
        raise InvalidMultiplierError(f"multiplier condition fails on the structure (worst eigenvalue {worst:.3e})")

    solution = solve(build_sprocedure_sdp(rho, p), settings.solver)
    if solution.status is SolverStatus.INFEASIBLE:
        logger.info(f"S-procedure program infeasible for this multiplier: {solution.message}")
        return Verdict(VerdictKind.INCONCLUSIVE, float("inf"), None, "sprocedure-infeasible",
                       settings.detect_eps, solution)
    if not solution.is_optimal:
        raise SolverError(f"sprocedure: solver returned {solution.status.value} ({solution.message})", solution)
    return verdict_from_solution(rho, solution, "sprocedure", settings.detect_eps)

