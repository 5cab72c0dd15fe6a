"""n-party states: the multipartite robust constraint and detection across bipartite cuts.

A witness that fires across some cut rules out full separability, so the
bipartite relaxation is run on every cut with each group flattened into a
single subsystem.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from .hermitian import (
    DensityOperator,
    DimensionError,
    HermitianOperator,
    InvariantError,
    dims_product,
    kron_all,
    reorder_subsystems,
    symmetrize,
    trace_product,
)
from .witness import (
    DetectionSettings,
    ProductState,
    Verdict,
    Witness,
    cyclic_seesaw,
    detect_entanglement,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Cut:
    """Bipartition of the parties; `left` is flattened into A and `right` into B"""

    left: Tuple[int, ...]
    right: Tuple[int, ...]
    dims: Tuple[int, ...]

    def __post_init__(self):
        left, right = tuple(self.left), tuple(self.right)
        n = len(self.dims)
        if not left or not right:
            raise InvariantError("both sides of a cut must be non-empty")
        if sorted(left + right) != list(range(n)):
            raise InvariantError(f"cut {left}|{right} is not a partition of {n} parties")
        if list(left) != sorted(left) or list(right) != sorted(right):
            raise InvariantError("cut groups must list parties in increasing order")
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))

    @property
    def order(self) -> Tuple[int, ...]:
        return self.left + self.right

    @property
    def flat_dims(self) -> Tuple[int, int]:
        return (dims_product([self.dims[i] for i in self.left]),
                dims_product([self.dims[i] for i in self.right]))

    def label(self) -> str:
        return f"{''.join(map(str, self.left))}|{''.join(map(str, self.right))}"

    def flatten(self, rho: DensityOperator) -> DensityOperator:
        matrix = reorder_subsystems(rho.matrix, self.dims, self.order)
        return DensityOperator(self.flat_dims, HermitianOperator(matrix))


def enumerate_cuts(dims: Sequence[int]) -> List[Cut]:
    """Every unordered bipartition once, the smaller group (or the one holding party 0) as A"""
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    if n < 2:
        raise DimensionError("cuts need at least two parties")
    cuts = []
    others = range(1, n)
    for size in range(0, n - 1):
        for extra in itertools.combinations(others, size):
            group = (0,) + extra
            rest = tuple(i for i in range(n) if i not in group)
            d_group = dims_product([dims[i] for i in group])
            d_rest = dims_product([dims[i] for i in rest])
            left, right = (rest, group) if d_rest < d_group else (group, rest)
            cuts.append(Cut(left, right, dims))
    return cuts


def evaluate_multipartite_constraint(w: HermitianOperator, coeffs: Sequence, dims: Sequence[int]) -> HermitianOperator:
    """(<a_1| ... <a_{n-1}| (x) I) W (|a_1> ... |a_{n-1}> (x) I), an operator on the last party"""
    dims = tuple(int(d) for d in dims)
    if w.dim != dims_product(dims):
        raise DimensionError(f"operator dimension {w.dim} does not match dims {list(dims)}")
    if len(coeffs) != len(dims) - 1:
        raise DimensionError(f"expected {len(dims) - 1} coefficient vectors, got {len(coeffs)}")
    columns = []
    for index, (a, d) in enumerate(zip(coeffs, dims)):
        a = np.asarray(a, dtype=np.complex128).ravel()
        if a.size != d:
            raise DimensionError(f"coefficient vector {index} has length {a.size}, expected {d}")
        columns.append(a.reshape(-1, 1))
    v = kron_all(columns + [np.eye(dims[-1])])
    return HermitianOperator(symmetrize(v.conj().T @ w.matrix @ v))


def seesaw_min_product_n(w, dims: Sequence[int], restarts: int = 8, iters: int = 500,
                         seed: int = 0) -> Tuple[float, ProductState]:
    matrix = w.matrix if isinstance(w, (HermitianOperator, Witness)) else w
    return cyclic_seesaw(matrix, dims, restarts, iters, seed)


def lift_cut_witness(matrix, cut: Cut) -> NDArray[np.complex128]:
    """Undo the cut flattening: back to the original party ordering"""
    permuted = [cut.dims[i] for i in cut.order]
    return reorder_subsystems(np.asarray(matrix, dtype=np.complex128), permuted, np.argsort(cut.order).tolist())


@dataclass(frozen=True, eq=False)
class CutResult:
    cut: Cut
    verdict: Verdict


def detect_multipartite(rho: DensityOperator, settings: Optional[DetectionSettings] = None) -> Verdict:
    settings = settings or DetectionSettings()
    results = []
    for cut in enumerate_cuts(rho.dims):
        verdict = detect_entanglement(cut.flatten(rho), settings)
        logger.info(f"Cut {cut.label()} {cut.flat_dims}: {verdict.kind.value} value={verdict.value:.6g}")
        results.append(CutResult(cut, verdict))

    best = min(results, key=lambda r: r.verdict.value)
    details = {
        "cut": best.cut.label(),
        "cut_values": {r.cut.label(): r.verdict.value for r in results},
    }
    witness = None
    if best.verdict.is_entangled:
        lifted = HermitianOperator(lift_cut_witness(best.verdict.witness.matrix, best.cut))
        witness = Witness(lifted, rho.dims, trace_product(lifted, rho.op))
    return Verdict(best.verdict.kind, best.verdict.value, witness, "cuts", settings.detect_eps,
                   best.verdict.solution, details)
