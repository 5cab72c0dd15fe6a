"""Dense complex linear algebra primitives for states and witnesses.

Product bases are ordered row-major over subsystems: |i>_A (x) |k>_B maps to
index i*dB + k, leftmost subsystem slowest.
"""

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

logger = logging.getLogger(__name__)

ComplexMatrix = NDArray[np.complex128]

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-9
PSD_TOL = 1e-9


class InvariantError(ValueError):
    """A value violates one of the documented type invariants"""


class DimensionError(InvariantError):
    """Operand shapes do not conform"""


def as_complex_matrix(data) -> ComplexMatrix:
    """Coerce array-like data into a finite 2-D complex matrix"""
    matrix = np.array(data, dtype=np.complex128)
    if matrix.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got {matrix.ndim} dimensions")
    if not np.all(np.isfinite(matrix)):
        raise InvariantError("matrix entries must be finite (no NaN/Inf)")
    return matrix


def hermitian_deviation(matrix: ComplexMatrix) -> float:
    """Largest absolute entry of H - H^dagger"""
    if matrix.size == 0:
        return 0.0
    return float(np.max(np.abs(matrix - matrix.conj().T)))


def symmetrize(matrix: ComplexMatrix) -> ComplexMatrix:
    """Project onto the Hermitian part, (H + H^dagger) / 2"""
    return (matrix + matrix.conj().T) / 2


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Square complex matrix equal to its adjoint within 1e-12"""

    matrix: ComplexMatrix

    def __post_init__(self):
        matrix = as_complex_matrix(self.matrix)
        if matrix.shape[0] != matrix.shape[1]:
            raise DimensionError(f"Hermitian operator must be square, got shape {matrix.shape}")
        deviation = hermitian_deviation(matrix)
        if deviation > HERMITIAN_TOL:
            raise InvariantError(f"operator is not Hermitian: max |H - H^dagger| = {deviation:.3e}")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def from_data(cls, data, tol: float = 1e-9) -> "HermitianOperator":
        """Build from external data, accepting deviations up to `tol` and symmetrizing"""
        matrix = as_complex_matrix(data)
        if matrix.shape[0] != matrix.shape[1]:
            raise DimensionError(f"Hermitian operator must be square, got shape {matrix.shape}")
        deviation = hermitian_deviation(matrix)
        if deviation > tol:
            raise InvariantError(f"operator is not Hermitian: max |H - H^dagger| = {deviation:.3e}")
        return cls(symmetrize(matrix))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Trace-one positive semidefinite operator on a tensor product of subsystems"""

    dims: Tuple[int, ...]
    op: HermitianOperator

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise InvariantError("density operator needs at least one subsystem dimension")
        if any(d < 2 for d in dims):
            raise InvariantError(f"subsystem dimensions must be >= 2, got {list(dims)}")
        if self.op.dim != int(np.prod(dims)):
            raise DimensionError(
                f"operator dimension {self.op.dim} does not match product of dims {list(dims)}"
            )
        trace = self.op.trace()
        if abs(trace - 1.0) > TRACE_TOL:
            raise InvariantError(f"trace invariant violated: trace = {trace:.12g}, expected 1")
        min_eig = float(eigenvalues(self.op)[0])
        if min_eig < -PSD_TOL:
            raise InvariantError(f"positivity invariant violated: minimum eigenvalue = {min_eig:.3e}")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def from_matrix(cls, data, dims: Sequence[int]) -> "DensityOperator":
        return cls(tuple(dims), HermitianOperator(as_complex_matrix(data)))

    @classmethod
    def from_pure(cls, vector, dims: Sequence[int]) -> "DensityOperator":
        """Projector onto a (normalized) state vector"""
        psi = np.asarray(vector, dtype=np.complex128).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(tuple(dims), HermitianOperator(np.outer(psi, psi.conj())))

    @property
    def matrix(self) -> ComplexMatrix:
        return self.op.matrix

    @property
    def dim(self) -> int:
        return self.op.dim

    @property
    def is_bipartite(self) -> bool:
        return len(self.dims) == 2


def kron(a, b) -> ComplexMatrix:
    """Kronecker product, (a(x)b)[i*rb + k, j*cb + l] = a[i, j] * b[k, l]"""
    return np.kron(as_complex_matrix(a), as_complex_matrix(b))


def kron_all(factors: Sequence) -> ComplexMatrix:
    """Left-to-right Kronecker product of a list of matrices or vectors"""
    result = np.ones((1, 1), dtype=np.complex128)
    for factor in factors:
        result = np.kron(result, np.asarray(factor, dtype=np.complex128))
    return result


def block(w: HermitianOperator, i: int, j: int, dA: int, dB: int) -> ComplexMatrix:
    """Return W_ij = <i|_A W |j>_A, the dB x dB block at block-row i, block-column j"""
    if w.dim != dA * dB:
        raise DimensionError(f"operator dimension {w.dim} != dA*dB = {dA * dB}")
    if not (0 <= i < dA and 0 <= j < dA):
        raise DimensionError(f"block index ({i}, {j}) out of range for dA = {dA}")
    return w.matrix[i * dB:(i + 1) * dB, j * dB:(j + 1) * dB].copy()


def blocks(w: HermitianOperator, dA: int, dB: int) -> NDArray[np.complex128]:
    """All blocks at once as an array indexed [i, j, :, :]"""
    if w.dim != dA * dB:
        raise DimensionError(f"operator dimension {w.dim} != dA*dB = {dA * dB}")
    return w.matrix.reshape(dA, dB, dA, dB).transpose(0, 2, 1, 3).copy()


def assemble_blocks(parts: NDArray[np.complex128]) -> ComplexMatrix:
    """Inverse of `blocks`: reassemble a [dA, dA, dB, dB] array into a matrix"""
    dA, _, dB, _ = parts.shape
    return parts.transpose(0, 2, 1, 3).reshape(dA * dB, dA * dB)


def eigenvalues(h: HermitianOperator) -> NDArray[np.float64]:
    """Real eigenvalues in ascending order"""
    if not isinstance(h, HermitianOperator):
        h = HermitianOperator(as_complex_matrix(h))
    return np.linalg.eigvalsh(h.matrix)


def min_eigenvalue(matrix) -> float:
    """Smallest eigenvalue of the Hermitian part of `matrix`"""
    matrix = np.asarray(matrix, dtype=np.complex128)
    if matrix.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh(symmetrize(matrix))[0])


def partial_transpose_matrix(matrix: ComplexMatrix, dims: Sequence[int], sys: int) -> ComplexMatrix:
    """Transpose the indices of subsystem `sys` in a matrix on the product space"""
    dims = [int(d) for d in dims]
    if not 0 <= sys < len(dims):
        raise DimensionError(f"subsystem index {sys} out of range for {len(dims)} subsystems")
    n = len(dims)
    tensor = np.asarray(matrix).reshape(dims + dims)
    axes = list(range(2 * n))
    axes[sys], axes[n + sys] = axes[n + sys], axes[sys]
    total = int(np.prod(dims))
    return tensor.transpose(axes).reshape(total, total)


def partial_transpose(rho: DensityOperator, sys: int = 1) -> HermitianOperator:
    """Partial transpose of a bipartite state on subsystem `sys` (0 = A, 1 = B)"""
    if not rho.is_bipartite:
        raise DimensionError(f"partial transpose expects a bipartite state, got dims {list(rho.dims)}")
    return HermitianOperator(partial_transpose_matrix(rho.matrix, rho.dims, sys))


def is_psd(h: HermitianOperator, tol: float = 0.0) -> bool:
    return bool(eigenvalues(h)[0] >= -tol)


def trace_product(a: HermitianOperator, b: HermitianOperator) -> float:
    """Re Tr(AB)"""
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")
    # Tr(AB) = sum_ij A_ij B_ji
    value = np.sum(a.matrix * b.matrix.T)
    return float(np.real(value))


def real_embedding(matrix) -> NDArray[np.float64]:
    """Real symmetric image [[Re H, -Im H], [Im H, Re H]] of a Hermitian matrix.

    Leading axes are treated as a stack, so a (k, n, n) array maps to (k, 2n, 2n).
    """
    matrix = np.asarray(matrix)
    re, im = np.real(matrix), np.imag(matrix)
    top = np.concatenate([re, -im], axis=-1)
    bottom = np.concatenate([im, re], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def reorder_subsystems(matrix: ComplexMatrix, dims: Sequence[int], order: Sequence[int]) -> ComplexMatrix:
    """Permute tensor factors so that subsystem order[k] becomes the k-th factor"""
    dims = [int(d) for d in dims]
    n = len(dims)
    if sorted(order) != list(range(n)):
        raise DimensionError(f"{list(order)} is not a permutation of {n} subsystems")
    tensor = np.asarray(matrix).reshape(dims + dims)
    axes = list(order) + [n + k for k in order]
    total = int(np.prod(dims))
    return tensor.transpose(axes).reshape(total, total)


def random_unit_vector(rng: np.random.Generator, dim: int) -> NDArray[np.complex128]:
    """Haar-random complex unit vector (normalized complex Gaussian)"""
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)


def random_hermitian(rng: np.random.Generator, dim: int) -> ComplexMatrix:
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (z + z.conj().T) / 2


def dims_product(dims: Sequence[int]) -> int:
    return int(np.prod([int(d) for d in dims]))

