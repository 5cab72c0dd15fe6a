"""Linear fractional representations F(a) = A + B Delta (I - D Delta)^-1 C.

Delta is diagonal with every entry a parameter a_i or its conjugate a_i*,
each repeated a fixed number of times. The parameters a_i and a_i* are
treated as independent formal symbols and only linked when Delta is built.
"""

import functools
import logging
from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from .hermitian import DimensionError, HermitianOperator, InvariantError

logger = logging.getLogger(__name__)

ILL_POSED_LIMIT = 1e12


class IllPosedError(ArithmeticError):
    """I - D Delta is singular or too badly conditioned at the requested point"""


@dataclass(frozen=True)
class DeltaEntry:
    param: int
    conjugated: bool
    repetition: int


@dataclass(frozen=True)
class DeltaStructure:
    entries: Tuple[DeltaEntry, ...]

    def __post_init__(self):
        entries = tuple(e if isinstance(e, DeltaEntry) else DeltaEntry(int(e[0]), bool(e[1]), int(e[2]))
                        for e in self.entries)
        if not entries:
            raise InvariantError("an uncertainty structure needs at least one entry")
        for entry in entries:
            if entry.param < 0:
                raise InvariantError(f"parameter index {entry.param} is negative")
            if entry.repetition < 1:
                raise InvariantError(f"repetition {entry.repetition} for a_{entry.param} must be positive")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def of(cls, *entries) -> "DeltaStructure":
        return cls(tuple(entries))

    @property
    def size(self) -> int:
        return sum(e.repetition for e in self.entries)

    @property
    def num_params(self) -> int:
        return max(e.param for e in self.entries) + 1

    def concat(self, other: "DeltaStructure") -> "DeltaStructure":
        return DeltaStructure(self.entries + other.entries)

    def describe(self) -> str:
        return ", ".join(f"a{e.param}{'*' if e.conjugated else ''} x{e.repetition}" for e in self.entries)


def build_delta(structure: DeltaStructure, a) -> NDArray[np.complex128]:
    a = np.asarray(a, dtype=np.complex128).ravel()
    if a.size < structure.num_params:
        raise DimensionError(
            f"structure references {structure.num_params} parameters but {a.size} were supplied"
        )
    diagonal = np.concatenate([
        np.full(e.repetition, np.conj(a[e.param]) if e.conjugated else a[e.param])
        for e in structure.entries
    ])
    return np.diag(diagonal)


@dataclass(frozen=True, eq=False)
class LFR:
    """Matrix-valued rational function of the structured parameter Delta"""

    A: NDArray[np.complex128]
    B: NDArray[np.complex128]
    C: NDArray[np.complex128]
    D: NDArray[np.complex128]
    structure: DeltaStructure

    def __post_init__(self):
        A, B, C, D = (np.atleast_2d(np.asarray(m, dtype=np.complex128)) for m in (self.A, self.B, self.C, self.D))
        n, c = A.shape
        size = self.structure.size
        expected = {"B": (n, size), "C": (size, c), "D": (size, size)}
        for name, matrix in (("B", B), ("C", C), ("D", D)):
            if matrix.shape != expected[name]:
                raise DimensionError(f"LFR block {name} has shape {matrix.shape}, expected {expected[name]}")
        for name, matrix in (("A", A), ("B", B), ("C", C), ("D", D)):
            object.__setattr__(self, name, matrix)

    @classmethod
    def constant(cls, matrix) -> "LFR":
        """F(a) = M, carried on a single inert parameter slot"""
        A = np.atleast_2d(np.asarray(matrix, dtype=np.complex128))
        n, c = A.shape
        return cls(A, np.zeros((n, 1)), np.zeros((1, c)), np.zeros((1, 1)), DeltaStructure.of((0, False, 1)))

    @classmethod
    def scalar(cls, param: int, conjugated: bool = False, size: int = 1) -> "LFR":
        """F(a) = a_param I_size (or its conjugate)"""
        eye = np.eye(size)
        return cls(np.zeros((size, size)), eye, eye, np.zeros((size, size)),
                   DeltaStructure.of((param, conjugated, size)))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.A.shape

    @property
    def size(self) -> int:
        return self.structure.size

    def delta(self, a) -> NDArray[np.complex128]:
        return build_delta(self.structure, a)

    def eval(self, a) -> NDArray[np.complex128]:
        delta = self.delta(a)
        loop = np.eye(self.size) - self.D @ delta
        try:
            inverse = scipy.linalg.inv(loop)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise IllPosedError("I - D Delta is singular") from exc
        norm = np.linalg.norm(inverse, 2)
        if not np.isfinite(norm) or norm > ILL_POSED_LIMIT:
            raise IllPosedError(f"||(I - D Delta)^-1|| = {norm:.3e} exceeds {ILL_POSED_LIMIT:.0e}")
        return self.A + self.B @ delta @ inverse @ self.C


def add(f1: LFR, f2: LFR) -> LFR:
    if f1.shape != f2.shape:
        raise DimensionError(f"cannot add LFRs of shapes {f1.shape} and {f2.shape}")
    return LFR(
        f1.A + f2.A,
        np.hstack([f1.B, f2.B]),
        np.vstack([f1.C, f2.C]),
        scipy.linalg.block_diag(f1.D, f2.D),
        f1.structure.concat(f2.structure),
    )


def mul(f1: LFR, f2: LFR) -> LFR:
    if f1.shape[1] != f2.shape[0]:
        raise DimensionError(f"cannot multiply LFRs of shapes {f1.shape} and {f2.shape}")
    D = np.block([
        [f1.D, f1.C @ f2.B],
        [np.zeros((f2.size, f1.size)), f2.D],
    ])
    return LFR(
        f1.A @ f2.A,
        np.hstack([f1.B, f1.A @ f2.B]),
        np.vstack([f1.C @ f2.A, f2.C]),
        D,
        f1.structure.concat(f2.structure),
    )


def sum_lfrs(terms: Iterable[LFR]) -> LFR:
    return functools.reduce(add, terms)


def witness_structure(dA: int, dB: int) -> DeltaStructure:
    """Diag(a_1 I_{dA dB}, ..., a_dA I_{dA dB}, a_1* I_dB, ..., a_dA* I_dB)"""
    plain = [(i, False, dA * dB) for i in range(dA)]
    conjugate = [(i, True, dB) for i in range(dA)]
    return DeltaStructure(tuple(plain + conjugate))


def witness_lfr(w: HermitianOperator, dA: int, dB: int) -> LFR:
    """LFR of a -> sum_ij a_i* a_j W_ij with A = 0.

    The conjugate segment copies the input and scales it by a_i*; the plain
    segment, ordered by j then i, scales copy i by a_j. B then picks W_ij for
    the (j, i) slot, so D only links the plain rows to the conjugate columns
    and D Delta is nilpotent.
    """
    if w.dim != dA * dB:
        raise DimensionError(f"operator dimension {w.dim} != dA*dB = {dA * dB}")
    parts = w.matrix.reshape(dA, dB, dA, dB).transpose(0, 2, 1, 3)
    plain_size = dA * dA * dB
    size = plain_size + dA * dB

    B = np.zeros((dB, size), dtype=np.complex128)
    for j in range(dA):
        for i in range(dA):
            start = (j * dA + i) * dB
            B[:, start:start + dB] = parts[i, j]
    C = np.vstack([np.zeros((plain_size, dB)), np.kron(np.ones((dA, 1)), np.eye(dB))])
    D = np.zeros((size, size), dtype=np.complex128)
    D[:plain_size, plain_size:] = np.kron(np.ones((dA, 1)), np.eye(dA * dB))
    lfr = LFR(np.zeros((dB, dB)), B, C, D, witness_structure(dA, dB))
    logger.debug(f"Witness LFR for {dA}x{dB}: N = {size} ({lfr.structure.describe()})")
    return lfr


def witness_lfr_composed(w: HermitianOperator, dA: int, dB: int) -> LFR:
    """The same function assembled term by term as sum_ij {a_i*} x {W_ij a_j}"""
    if w.dim != dA * dB:
        raise DimensionError(f"operator dimension {w.dim} != dA*dB = {dA * dB}")
    parts = w.matrix.reshape(dA, dB, dA, dB).transpose(0, 2, 1, 3)
    terms = (
        mul(LFR.scalar(i, conjugated=True, size=dB), mul(LFR.constant(parts[i, j]), LFR.scalar(j, size=dB)))
        for i in range(dA)
        for j in range(dA)
    )
    return sum_lfrs(terms)


def is_nilpotent(matrix, tol: float = 1e-12) -> bool:
    """M^n == 0 for an n x n matrix M"""
    matrix = np.asarray(matrix, dtype=np.complex128)
    power = np.linalg.matrix_power(matrix, matrix.shape[0])
    return bool(np.max(np.abs(power), initial=0.0) <= tol)
