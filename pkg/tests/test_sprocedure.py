import numpy as np
import pytest
from numpy.testing import assert_allclose

from entanglement_compass.hermitian import (
    DimensionError,
    HermitianOperator,
    InvariantError,
    random_hermitian,
    random_unit_vector,
)
from entanglement_compass.lfr import build_delta, witness_lfr, witness_structure
from entanglement_compass.sdp import SolverStatus
from entanglement_compass.sprocedure import (
    InvalidMultiplierError,
    Multiplier,
    build_sprocedure_sdp,
    check_multiplier,
    detect_with_sprocedure,
    multiplier_condition,
    simple_multiplier,
    sprocedure_lmi,
)
from entanglement_compass.witness import VerdictKind, robust_constraint_matrix


def _quadratic_form(B, C, D, multiplier):
    """[[I, 0], [A, B], [0, I], [C, D]]^dagger Diag([[0, X], [X, 0]], P) [[...]] with A = 0, X = -I"""
    dB, n = B.shape
    outer = np.block([
        [np.eye(dB), np.zeros((dB, n))],
        [np.zeros((dB, dB)), B],
        [np.zeros((n, dB)), np.eye(n)],
        [C, D],
    ])
    x = -np.eye(dB)
    center = np.zeros((2 * dB + 2 * n, 2 * dB + 2 * n), dtype=np.complex128)
    center[:dB, dB:2 * dB] = x
    center[dB:2 * dB, :dB] = x
    center[2 * dB:, 2 * dB:] = multiplier.P
    return outer.conj().T @ center @ outer


def _pinned_multiplier(w, dA, dB):
    """Q = R = 0 with S pairing plain slot (j, i) and the a_j* slot skew-Hermitianly.

    Delta^dagger S + S^dagger Delta vanishes for every a, and the LMI pins the
    witness to `w`, so the problem is feasible whenever w^T_A is PSD.
    """
    parts = np.asarray(w, dtype=np.complex128).reshape(dA, dB, dA, dB).transpose(0, 2, 1, 3)
    plain = dA * dA * dB
    size = plain + dA * dB
    S = np.zeros((size, size), dtype=np.complex128)
    for j in range(dA):
        for i in range(dA):
            row = (j * dA + i) * dB
            col = plain + j * dB
            S[row:row + dB, col:col + dB] = parts[j, i]
            S[col:col + dB, row:row + dB] = -parts[i, j]
    zero = np.zeros((size, size))
    return Multiplier(zero, S, zero)


def _random_multiplier(rng, n):
    s = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return Multiplier(random_hermitian(rng, n), s, random_hermitian(rng, n))


class TestMultiplier:
    """Multiplier blocks and validity"""

    def test_simple_multiplier(self):
        p = simple_multiplier(12)
        assert p.size == 12
        assert p.is_simple
        assert_allclose(p.P, np.diag([-1.0] * 12 + [1.0] * 12))

    def test_from_matrix_round_trip(self, rng):
        p = _random_multiplier(rng, 3)
        again = Multiplier.from_matrix(HermitianOperator.from_data(p.P))
        assert_allclose(again.Q, p.Q)
        assert_allclose(again.S, p.S)
        assert_allclose(again.R, p.R)

    def test_odd_dimension(self):
        with pytest.raises(DimensionError):
            Multiplier.from_matrix(HermitianOperator(np.eye(3)))

    def test_non_hermitian_blocks(self):
        with pytest.raises(InvariantError, match="Q"):
            Multiplier(np.array([[0.0, 1.0], [0.0, 0.0]]), np.zeros((2, 2)), np.eye(2))

    def test_simple_multiplier_is_valid(self):
        ok, worst = check_multiplier(simple_multiplier(12), witness_structure(2, 2))
        assert ok
        assert worst == 0.0

    def test_simple_condition_on_unit_vectors(self, rng):
        structure = witness_structure(2, 2)
        p = simple_multiplier(structure.size)
        for _ in range(200):
            a = random_unit_vector(rng, 2)
            condition = multiplier_condition(p, build_delta(structure, a))
            assert np.linalg.eigvalsh(condition)[0] >= -1e-12

    def test_scaled_multiplier_is_sampled(self):
        eye = np.eye(12)
        p = Multiplier(-2 * eye, np.zeros((12, 12)), 2 * eye)
        assert not p.is_simple
        ok, worst = check_multiplier(p, witness_structure(2, 2), samples=200)
        assert ok
        assert worst >= -1e-9

    def test_sign_flipped_multiplier_fails(self):
        eye = np.eye(12)
        ok, worst = check_multiplier(Multiplier(eye, np.zeros((12, 12)), -eye), witness_structure(2, 2), samples=50)
        assert not ok
        assert worst == pytest.approx(-1.0)

    def test_size_mismatch(self):
        with pytest.raises(DimensionError):
            check_multiplier(simple_multiplier(5), witness_structure(2, 2))


class TestCompiledLMI:
    """The compiled quadratic-form LMI"""

    def test_matches_direct_quadratic_form(self, rng):
        for _ in range(10):
            w = HermitianOperator(random_hermitian(rng, 4))
            lfr = witness_lfr(w, 2, 2)
            p = _random_multiplier(rng, lfr.size)
            assert_allclose(sprocedure_lmi(lfr.B, lfr.C, lfr.D, p), _quadratic_form(lfr.B, lfr.C, lfr.D, p), atol=1e-12)

    def test_lmi_dimension(self, bell):
        problem = build_sprocedure_sdp(bell, simple_multiplier(12))
        assert problem.block_dims == [14]
        assert problem.num_vars == 16

    def test_requires_matching_multiplier(self, bell):
        with pytest.raises(DimensionError):
            build_sprocedure_sdp(bell, simple_multiplier(24))


class TestDetection:
    """S-procedure verdicts"""

    def test_simple_multiplier_is_inconclusive(self, bell):
        verdict = detect_with_sprocedure(bell)
        assert verdict.kind is VerdictKind.INCONCLUSIVE
        assert verdict.method == "sprocedure-infeasible"
        assert verdict.value == float("inf")
        assert verdict.witness is None
        assert verdict.solution.status is SolverStatus.INFEASIBLE

    def test_pinned_multiplier_is_optimal(self, rng, bell, bell_oew):
        p = _pinned_multiplier(bell_oew.matrix, 2, 2)
        ok, worst = check_multiplier(p, witness_structure(2, 2), samples=50)
        assert ok
        assert worst == pytest.approx(0.0, abs=1e-12)

        verdict = detect_with_sprocedure(bell, p, samples=50)
        assert verdict.solution.status is SolverStatus.OPTIMAL
        assert verdict.method == "sprocedure"
        assert verdict.is_entangled
        assert verdict.value >= -0.5 - 1e-6
        assert verdict.value == pytest.approx(-0.5, abs=1e-5)
        for _ in range(1000):
            a = random_unit_vector(rng, 2)
            constraint = robust_constraint_matrix(verdict.witness.matrix, a, 2, 2)
            assert np.linalg.eigvalsh(constraint)[0] >= -1e-7

    def test_scaled_multiplier_is_inconclusive(self, rho):
        eye = np.eye(12)
        verdict = detect_with_sprocedure(rho, Multiplier(-2 * eye, np.zeros((12, 12)), 2 * eye), samples=100)
        assert not verdict.is_entangled

    def test_invalid_multiplier(self, bell):
        eye = np.eye(12)
        with pytest.raises(InvalidMultiplierError, match="multiplier condition"):
            detect_with_sprocedure(bell, Multiplier(eye, np.zeros((12, 12)), -eye), samples=20)

    def test_wrong_multiplier_size(self, bell):
        with pytest.raises(InvalidMultiplierError, match="size"):
            detect_with_sprocedure(bell, simple_multiplier(8))

    def test_requires_bipartite(self, ghz):
        with pytest.raises(DimensionError):
            detect_with_sprocedure(ghz)
