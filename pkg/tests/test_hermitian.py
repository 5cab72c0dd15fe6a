import numpy as np
import pytest
from numpy.testing import assert_allclose

from entanglement_compass.hermitian import (
    DensityOperator,
    DimensionError,
    HermitianOperator,
    InvariantError,
    assemble_blocks,
    block,
    blocks,
    eigenvalues,
    is_psd,
    kron,
    kron_all,
    min_eigenvalue,
    partial_transpose,
    partial_transpose_matrix,
    random_hermitian,
    real_embedding,
    reorder_subsystems,
    trace_product,
)


def _complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


class TestHermitianOperator:
    """Construction and invariants of Hermitian operators"""

    def test_rejects_non_hermitian(self):
        with pytest.raises(InvariantError, match="not Hermitian"):
            HermitianOperator(np.array([[1.0, 1e-6], [0.0, 1.0]]))

    def test_rejects_non_square(self):
        with pytest.raises(DimensionError, match="square"):
            HermitianOperator(np.zeros((2, 3)))

    def test_rejects_non_finite(self):
        with pytest.raises(InvariantError, match="finite"):
            HermitianOperator(np.array([[np.nan, 0.0], [0.0, 1.0]]))

    def test_from_data_symmetrizes_small_deviation(self):
        op = HermitianOperator.from_data([[1.0, 1e-10], [0.0, 2.0]])
        assert op.matrix[0, 1] == op.matrix[1, 0]
        assert op.trace() == pytest.approx(3.0)

    def test_matrix_is_read_only(self):
        op = HermitianOperator(np.eye(2))
        with pytest.raises(ValueError):
            op.matrix[0, 0] = 5.0

    def test_complex_off_diagonal(self):
        op = HermitianOperator(np.array([[1.0, 1j], [-1j, 1.0]]))
        assert op.dim == 2
        assert_allclose(eigenvalues(op), [0.0, 2.0], atol=1e-12)


class TestDensityOperator:
    """Trace, positivity and dimension invariants"""

    def test_trace_invariant(self):
        with pytest.raises(InvariantError, match="trace invariant"):
            DensityOperator.from_matrix(np.eye(4) * 0.9 / 4, (2, 2))

    def test_positivity_invariant(self):
        with pytest.raises(InvariantError, match="positivity invariant"):
            DensityOperator.from_matrix(np.diag([1.5, -0.5]), (2,))

    def test_dims_must_match(self):
        with pytest.raises(DimensionError):
            DensityOperator.from_matrix(np.eye(4) / 4, (2, 3))

    def test_subsystems_need_two_levels(self):
        with pytest.raises(InvariantError, match=">= 2"):
            DensityOperator.from_matrix(np.eye(2) / 2, (1, 2))

    def test_from_pure_normalizes(self):
        rho = DensityOperator.from_pure([3.0, 0.0, 0.0, 4.0], (2, 2))
        assert rho.op.trace() == pytest.approx(1.0)
        assert rho.is_bipartite
        assert rho.dim == 4


class TestLinearAlgebra:
    """Kronecker products, spectra and embeddings"""

    def test_kron_associative(self, rng):
        a, b, c = _complex(rng, (2, 2)), _complex(rng, (3, 3)), _complex(rng, (2, 2))
        assert_allclose(kron(kron(a, b), c), kron(a, kron(b, c)), atol=1e-12)
        assert_allclose(kron_all([a, b, c]), kron(a, kron(b, c)), atol=1e-12)

    def test_kron_mixed_product(self, rng):
        a, b = _complex(rng, (2, 3)), _complex(rng, (3, 2))
        c, d = _complex(rng, (3, 2)), _complex(rng, (2, 3))
        assert_allclose(kron(a, b) @ kron(c, d), kron(a @ c, b @ d), atol=1e-12)

    def test_eigenvalues_are_ascending(self, rng):
        h = HermitianOperator(random_hermitian(rng, 6))
        values = eigenvalues(h)
        assert np.all(np.diff(values) >= 0)
        assert values.sum() == pytest.approx(h.trace(), abs=1e-10)
        assert values[0] == pytest.approx(min_eigenvalue(h.matrix), abs=1e-12)
        # smallest singular value of H - lambda I is min ||Hv - lambda v|| over unit v
        for value in values:
            assert np.linalg.svd(h.matrix - value * np.eye(6), compute_uv=False)[-1] <= 1e-9

    def test_real_embedding_doubles_spectrum(self, rng):
        h = random_hermitian(rng, 5)
        embedded = real_embedding(h)
        assert_allclose(embedded, embedded.T)
        assert_allclose(np.linalg.eigvalsh(embedded), np.repeat(np.linalg.eigvalsh(h), 2), atol=1e-10)

    def test_real_embedding_of_a_stack(self, rng):
        stack = np.stack([random_hermitian(rng, 3) for _ in range(4)])
        embedded = real_embedding(stack)
        assert embedded.shape == (4, 6, 6)
        assert_allclose(embedded[2], real_embedding(stack[2]))

    def test_min_eigenvalue_and_psd(self):
        assert min_eigenvalue(np.diag([2.0, -1.0])) == pytest.approx(-1.0)
        assert is_psd(HermitianOperator(np.diag([0.0, 1.0])))
        assert not is_psd(HermitianOperator(np.diag([-1e-3, 1.0])))

    def test_trace_product(self, rng):
        a = HermitianOperator(random_hermitian(rng, 4))
        b = HermitianOperator(random_hermitian(rng, 4))
        assert trace_product(a, b) == pytest.approx(np.trace(a.matrix @ b.matrix).real, abs=1e-12)


class TestBlocks:
    """Block access W_ij = <i|_A W |j>_A"""

    def test_block_slices(self, rng):
        w = HermitianOperator(random_hermitian(rng, 6))
        assert_allclose(block(w, 0, 1, 2, 3), w.matrix[0:3, 3:6])
        assert_allclose(blocks(w, 2, 3)[1, 0], w.matrix[3:6, 0:3])

    def test_assemble_inverts_blocks(self, rng):
        w = HermitianOperator(random_hermitian(rng, 6))
        assert_allclose(assemble_blocks(blocks(w, 3, 2)), w.matrix)

    def test_block_index_out_of_range(self):
        with pytest.raises(DimensionError):
            block(HermitianOperator(np.eye(4)), 2, 0, 2, 2)


class TestPartialTranspose:
    """Partial transpose and subsystem reordering"""

    def test_bell_partial_transpose_spectrum(self, bell):
        assert_allclose(eigenvalues(partial_transpose(bell)), [-0.5, 0.5, 0.5, 0.5], atol=1e-12)

    def test_partial_transpose_is_involution(self, rng):
        m = _complex(rng, (6, 6))
        once = partial_transpose_matrix(m, (2, 3), 0)
        assert_allclose(partial_transpose_matrix(once, (2, 3), 0), m)

    def test_partial_transpose_of_product(self, rng):
        a, b = _complex(rng, (2, 2)), _complex(rng, (3, 3))
        assert_allclose(partial_transpose_matrix(kron(a, b), (2, 3), 1), kron(a, b.T), atol=1e-12)

    def test_reorder_subsystems(self, rng):
        a, b, c = _complex(rng, (2, 2)), _complex(rng, (3, 3)), _complex(rng, (2, 2))
        reordered = reorder_subsystems(kron_all([a, b, c]), (2, 3, 2), [2, 0, 1])
        assert_allclose(reordered, kron_all([c, a, b]), atol=1e-12)

    def test_reorder_rejects_non_permutation(self):
        with pytest.raises(DimensionError, match="permutation"):
            reorder_subsystems(np.eye(4), (2, 2), [0, 0])
