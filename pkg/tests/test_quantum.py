import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_orthonormal
from qpcaclf.exceptions import DimensionError, NormalizationError, ZeroProbabilityError
from qpcaclf.quantum import (
    MAX_DENSE_DIM,
    ProjectorOperator,
    StateVector,
    binary_measurement,
    collapse,
    direct_sum,
    inner_product,
    measure,
    outcome_probability,
    tensor_product,
)

R2 = 1 / math.sqrt(2)


def ket(i, dim=2):
    return StateVector.basis(i, dim)


class TestInnerProduct:
    def test_basis(self):
        assert inner_product(ket(0), ket(0)) == 1
        assert inner_product(ket(0), ket(1)) == 0

    def test_hand_value(self):
        # 0.8*0.6 + 0.6*0.8
        assert inner_product([0.6, 0.8], [0.8, 0.6]) == pytest.approx(0.96, abs=1e-15)

    def test_conjugates_second_argument(self):
        a, b = [1j, 0], [1, 0]
        assert inner_product(a, b) == 1j
        assert inner_product(b, a) == -1j

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            inner_product([1, 0], [1, 0, 0])

    @given(st.integers(1, 16), st.integers(0, 2**32 - 1))
    def test_conjugate_symmetry(self, dim, seed):
        rng = np.random.default_rng(seed)
        a = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        b = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        assert inner_product(a, b) == pytest.approx(inner_product(b, a).conjugate())


class TestTensorAndDirectSum:
    def test_tensor_examples(self):
        np.testing.assert_array_equal(tensor_product(ket(0), ket(0)).amplitudes, [1, 0, 0, 0])
        np.testing.assert_allclose(
            tensor_product([1, 0], [0.6, 0.8]).amplitudes, [0.6, 0.8, 0, 0]
        )
        np.testing.assert_allclose(
            tensor_product([0.6, 0.8], [0.8, 0.6]).amplitudes,
            [0.48, 0.36, 0.64, 0.48],
            atol=1e-15,
        )

    def test_direct_sum_examples(self):
        np.testing.assert_array_equal(direct_sum([[1, 0]], 1.0).amplitudes, [1, 0])
        np.testing.assert_allclose(
            direct_sum([[1, 0], [0, 1]], R2).amplitudes, [R2, 0, 0, R2]
        )
        np.testing.assert_allclose(
            direct_sum([[0.6, 0.8], [1, 0]], R2).amplitudes,
            [0.6 * R2, 0.8 * R2, R2, 0],
        )

    def test_direct_sum_empty(self):
        with pytest.raises(DimensionError):
            direct_sum([])

    @given(
        st.lists(st.integers(1, 16), min_size=1, max_size=6),
        st.integers(0, 2**32 - 1),
    )
    def test_dimension_bookkeeping(self, dims, seed):
        rng = np.random.default_rng(seed)
        states = [StateVector(rng.standard_normal(d)).normalized() for d in dims]
        ds = direct_sum(states, 1 / math.sqrt(len(states)))
        assert ds.dim == sum(dims)
        assert ds.is_normalized()
        t = states[0]
        for s in states[1:3]:
            t = tensor_product(t, s)
        assert t.dim == math.prod(dims[:3])
        assert t.is_normalized()

    @given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 2**32 - 1))
    def test_tensor_index_rule(self, da, db, seed):
        rng = np.random.default_rng(seed)
        a, b = rng.standard_normal(da), rng.standard_normal(db)
        t = tensor_product(a, b).amplitudes
        for i in range(da):
            for j in range(db):
                assert t[i * db + j] == a[i] * b[j]


class TestMeasurement:
    def test_probability_examples(self):
        p0 = ProjectorOperator.from_vectors([ket(0)])
        assert outcome_probability(p0, [0.6, 0.8]) == pytest.approx(0.36, abs=1e-15)
        assert outcome_probability(ProjectorOperator.identity(2), [0.6, 0.8]) == pytest.approx(1.0)
        p01 = ProjectorOperator.from_vectors([ket(0, 3), ket(1, 3)])
        assert outcome_probability(p01, [0, 0, 1]) == 0.0

    def test_unnormalized_rejected(self):
        p0 = ProjectorOperator.from_vectors([ket(0)])
        with pytest.raises(NormalizationError):
            outcome_probability(p0, [1, 1])

    def test_collapse_examples(self):
        p0 = ProjectorOperator.from_vectors([ket(0)])
        out = collapse(p0, [0.6, 0.8])
        np.testing.assert_allclose(out.post_state.amplitudes, [1, 0])
        assert out.probability == pytest.approx(0.36)

        phi = StateVector([0.6, 0.8])
        out = collapse(ProjectorOperator.identity(2), phi)
        np.testing.assert_allclose(out.post_state.amplitudes, phi.amplitudes)
        assert out.probability == pytest.approx(1.0)

        p01 = ProjectorOperator.from_vectors([ket(0, 3), ket(1, 3)])
        out = collapse(p01, [0.6, 0, 0.8])
        np.testing.assert_allclose(out.post_state.amplitudes, [1, 0, 0], atol=1e-15)
        assert out.probability == pytest.approx(0.36)

    def test_zero_probability_collapse(self):
        p0 = ProjectorOperator.from_vectors([ket(0)])
        with pytest.raises(ZeroProbabilityError):
            collapse(p0, [0, 1])

    def test_dense_refused_above_limit(self):
        big = ProjectorOperator(MAX_DENSE_DIM + 1, [StateVector.basis(0, MAX_DENSE_DIM + 1)])
        with pytest.raises(DimensionError):
            big.to_dense()
        # the Gram form still works without materializing anything
        phi = StateVector.basis(0, MAX_DENSE_DIM + 1)
        assert outcome_probability(big, phi) == 1.0

    def test_non_orthonormal_basis_rejected(self):
        with pytest.raises(NormalizationError):
            ProjectorOperator.from_vectors([[1, 0], [R2, R2]])

    def test_from_matrix_validates(self):
        with pytest.raises(NormalizationError):
            ProjectorOperator.from_matrix([[1, 0.5], [0.5, 0]])
        p = ProjectorOperator.from_matrix([[1, 0], [0, 0]])
        assert p.rank == 1

    def test_measure_samples_and_collapses(self, rng):
        p = ProjectorOperator.from_vectors([ket(0)])
        outcomes = [
            measure(binary_measurement(p), [0.6, 0.8], rng).label for _ in range(4000)
        ]
        freq = outcomes.count("yes") / len(outcomes)
        assert abs(freq - 0.36) < 4 * math.sqrt(0.36 * 0.64 / 4000)

    @settings(max_examples=50)
    @given(st.integers(2, 64), st.integers(0, 2**32 - 1), st.booleans())
    def test_dense_gram_equivalence(self, dim, seed, cplx):
        rng = np.random.default_rng(seed)
        count = int(rng.integers(1, min(8, dim) + 1))
        basis = random_orthonormal(rng, count, dim, cplx)
        gram = ProjectorOperator(dim, basis)
        dense = gram.dense()
        phi = StateVector(rng.standard_normal(dim) + 1j * rng.standard_normal(dim)).normalized()
        assert abs(outcome_probability(gram, phi) - outcome_probability(dense, phi)) <= 1e-10
        comp = gram.complement_projector()
        assert abs(
            outcome_probability(comp, phi) - outcome_probability(dense.complement_projector(), phi)
        ) <= 1e-10

    @settings(max_examples=50)
    @given(st.integers(2, 32), st.integers(0, 2**32 - 1))
    def test_repeatability_and_completeness(self, dim, seed):
        rng = np.random.default_rng(seed)
        count = int(rng.integers(1, dim))
        p = ProjectorOperator(dim, random_orthonormal(rng, count, dim))
        phi = StateVector(rng.standard_normal(dim)).normalized()
        yes, no = binary_measurement(p).values()
        assert abs(outcome_probability(yes, phi) + outcome_probability(no, phi) - 1) <= 1e-12
        post = collapse(p, phi).post_state
        assert abs(outcome_probability(p, post) - 1) <= 1e-10


def test_state_vector_is_immutable():
    s = StateVector([1, 0])
    with pytest.raises(AttributeError):
        s.amplitudes = None
    with pytest.raises(ValueError):
        s.amplitudes[0] = 2
