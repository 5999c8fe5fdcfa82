import numpy as np
import pytest
from hypothesis import given, strategies as st

from dirackit.subspaces import (
    DimensionError,
    PontryaginSpace,
    big_orthogonal,
    biannihilator,
    complement_in,
    image,
    intersect,
    is_subset,
    null_space,
    numerical_rank,
    orthogonal_complement,
    partial_annihilator,
    preimage,
    span,
    subspace_equal,
    subspace_residual,
    sum_,
    whole,
    zero,
)


def random_subspace(rng, n, k):
    return span(list(rng.normal(size=(k, n))), n)


def test_span_drops_dependent_vectors():
    S = span([[1, 0, 0], [2, 0, 0], [0, 1, 0]], 3)
    assert S.dim == 2
    assert S.contains([3, -1, 0])
    assert not S.contains([0, 0, 1])


def test_span_rejects_wrong_length():
    with pytest.raises(DimensionError):
        span([[1, 0]], 3)


def test_rank_is_relative_to_largest_singular_value():
    assert numerical_rank(np.diag([1e6, 1.0, 1e-3])) == 3
    assert numerical_rank(np.diag([1e6, 1.0, 1e-5])) == 2
    assert numerical_rank(np.diag([1.0, 1e-12])) == 1
    assert numerical_rank(np.zeros((2, 2))) == 0


def test_null_space_rows_are_orthonormal_kernel():
    M = np.array([[1.0, 1.0, 0.0]])
    K = null_space(M)
    assert K.shape == (2, 3)
    assert np.allclose(M @ K.T, 0)
    assert np.allclose(K @ K.T, np.eye(2))


def test_intersection_of_coordinate_planes():
    X = span([[1, 0, 0], [0, 1, 0]], 3)
    Y = span([[0, 1, 0], [0, 0, 1]], 3)
    Z = intersect(X, Y)
    assert Z.dim == 1
    assert subspace_equal(Z, span([[0, 1, 0]], 3))


def test_complement_and_orthogonal_complement():
    X = span([[1, 1, 0]], 3)
    C = orthogonal_complement(X)
    assert C.dim == 2
    assert subspace_equal(sum_(X, C), whole(3))
    Y = span([[1, 1, 0], [0, 0, 1]], 3)
    Q = complement_in(X, Y)
    assert Q.dim == 1 and is_subset(Q, Y)


def test_image_and_preimage():
    M = np.array([[1.0, 0, 0], [0, 0, 0]])
    assert image(M, whole(3)).dim == 1
    pre = preimage(M, zero(2))
    assert subspace_equal(pre, span([[0, 1, 0], [0, 0, 1]], 3))


def test_pairing_must_have_full_row_rank():
    with pytest.raises(ValueError):
        PontryaginSpace(2, np.array([[1.0, 0], [2.0, 0]]))


def test_partial_annihilator_and_biannihilator_on_proper_dual():
    P = PontryaginSpace(3, np.array([[1.0, 0, 0], [0, 1.0, 0]]))
    F = span([[1, 0, 0]], 3)
    F0 = partial_annihilator(F, P)
    assert subspace_equal(F0, span([[0, 1]], 2))
    # The biannihilator is strictly bigger than F: e3 is invisible to E♭.
    assert subspace_equal(biannihilator(F0, P), span([[1, 0, 0], [0, 0, 1]], 3))


@given(st.integers(0, 10_000), st.integers(1, 7), st.integers(0, 7), st.integers(0, 7))
def test_dimension_formula_for_sum_and_intersection(seed, n, a, b):
    rng = np.random.default_rng(seed)
    X = random_subspace(rng, n, min(a, n))
    Y = random_subspace(rng, n, min(b, n))
    assert intersect(X, Y).dim + sum_(X, Y).dim == X.dim + Y.dim


@given(st.integers(0, 10_000), st.integers(1, 7), st.integers(0, 7))
def test_full_dual_annihilator_dimension_and_biannihilator(seed, n, k):
    rng = np.random.default_rng(seed)
    P = PontryaginSpace(n, rng.normal(size=(n, n)) + 3 * np.eye(n))
    X = random_subspace(rng, n, min(k, n))
    X0 = partial_annihilator(X, P)
    assert X0.dim == n - X.dim
    assert subspace_residual(biannihilator(X0, P), X) <= 1e-8


@given(st.integers(0, 10_000), st.integers(1, 5), st.integers(0, 10))
def test_big_orthogonal_is_an_involution(seed, n, k):
    rng = np.random.default_rng(seed)
    P = PontryaginSpace.full_dual(n)
    D = random_subspace(rng, 2 * n, min(k, 2 * n))
    Dp = big_orthogonal(D, P)
    assert D.dim + Dp.dim == 2 * n
    assert subspace_residual(big_orthogonal(Dp, P), D) <= 1e-8
