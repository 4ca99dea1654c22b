import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from icseg.hilbert import DimensionError, as_vector, axpy_combine, inner, norm

# iterates are O(1); keep clear of the underflow range where squaring gives 0
finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False).map(
    lambda v: 0.0 if abs(v) < 1e-100 else v)


def vec_pair(dim=st.integers(1, 8)):
    return dim.flatmap(lambda d: st.tuples(arrays(np.float64, d, elements=finite),
                                           arrays(np.float64, d, elements=finite)))


def test_inner_examples():
    assert inner(np.array([1.0, 2.0]), np.array([3.0, 4.0])) == 11.0
    assert inner(np.array([5.0, -2.0]), np.zeros(2)) == 0.0
    assert inner(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0


def test_inner_dimension_mismatch():
    with pytest.raises(DimensionError):
        inner(np.ones(2), np.ones(3))


def test_norm_examples():
    assert norm(np.array([3.0, 4.0])) == 5.0
    assert norm(np.zeros(4)) == 0.0
    assert norm(np.array([1.0])) == 1.0


def test_axpy_combine_examples():
    a, b = np.array([2.0, 2.0]), np.array([1.0, 1.0])
    np.testing.assert_array_equal(axpy_combine([1, -1], [a, b]), [1.0, 1.0])
    v = np.array([0.3, -7.0, 2.5])
    np.testing.assert_array_equal(axpy_combine([1.0], [v]), v)
    np.testing.assert_array_equal(axpy_combine([0, 0], [a, b]), [0.0, 0.0])
    with pytest.raises(DimensionError):
        axpy_combine([1, 1], [a, np.ones(3)])
    with pytest.raises(ValueError):
        axpy_combine([1], [a, b])


def test_as_vector_is_read_only_and_finite():
    v = as_vector([1, 2, 3])
    assert v.dtype == np.float64 and v.shape == (3,)
    with pytest.raises(ValueError):
        v[0] = 5.0
    with pytest.raises(ValueError):
        as_vector([1.0, np.nan])
    with pytest.raises(ValueError):
        as_vector([[1.0, 2.0]])


@given(vec_pair())
def test_cauchy_schwarz(ab):
    a, b = ab
    assert abs(inner(a, b)) <= norm(a) * norm(b) * (1 + 1e-12) + 1e-300


@given(vec_pair())
def test_polarization_identity(ab):
    a, b = ab
    lhs = 2 * inner(a, b)
    rhs = norm(a) ** 2 + norm(b) ** 2 - norm(a - b) ** 2
    scale = max(1.0, norm(a) ** 2 + norm(b) ** 2)
    assert abs(lhs - rhs) <= 1e-10 * scale


@settings(max_examples=200)
@given(vec_pair(), st.floats(-5, 5))
def test_affine_combination_identity(sz, b):
    # ||(1+b)s - bz||^2 = (1+b)||s||^2 - b||z||^2 + b(1+b)||s-z||^2 for every real b
    s, z = sz
    lhs = norm((1 + b) * s - b * z) ** 2
    rhs = (1 + b) * norm(s) ** 2 - b * norm(z) ** 2 + b * (1 + b) * norm(s - z) ** 2
    scale = max(1.0, (1 + abs(b)) ** 2 * (norm(s) ** 2 + norm(z) ** 2))
    assert abs(lhs - rhs) <= 1e-10 * scale


@given(vec_pair(), st.floats(0, 1))
def test_convex_combination_identity(sz, beta):
    s, z = sz
    lhs = norm((1 - beta) * s + beta * z) ** 2
    rhs = (1 - beta) * norm(s) ** 2 + beta * norm(z) ** 2 - beta * (1 - beta) * norm(s - z) ** 2
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, norm(s) ** 2 + norm(z) ** 2)
