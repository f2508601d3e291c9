import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from commbounds.linalg import (
    BlockPair,
    DimensionError,
    as_matrix,
    commutator,
    elementary,
    format_matrix,
    frobenius_norm_sq,
    is_diagonal,
    is_symmetric,
    offdiag_max_abs,
    parse_matrix,
    read_matrix,
    trace_inner_product,
    triangular_split,
    unvec,
    vec,
    write_matrix,
)

E = elementary

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def square(n_max=5):
    return st.integers(1, n_max).flatmap(lambda n: arrays(np.float64, (n, n), elements=finite))


def test_commutator_examples():
    assert np.array_equal(commutator(E(2, 1, 2), E(2, 2, 1)), E(2, 1, 1) - E(2, 2, 2))
    x = np.arange(9.0).reshape(3, 3)
    assert np.array_equal(commutator(x, x), np.zeros((3, 3)))
    got = commutator(np.diag([1.0, -1.0]), [[0, 1], [1, 0]])
    assert np.array_equal(got, [[0, 2], [-2, 0]])


def test_commutator_dimension_mismatch():
    with pytest.raises(DimensionError):
        commutator(np.eye(2), np.eye(3))


def test_norms_and_inner_product():
    assert frobenius_norm_sq(np.diag([2.0, 1.0])) == 5.0
    assert frobenius_norm_sq(np.zeros((3, 3))) == 0.0
    assert frobenius_norm_sq(E(2, 1, 1) - E(2, 2, 2)) == 2.0
    assert trace_inner_product(E(2, 1, 2), E(2, 1, 2)) == 1.0
    assert trace_inner_product(E(2, 1, 2), E(2, 2, 1)) == 0.0
    assert trace_inner_product(np.diag([2.0, 1.0]), np.diag([1.0, 3.0])) == 5.0


def test_elementary():
    assert np.array_equal(elementary(2, 1, 2), [[0, 1], [0, 0]])
    assert np.array_equal(elementary(2, 2, 1), [[0, 0], [1, 0]])
    m = elementary(3, 2, 2)
    assert m[1, 1] == 1.0 and m.sum() == 1.0
    for bad in [(2, 0, 1), (2, 3, 1), (2, 1, 3)]:
        with pytest.raises((IndexError, ValueError)):
            elementary(*bad)


def test_triangular_split_examples():
    d, u, l = triangular_split([[1, 2], [3, 4]])
    assert np.array_equal(d, np.diag([1, 4]))
    assert np.array_equal(u, [[0, 2], [0, 0]])
    assert np.array_equal(l, [[0, 0], [3, 0]])
    d, u, l = triangular_split(np.diag([1.0, 2.0, 3.0]))
    assert np.array_equal(d, np.diag([1.0, 2.0, 3.0])) and not u.any() and not l.any()
    d, u, l = triangular_split([[0, 1], [-1, 0]])
    assert not d.any() and np.array_equal(u, E(2, 1, 2)) and np.array_equal(l, -E(2, 2, 1))


def test_offdiag_max_abs():
    assert offdiag_max_abs([[5, 1], [-3, 5]]) == 3.0
    assert offdiag_max_abs(np.diag([4.0, -9.0])) == 0.0
    assert offdiag_max_abs(7 * E(3, 1, 2)) == 7.0
    assert offdiag_max_abs([[11.0]]) == 0.0


def test_constructor_rejects_bad_input():
    with pytest.raises(ValueError):
        as_matrix([[1.0, np.nan], [0, 1]])
    with pytest.raises(ValueError):
        as_matrix([[1.0, np.inf], [0, 1]])
    with pytest.raises(DimensionError):
        as_matrix(np.ones((2, 3)))


def test_matrices_are_read_only():
    m = as_matrix(np.eye(2))
    with pytest.raises(ValueError):
        m[0, 0] = 5.0


def test_vectorization_is_row_major():
    y = np.arange(9.0).reshape(3, 3)
    v = vec(y)
    assert v[1 * 3 + 2] == y[1, 2]
    assert np.array_equal(unvec(v, 3), y)


def test_block_pair_roundtrip(rng):
    b, c = rng.standard_normal((2, 3, 3))
    pair = BlockPair(b=b, c=c)
    v = pair.vec()
    assert np.array_equal(v[:9], c.ravel())  # C block first
    back = BlockPair.from_vec(v, 3)
    assert np.array_equal(back.b, b) and np.array_equal(back.c, c)
    assert pair.norm_sq() == pytest.approx(frobenius_norm_sq(b) + frobenius_norm_sq(c), rel=1e-14)
    with pytest.raises(DimensionError):
        BlockPair(b=np.eye(2), c=np.eye(3))


def test_predicates():
    assert is_symmetric([[1, 2], [2, 1]])
    assert not is_symmetric([[1, 2], [2.1, 1]])
    assert is_diagonal(np.diag([1.0, 2.0]))
    assert not is_diagonal([[1, 1e-3], [0, 1]])


def test_parse_text_and_json():
    text = "2\n1 2\n3 4\n"
    assert np.array_equal(parse_matrix(text), [[1, 2], [3, 4]])
    assert np.array_equal(parse_matrix(json.dumps([[1, 2], [3, 4]])), [[1, 2], [3, 4]])
    for bad in ["2\n1 2\n3\n", "3\n1 2\n3 4\n", "[[1, 2], [3]]", "2\n1 x\n3 4\n", ""]:
        with pytest.raises(ValueError):
            parse_matrix(bad)


def test_write_read_roundtrip_is_exact(tmp_path, rng):
    x = rng.standard_normal((4, 4)) * 1e-7
    path = tmp_path / "x.txt"
    write_matrix(path, x)
    assert np.array_equal(read_matrix(path), x)
    assert format_matrix(x).splitlines()[0] == "4"


@settings(max_examples=60, deadline=None)
@given(square(), st.data())
def test_commutator_antisymmetry_and_split_properties(x, data):
    n = x.shape[0]
    y = data.draw(arrays(np.float64, (n, n), elements=finite))
    assert np.array_equal(commutator(x, y), -commutator(y, x))
    d, u, l = triangular_split(y)
    assert np.array_equal(d + u + l, y)
    assert trace_inner_product(d, u) == 0.0
    assert trace_inner_product(u, l) == 0.0
    assert trace_inner_product(d, l) == 0.0
    assert offdiag_max_abs(y) <= np.max(np.abs(y))
