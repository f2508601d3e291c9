import numpy as np
import pytest

from commbounds.linalg import frobenius_norm_sq
from commbounds.operators import t_apply, t_materialize, tilde_apply, tilde_materialize
from commbounds.linalg import BlockPair, elementary, vec
from commbounds.spectral import (
    ConvergenceError,
    clusters,
    power_iteration,
    singular_values,
    svd,
    symmetric_eigen,
)

BACKENDS = ["numpy", "numba"]


def _haar(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


@pytest.mark.parametrize("backend", BACKENDS)
def test_eigen_examples(backend):
    e = symmetric_eigen(np.diag([3.0, 1.0]), backend=backend)
    assert np.array_equal(e.values, [3.0, 1.0])
    assert np.array_equal(e.vectors, np.eye(2))
    e = symmetric_eigen([[0, 1], [1, 0]], backend=backend)
    assert np.allclose(e.values, [1.0, -1.0], atol=1e-15)
    e = symmetric_eigen(tilde_materialize([2.0, 1.0]), backend=backend)
    assert np.allclose(e.values, [8, 5, 5, 2, 0, 0, 0, 0], atol=1e-12)


def test_eigen_rejects_nonsymmetric():
    with pytest.raises(ValueError):
        symmetric_eigen([[1.0, 2.0], [0.0, 1.0]])


@pytest.mark.parametrize("backend", BACKENDS)
def test_eigen_invariants(backend, rng):
    a = rng.standard_normal((10, 10))
    m = a + a.T
    e = symmetric_eigen(m, backend=backend)
    scale = max(1.0, np.linalg.norm(m))
    assert np.all(np.linalg.norm(m @ e.vectors - e.vectors * e.values, axis=0) <= 1e-10 * scale)
    assert np.allclose(e.vectors.T @ e.vectors, np.eye(10), atol=1e-10)
    assert np.all(np.diff(e.values) <= 0)


def test_degenerate_cluster_ordering_is_deterministic():
    # identity: every vector is a cluster member; basis order by leading index
    e = symmetric_eigen(np.eye(4))
    assert np.array_equal(e.vectors, np.eye(4))
    # same eigenspace from two different rotations gives the same report
    m = tilde_materialize([2.0, 1.0])
    a = symmetric_eigen(m, backend="numpy")
    b = symmetric_eigen(m, backend="numba")
    assert np.allclose(a.values, b.values, atol=1e-12)
    for k in range(a.vectors.shape[1]):
        lead = np.argmax(np.abs(a.vectors[:, k]))
        assert a.vectors[lead, k] > 0


def test_clusters():
    assert clusters(np.array([5.0, 5.0, 2.0, 0.0, 0.0]), 1e-9) == [[0, 1], [2], [3, 4]]


@pytest.mark.parametrize("backend", BACKENDS)
def test_svd_examples(backend):
    assert np.array_equal(svd(np.diag([3.0, 1.0]), backend=backend).sigma, [3.0, 1.0])
    assert np.array_equal(svd([[0, 2], [0, 0]], backend=backend).sigma, [2.0, 0.0])
    assert np.array_equal(svd(np.zeros((3, 3)), backend=backend).sigma, [0.0, 0.0, 0.0])


@pytest.mark.parametrize("backend", BACKENDS)
def test_svd_reconstruction_seeded(backend):
    x = np.random.default_rng(5).standard_normal((5, 5))
    d = svd(x, backend=backend)
    assert np.linalg.norm(d.reconstruct() - x) <= 1e-12 * np.linalg.norm(x)
    assert np.allclose(d.q1.T @ d.q1, np.eye(5), atol=1e-12)
    assert np.allclose(d.q2 @ d.q2.T, np.eye(5), atol=1e-12)


def test_svd_rank_deficient_keeps_orthogonal_factors(rng):
    u = rng.standard_normal((6, 2))
    x = u @ rng.standard_normal((2, 6))
    d = svd(x)
    assert np.count_nonzero(d.sigma) == 2
    assert np.allclose(d.q1.T @ d.q1, np.eye(6), atol=1e-12)
    assert np.linalg.norm(d.reconstruct() - x) <= 1e-12 * np.linalg.norm(x)


def test_eigen_matches_svd_on_psd(rng):
    a = rng.standard_normal((7, 7))
    m = a @ a.T
    assert np.allclose(symmetric_eigen(m).values, svd(m).sigma, atol=1e-10)


def test_singular_values_orthogonally_invariant(rng):
    x = rng.standard_normal((6, 6))
    o1, o2 = _haar(rng, 6), _haar(rng, 6)
    assert np.allclose(singular_values(o1 @ x @ o2), singular_values(x), atol=1e-10)


def test_singular_values_square_sum_is_frobenius(rng):
    x = rng.standard_normal((9, 9))
    assert np.sum(singular_values(x) ** 2) == pytest.approx(frobenius_norm_sq(x), rel=1e-12)


def test_power_iteration_on_t_operator():
    x = elementary(2, 1, 2)
    res = power_iteration(lambda v: vec(t_apply(x, v.reshape(2, 2))), 4)
    dense = symmetric_eigen(t_materialize(x)).values[0]
    assert res.value == pytest.approx(dense, abs=1e-8)
    assert res.value == pytest.approx(2.0, abs=1e-8)


def test_power_iteration_zero_operator():
    res = power_iteration(lambda v: 0.0 * v, 5)
    assert res.value == 0.0
    assert np.linalg.norm(res.vector) == pytest.approx(1.0)


def test_power_iteration_deflated_block_operator():
    lam = [2.0, 1.0]
    top = BlockPair(elementary(2, 1, 1), -elementary(2, 1, 1)).vec() / np.sqrt(2.0)

    def apply(v):
        return tilde_apply(lam, BlockPair.from_vec(v, 2)).vec()

    res = power_iteration(apply, 8, deflate_against=[top])
    assert res.value == pytest.approx(5.0, abs=1e-8)
    assert abs(res.vector @ top) <= 1e-12


def test_power_iteration_cap_raises():
    m = np.diag([1.0, 1.0 - 1e-12, 0.5])
    with pytest.raises(ConvergenceError) as info:
        power_iteration(lambda v: m @ v, 3, tol=1e-300, max_iter=5)
    assert np.isfinite(info.value.residual)
