"""Symmetric eigendecomposition, SVD and power iteration.

The heavy lifting is in :mod:`commbounds.kernels`; this module fixes the
reporting conventions (descending order, deterministic vectors inside
degenerate clusters, clamped tiny singular values) and raises
:class:`ConvergenceError` when a solver gives up.
"""

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import kernels
from .linalg import as_matrix, is_symmetric

CLUSTER_GAP = 1e-9
SIGMA_CLAMP = 1e-13
_START_KEY = 0x5EED


class ConvergenceError(RuntimeError):
    """A solver hit its iteration cap; ``residual`` is the last measured one."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class EigenResult:
    values: np.ndarray  # (m,), descending up to cluster ties
    vectors: np.ndarray  # (m, m), vectors[:, k] pairs with values[k]
    sweeps: int = 0


@dataclass(frozen=True)
class SvdResult:
    """``x == q1 @ diag(sigma) @ q2`` with orthogonal ``q1`` and ``q2``."""

    q1: np.ndarray
    sigma: np.ndarray
    q2: np.ndarray
    sweeps: int = 0

    def reconstruct(self):
        return (self.q1 * self.sigma) @ self.q2


def clusters(values, gap):
    """Split descending ``values`` into runs whose consecutive gaps are < gap."""
    groups = []
    start = 0
    for k in range(1, len(values) + 1):
        if k == len(values) or values[k - 1] - values[k] >= gap:
            groups.append(list(range(start, k)))
            start = k
    return groups


def _lead_signs(vectors):
    lead = np.argmax(np.abs(vectors), axis=0)
    signs = np.where(vectors[lead, np.arange(vectors.shape[1])] < 0, -1.0, 1.0)
    return signs, lead


def symmetric_eigen(m, backend=None):
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi.

    Values come back descending. Inside a cluster of numerically coincident
    values (gap below ``1e-9 * ||m||``) the vectors are ordered by the index of
    their largest-magnitude component, and every vector is signed so that
    this component is positive. Each vector stays paired with its own value,
    so within such a cluster the values may be out of order by less than the
    cluster gap.
    """
    m = as_matrix(m)
    if not is_symmetric(m):
        raise ValueError("symmetric_eigen needs a symmetric matrix (entrywise 1e-12)")
    m = 0.5 * (m + m.T)
    values, vectors, sweeps, off = kernels.eigh(m, backend=backend)
    if sweeps < 0:
        raise ConvergenceError("Jacobi eigensolver did not converge", off)
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]
    signs, lead = _lead_signs(vectors)
    vectors = vectors * signs
    scale = float(np.sqrt(np.sum(m * m)))
    final = []
    for group in clusters(values, CLUSTER_GAP * scale):
        final.extend(sorted(group, key=lambda k: lead[k]))
    final = np.array(final, dtype=np.intp)
    return EigenResult(values=values[final], vectors=vectors[:, final], sweeps=sweeps)


def _complete_basis(q, missing):
    """Fill columns ``missing`` of ``q`` with an orthonormal completion."""
    n = q.shape[0]
    have = [k for k in range(q.shape[1]) if k not in set(missing)]
    for col in missing:
        basis = q[:, have]
        best, best_norm = None, -1.0
        for e in np.eye(n):
            r = e - basis @ (basis.T @ e)
            r = r - basis @ (basis.T @ r)
            nr = np.linalg.norm(r)
            if nr > best_norm + 1e-12:
                best, best_norm = r, nr
        q[:, col] = best / best_norm
        have.append(col)
    return q


def svd(x, backend=None):
    """SVD ``x = q1 @ diag(sigma) @ q2`` via one-sided Jacobi.

    ``sigma`` is descending; values below ``1e-13 * sigma[0]`` are clamped to
    exactly zero and the matching columns of ``q1`` are replaced by an
    orthonormal completion.
    """
    x = as_matrix(x)
    w, v, sweeps, worst = kernels.svd(x, backend=backend)
    if sweeps < 0:
        raise ConvergenceError("one-sided Jacobi SVD did not converge", worst)
    sigma = np.sqrt(np.sum(w * w, axis=0))
    order = np.argsort(-sigma, kind="stable")
    sigma, w, v = sigma[order], w[:, order], v[:, order]
    top = sigma[0] if sigma.size else 0.0
    dead = np.nonzero(sigma <= SIGMA_CLAMP * top)[0] if top > 0 else np.arange(sigma.size)
    sigma = sigma.copy()
    sigma[dead] = 0.0
    q1 = np.zeros_like(w)
    alive = sigma > 0
    q1[:, alive] = w[:, alive] / sigma[alive]
    if dead.size:
        q1 = _complete_basis(q1, list(dead))
    # leading component of each right singular vector positive
    signs, _ = _lead_signs(v)
    v = v * signs
    q1[:, alive] *= signs[alive]
    return SvdResult(q1=q1, sigma=sigma, q2=v.T.copy(), sweeps=sweeps)


def singular_values(x, backend=None):
    return svd(x, backend=backend).sigma


class PowerResult(NamedTuple):
    value: float
    vector: np.ndarray
    iterations: int
    residual: float


def power_iteration(
    apply: Callable[[np.ndarray], np.ndarray],
    dim: int,
    deflate_against: Sequence[np.ndarray] = (),
    *,
    seed: int = 0,
    tol: float = 1e-9,
    max_iter: int = 200_000,
) -> PowerResult:
    """Dominant eigenpair of a symmetric PSD operator on a deflated subspace.

    The iterate is kept orthogonal to ``deflate_against`` (assumed
    orthonormal) at every step. Stops once ``||Av - lam v|| <= tol *
    max(1, lam)``.
    """
    basis = np.array([np.asarray(b, dtype=np.float64).ravel() for b in deflate_against])
    basis = basis.reshape(len(deflate_against), dim)

    def project(u):
        if basis.size:
            u = u - basis.T @ (basis @ u)
            u = u - basis.T @ (basis @ u)
        return u

    # a keyed substream, so the start never coincides with data drawn from seed
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_START_KEY,)))
    v = project(rng.standard_normal(dim))
    nv = np.linalg.norm(v)
    if nv == 0.0:
        raise ValueError("deflation set spans the whole space")
    v = v / nv
    residual = np.inf
    for it in range(1, max_iter + 1):
        w = project(np.asarray(apply(v), dtype=np.float64).ravel())
        lam = float(v @ w)
        residual = float(np.linalg.norm(w - lam * v))
        if residual <= tol * max(1.0, lam):
            return PowerResult(lam, v, it, residual)
        nw = np.linalg.norm(w)
        v = w / nw
    raise ConvergenceError(f"power iteration stalled after {max_iter} steps", residual)
