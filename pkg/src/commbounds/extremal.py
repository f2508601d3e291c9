"""Maximizing ``||[X, Y]||`` over unit ``Y`` and the steps around it.

The maximum of ``||[X, Y]||^2`` on the unit sphere is the top eigenvalue of
``T_X``, attained at a top eigenvector. Besides finding it, this module checks
the structural facts used when bounding that eigenvalue: the transposed
commutator ``[X^T, Y^T]`` is a second eigenvector, and the SVD change of
variables carries the problem to the block operator, where a combination of
the two eigenvectors can be made orthogonal to its top eigenvector.
"""

import json
from dataclasses import dataclass

import numpy as np

from . import kernels
from .linalg import (
    BlockPair,
    _pair,
    as_matrix,
    commutator,
    elementary,
    frobenius_norm,
    frobenius_norm_sq,
    matrix_to_json,
    trace_inner_product,
    unvec,
    vec,
)
from .operators import block_commutator_norm_sq, t_apply, t_materialize
from .spectral import ConvergenceError, power_iteration, svd, symmetric_eigen

DENSE_MAX_N = 12
# relative size of lambda_max below which T_X counts as the zero operator
ZERO_OPERATOR_TOL = 1e-14


class ZeroOperatorError(ValueError):
    """``T_X`` vanishes (X is a multiple of the identity, or zero)."""


class DegenerateSpanError(ValueError):
    pass


@dataclass(frozen=True)
class ExtremalResult:
    y_star: np.ndarray
    lambda_max: float
    residual: float
    iterations: int
    ratio_bw: float

    @property
    def n(self):
        return self.y_star.shape[0]

    def to_dict(self):
        return {
            "n": self.n,
            "lambda_max": self.lambda_max,
            "ratio_bw": self.ratio_bw,
            "residual": self.residual,
            "iterations": self.iterations,
            "y_star": matrix_to_json(self.y_star),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def _fix_sign(y):
    flat = y.ravel()
    k = int(np.argmax(np.abs(flat)))
    return -y if flat[k] < 0 else y


def find_extremal(x, mode="auto", seed=0):
    """Unit ``Y*`` maximizing ``||[X, Y]||`` and the maximum ``lambda_max``.

    ``mode`` is ``"dense"`` (Jacobi on the materialized operator),
    ``"matrix-free"`` (power iteration on :func:`t_apply`) or ``"auto"``,
    which picks dense for ``n <= 12``. The sign of ``Y*`` is fixed by making
    its largest-magnitude entry positive.
    """
    x = as_matrix(x)
    n = x.shape[0]
    scale = frobenius_norm_sq(x)
    if scale == 0.0:
        raise ZeroOperatorError("X = 0: every Y gives a zero commutator")
    if mode == "auto":
        mode = "dense" if n <= DENSE_MAX_N else "matrix-free"
    if mode == "dense":
        eig = symmetric_eigen(t_materialize(x))
        lam = float(eig.values[0])
        y = eig.vectors[:, 0]
        iterations = eig.sweeps
    elif mode == "matrix-free":
        res = power_iteration(lambda v: vec(t_apply(x, v.reshape(n, n))), n * n, seed=seed)
        lam, y, iterations = res.value, res.vector, res.iterations
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if lam <= ZERO_OPERATOR_TOL * 2.0 * scale:
        raise ZeroOperatorError("T_X = 0: X commutes with every matrix")
    y_star = _fix_sign(unvec(y / np.linalg.norm(y), n))
    residual = frobenius_norm(t_apply(x, y_star) - lam * y_star)
    return ExtremalResult(
        y_star=as_matrix(y_star),
        lambda_max=lam,
        residual=residual,
        iterations=int(iterations),
        ratio_bw=lam / (2.0 * scale),
    )


def lambda_max_batch(xs, backend=None):
    """Top eigenvalue of ``T_X`` for each X in a ``(k, n, n)`` stack.

    Values only, through the batched Jacobi kernel; raises
    :class:`ConvergenceError` if any member fails to converge.
    """
    xs = np.asarray(xs, dtype=np.float64)
    k, n, _ = xs.shape
    eye = np.eye(n)
    ops = np.empty((k, n * n, n * n))
    for b in range(k):
        kmat = np.kron(xs[b], eye) - np.kron(eye, xs[b].T)
        m = kmat.T @ kmat
        ops[b] = 0.5 * (m + m.T)
    values, sweeps = kernels.eigvalsh_batch(ops, backend=backend)
    if np.any(sweeps < 0):
        raise ConvergenceError("batched Jacobi did not converge", float("nan"))
    return values.max(axis=1)


def certify_equality_pair(x, mode="auto"):
    """``(lambda_max / (2 ||X||^2), certificate)``; a ratio of 1 means the
    bw bound is attained for this X.

    When ``T_X`` vanishes the ratio is 0 and the certificate is ``E_11``,
    which (like every unit Y) attains the zero maximum.
    """
    x = as_matrix(x)
    if frobenius_norm_sq(x) == 0.0:
        raise ValueError("X must be nonzero")
    try:
        result = find_extremal(x, mode=mode)
    except ZeroOperatorError:
        result = ExtremalResult(elementary(x.shape[0], 1, 1), 0.0, 0.0, 0, 0.0)
    return result.ratio_bw, result


def companion_check(x, y, lambda_prime, tol=1e-6):
    """Is ``W = [X^T, Y^T]`` an eigenvector of ``T_X`` for ``lambda_prime``,
    and is it linearly independent of ``Y``?

    Returns ``(is_eigen, independent)``. When ``W`` vanishes the eigenvector
    claim holds vacuously and independence fails.
    """
    x, y = _pair(x, y)
    lam_scale = max(1.0, abs(lambda_prime))
    y_norm = frobenius_norm(y)
    if y_norm == 0.0:
        raise ValueError("y must be nonzero")
    pre = frobenius_norm(t_apply(x, y) - lambda_prime * y)
    if pre > tol * lam_scale * max(1.0, y_norm):
        raise ValueError(f"(y, lambda') is not an eigenpair of T_X: residual {pre:.3e}")
    w = commutator(x.T, y.T)
    w_norm = frobenius_norm(w)
    if w_norm <= 1e-12 * max(1.0, frobenius_norm_sq(x)) * y_norm:
        return True, False
    res = frobenius_norm(t_apply(x, w) - lambda_prime * w)
    is_eigen = res <= tol * max(1.0, w_norm) * lam_scale
    cos = trace_inner_product(y, w) / (y_norm * w_norm)
    independent = (1.0 - cos * cos) > 1e-8
    return bool(is_eigen), bool(independent)


def change_of_variables(x, y):
    """``(s, BlockPair(B, C))`` with ``X = Q1 diag(s) Q2``, ``B = Q2 Y Q2^T``
    and ``C = Q1^T Y Q1``, so that ``||Lam B - C Lam|| = ||[X, Y]||``."""
    x, y = _pair(x, y)
    dec = svd(x)
    b = dec.q2 @ y @ dec.q2.T
    c = dec.q1.T @ y @ dec.q1
    return dec.sigma.copy(), BlockPair(b=b, c=c)


def _top_overlap(pair):
    # inner product with the top block eigenvector (E_11, -E_11), unnormalized
    return float(pair.b[0, 0] - pair.c[0, 0])


def orthogonalize_z(x, y, tol=1e-6):
    """Unit ``Z = alpha Y + beta [X^T, Y^T]`` whose block image is orthogonal
    to ``(E_11, -E_11)``.

    With ``g`` the overlap of an image with that vector, ``(alpha, beta) =
    (g(W), -g(Y))`` spans the null space of the one linear condition. If the
    overlap of ``Y`` already vanishes, ``Z = Y``. If ``W`` is dependent on
    ``Y`` and ``Y``'s image is not orthogonal, no such ``Z`` exists in the span
    and :class:`DegenerateSpanError` is raised.
    """
    x, y = _pair(x, y)
    y = y / frobenius_norm(y)
    _, image_y = change_of_variables(x, y)
    gy = _top_overlap(image_y)
    if abs(gy) <= 1e-14 * max(1.0, frobenius_norm(x)):
        return as_matrix(y)
    w = commutator(x.T, y.T)
    w_norm = frobenius_norm(w)
    dependent = w_norm == 0.0 or (1.0 - (trace_inner_product(y, w) / w_norm) ** 2) <= 1e-8
    if dependent:
        raise DegenerateSpanError("Y and [X^T, Y^T] are dependent and Y is not orthogonal")
    _, image_w = change_of_variables(x, w)
    gw = _top_overlap(image_w)
    z = gw * y - gy * w
    nz = frobenius_norm(z)
    if nz == 0.0:
        raise DegenerateSpanError("orthogonal combination vanished")
    return as_matrix(z / nz)


def quadratic_form_check(x, z):
    """``(||[X, Z]||^2, <A, T A>, (s_1^2 + s_2^2) ||A||^2)`` for the block
    image ``A`` of ``Z``; the first two agree and, when ``A`` is orthogonal to
    the top block eigenvector, are bounded by the third."""
    s, pair = change_of_variables(x, z)
    lhs = frobenius_norm_sq(commutator(x, z))
    form = block_commutator_norm_sq(s, pair)
    cap = float(np.sum(s[:2] ** 2)) * pair.norm_sq()
    return lhs, form, cap
