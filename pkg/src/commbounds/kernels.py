"""Jacobi kernels: cyclic symmetric eigensolver and one-sided (Hestenes) SVD.

Each kernel exists twice. The numba path is the classic scalar cyclic-by-row
sweep. The numpy path uses the round-robin (tournament) ordering so that the
disjoint rotations of one round, and every matrix of a batch, are applied in a
single vectorized step. Both paths use the same rotation formulas and the same
stopping rules; they agree to rounding but not bitwise.

Kernels return raw, unsorted results plus a sweep count (``-1`` when the sweep
cap was hit). Ordering, sign conventions and error handling live in
:mod:`commbounds.spectral`.
"""

import numpy as np

from ._accel import HAVE_NUMBA, USE_NUMBA, njit

EIGH_TOL = 1e-14
SVD_TOL = 1e-15
MAX_SWEEPS = 60
# rotations on entries below this fraction of the matrix norm are skipped
_NEGLIGIBLE = 1e-18


def _backend(backend):
    if backend is None:
        return "numba" if USE_NUMBA else "numpy"
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not importable")
    return backend


def round_robin(m):
    """Tournament schedule over ``range(m)``.

    Returns a list of ``(p, q)`` index arrays, one per round, with ``p < q``
    elementwise and no index repeated within a round. Every unordered pair
    appears exactly once per sweep.
    """
    size = m + (m % 2)
    players = list(range(size))
    rounds = []
    for _ in range(size - 1):
        ps, qs = [], []
        for k in range(size // 2):
            a, b = players[k], players[size - 1 - k]
            if a < m and b < m:
                ps.append(min(a, b))
                qs.append(max(a, b))
        if ps:
            rounds.append((np.array(ps, dtype=np.intp), np.array(qs, dtype=np.intp)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


# --------------------------------------------------------------------------
# numba: symmetric eigensolver


@njit(cache=True)
def _eigh_core(a, v, want_vectors, tol, max_sweeps):
    # works on the upper triangle of a; the lower triangle goes stale
    m = a.shape[0]
    norm = 0.0
    for i in range(m):
        for j in range(m):
            norm += a[i, j] * a[i, j]
    norm = np.sqrt(norm)
    off = 0.0
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for p in range(m):
            for q in range(p + 1, m):
                off += a[p, q] * a[p, q]
        off = np.sqrt(2.0 * off)
        if off <= tol * norm:
            return sweep, off
        if sweep == max_sweeps:
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                if abs(apq) <= _NEGLIGIBLE * norm:
                    a[p, q] = 0.0
                    continue
                app = a[p, p]
                aqq = a[q, q]
                theta = (aqq - app) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                tau = s / (1.0 + c)
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                for k in range(p):
                    g = a[k, p]
                    h = a[k, q]
                    a[k, p] = g - s * (h + g * tau)
                    a[k, q] = h + s * (g - h * tau)
                for k in range(p + 1, q):
                    g = a[p, k]
                    h = a[k, q]
                    a[p, k] = g - s * (h + g * tau)
                    a[k, q] = h + s * (g - h * tau)
                for k in range(q + 1, m):
                    g = a[p, k]
                    h = a[q, k]
                    a[p, k] = g - s * (h + g * tau)
                    a[q, k] = h + s * (g - h * tau)
                if want_vectors:
                    for k in range(m):
                        g = v[k, p]
                        h = v[k, q]
                        v[k, p] = g - s * (h + g * tau)
                        v[k, q] = h + s * (g - h * tau)
    return -1, off


@njit(cache=True)
def _eigh_numba(m_in, tol, max_sweeps):
    a = m_in.copy()
    v = np.eye(a.shape[0])
    sweeps, off = _eigh_core(a, v, True, tol, max_sweeps)
    return np.diag(a).copy(), v, sweeps, off


@njit(cache=True)
def _eigvalsh_batch_numba(stack, tol, max_sweeps):
    k, m, _ = stack.shape
    values = np.empty((k, m))
    sweeps = np.empty(k, dtype=np.int64)
    v = np.empty((1, 1))
    a = np.empty((m, m))
    for b in range(k):
        a[:, :] = stack[b]
        sw, _ = _eigh_core(a, v, False, tol, max_sweeps)
        sweeps[b] = sw
        for i in range(m):
            values[b, i] = a[i, i]
    return values, sweeps


# --------------------------------------------------------------------------
# numpy: symmetric eigensolver, batched round-robin


def _offdiag_norm(a):
    m = a.shape[-1]
    mask = ~np.eye(m, dtype=bool)
    return np.sqrt(np.sum(np.where(mask, a, 0.0) ** 2, axis=(-2, -1)))


def _eigh_numpy_batch(stack, want_vectors, tol, max_sweeps):
    a = np.array(stack, dtype=np.float64, copy=True)
    k, m, _ = a.shape
    v = np.broadcast_to(np.eye(m), (k, m, m)).copy() if want_vectors else None
    norm = np.sqrt(np.sum(a * a, axis=(1, 2)))
    sweeps = np.full(k, -1, dtype=np.int64)
    rounds = round_robin(m)
    off = _offdiag_norm(a)
    for sweep in range(max_sweeps + 1):
        off = _offdiag_norm(a)
        newly = (sweeps < 0) & (off <= tol * norm)
        sweeps[newly] = sweep
        if np.all(sweeps >= 0) or sweep == max_sweeps:
            break
        for p, q in rounds:
            app = a[:, p, p]
            aqq = a[:, q, q]
            apq = a[:, p, q]
            active = np.abs(apq) > _NEGLIGIBLE * norm[:, None]
            safe = np.where(active, apq, 1.0)
            theta = (aqq - app) / (2.0 * safe)
            big = np.abs(theta) > 1e150
            theta_c = np.where(big, 1.0, theta)
            t = np.where(
                big,
                0.5 / np.where(big, theta, 1.0),
                np.sign(theta_c + (theta_c == 0)) / (np.abs(theta_c) + np.sqrt(theta_c * theta_c + 1.0)),
            )
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            rp = a[:, p, :]
            rq = a[:, q, :]
            a[:, p, :] = c[..., None] * rp - s[..., None] * rq
            a[:, q, :] = s[..., None] * rp + c[..., None] * rq
            cp = a[:, :, p]
            cq = a[:, :, q]
            a[:, :, p] = cp * c[:, None, :] - cq * s[:, None, :]
            a[:, :, q] = cp * s[:, None, :] + cq * c[:, None, :]
            a[:, p, q] = 0.0
            a[:, q, p] = 0.0
            if want_vectors:
                vp = v[:, :, p]
                vq = v[:, :, q]
                v[:, :, p] = vp * c[:, None, :] - vq * s[:, None, :]
                v[:, :, q] = vp * s[:, None, :] + vq * c[:, None, :]
    values = np.diagonal(a, axis1=1, axis2=2).copy()
    return values, v, sweeps, off


# --------------------------------------------------------------------------
# numba: one-sided Jacobi SVD


@njit(cache=True)
def _svd_core(w, v, want_vectors, tol, max_sweeps):
    # orthogonalizes the columns of w in place; x = w @ v.T on exit
    n = w.shape[1]
    rows = w.shape[0]
    worst = 0.0
    for sweep in range(max_sweeps + 1):
        rotated = False
        worst = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = 0.0
                beta = 0.0
                gamma = 0.0
                for k in range(rows):
                    alpha += w[k, p] * w[k, p]
                    beta += w[k, q] * w[k, q]
                    gamma += w[k, p] * w[k, q]
                if alpha == 0.0 or beta == 0.0 or gamma == 0.0:
                    continue
                scale = np.sqrt(alpha) * np.sqrt(beta)
                rel = abs(gamma) / scale
                if rel > worst:
                    worst = rel
                if rel <= tol:
                    continue
                if sweep == max_sweeps:
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                if abs(zeta) > 1e150:
                    t = 0.5 / zeta
                else:
                    t = 1.0 / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                    if zeta < 0.0:
                        t = -t
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                for k in range(rows):
                    g = w[k, p]
                    h = w[k, q]
                    w[k, p] = c * g - s * h
                    w[k, q] = s * g + c * h
                if want_vectors:
                    for k in range(n):
                        g = v[k, p]
                        h = v[k, q]
                        v[k, p] = c * g - s * h
                        v[k, q] = s * g + c * h
        if not rotated:
            if worst <= tol:
                return sweep, worst
            break
    return -1, worst


@njit(cache=True)
def _svd_numba(x, tol, max_sweeps):
    w = x.copy()
    v = np.eye(x.shape[1])
    sweeps, worst = _svd_core(w, v, True, tol, max_sweeps)
    return w, v, sweeps, worst


@njit(cache=True)
def _svdvals_batch_numba(stack, tol, max_sweeps):
    k, rows, n = stack.shape
    values = np.empty((k, n))
    sweeps = np.empty(k, dtype=np.int64)
    v = np.empty((1, 1))
    w = np.empty((rows, n))
    for b in range(k):
        w[:, :] = stack[b]
        sw, _ = _svd_core(w, v, False, tol, max_sweeps)
        sweeps[b] = sw
        for j in range(n):
            acc = 0.0
            for i in range(rows):
                acc += w[i, j] * w[i, j]
            values[b, j] = np.sqrt(acc)
    return values, sweeps


# --------------------------------------------------------------------------
# numpy: one-sided Jacobi SVD, batched round-robin


def _svd_numpy_batch(stack, want_vectors, tol, max_sweeps):
    w = np.array(stack, dtype=np.float64, copy=True)
    k, _, n = w.shape
    v = np.broadcast_to(np.eye(n), (k, n, n)).copy() if want_vectors else None
    sweeps = np.full(k, -1, dtype=np.int64)
    rounds = round_robin(n)
    worst = np.zeros(k)
    for sweep in range(max_sweeps + 1):
        worst = np.zeros(k)
        any_rotation = np.zeros(k, dtype=bool)
        for p, q in rounds:
            wp = w[:, :, p]
            wq = w[:, :, q]
            alpha = np.sum(wp * wp, axis=1)
            beta = np.sum(wq * wq, axis=1)
            gamma = np.sum(wp * wq, axis=1)
            nonzero = (alpha > 0) & (beta > 0) & (gamma != 0)
            scale = np.sqrt(alpha) * np.sqrt(beta)
            rel = np.where(nonzero, np.abs(gamma) / np.where(nonzero, scale, 1.0), 0.0)
            worst = np.maximum(worst, rel.max(axis=1))
            active = (rel > tol) & (sweep < max_sweeps)
            any_rotation |= active.any(axis=1)
            safe = np.where(active, gamma, 1.0)
            zeta = (beta - alpha) / (2.0 * safe)
            big = np.abs(zeta) > 1e150
            zeta_c = np.where(big, 1.0, zeta)
            t = np.where(
                big,
                0.5 / np.where(big, zeta, 1.0),
                np.sign(zeta_c + (zeta_c == 0)) / (np.abs(zeta_c) + np.sqrt(1.0 + zeta_c * zeta_c)),
            )
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = c * t
            w[:, :, p] = wp * c[:, None, :] - wq * s[:, None, :]
            w[:, :, q] = wp * s[:, None, :] + wq * c[:, None, :]
            if want_vectors:
                vp = v[:, :, p]
                vq = v[:, :, q]
                v[:, :, p] = vp * c[:, None, :] - vq * s[:, None, :]
                v[:, :, q] = vp * s[:, None, :] + vq * c[:, None, :]
        done = (sweeps < 0) & ~any_rotation & (worst <= tol)
        sweeps[done] = sweep
        if np.all(sweeps >= 0) or sweep == max_sweeps:
            break
    return w, v, sweeps, worst


# --------------------------------------------------------------------------
# dispatch


def eigh(m, tol=EIGH_TOL, max_sweeps=MAX_SWEEPS, backend=None):
    """Raw Jacobi eigendecomposition of one symmetric matrix.

    Returns ``(values, vectors, sweeps, off)`` with eigenvectors as columns,
    in no particular order. ``sweeps == -1`` signals non-convergence, with
    ``off`` the final off-diagonal Frobenius mass.
    """
    m = np.ascontiguousarray(m, dtype=np.float64)
    if _backend(backend) == "numba":
        values, vectors, sweeps, off = _eigh_numba(m, tol, max_sweeps)
        return values, vectors, int(sweeps), float(off)
    values, vectors, sweeps, off = _eigh_numpy_batch(m[None], True, tol, max_sweeps)
    return values[0], vectors[0], int(sweeps[0]), float(off[0])


def eigvalsh_batch(stack, tol=EIGH_TOL, max_sweeps=MAX_SWEEPS, backend=None):
    """Unsorted eigenvalues of a ``(k, m, m)`` stack of symmetric matrices.

    Returns ``(values, sweeps)``; a negative entry of ``sweeps`` marks a matrix
    that did not converge.
    """
    stack = np.ascontiguousarray(stack, dtype=np.float64)
    if _backend(backend) == "numba":
        return _eigvalsh_batch_numba(stack, tol, max_sweeps)
    values, _, sweeps, _ = _eigh_numpy_batch(stack, False, tol, max_sweeps)
    return values, sweeps


def svd(x, tol=SVD_TOL, max_sweeps=MAX_SWEEPS, backend=None):
    """Raw one-sided Jacobi SVD: returns ``(w, v, sweeps, worst)``.

    On exit ``x = w @ v.T`` with the columns of ``w`` mutually orthogonal to
    relative precision ``tol``; column norms are the singular values.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    if _backend(backend) == "numba":
        w, v, sweeps, worst = _svd_numba(x, tol, max_sweeps)
        return w, v, int(sweeps), float(worst)
    w, v, sweeps, worst = _svd_numpy_batch(x[None], True, tol, max_sweeps)
    return w[0], v[0], int(sweeps[0]), float(worst[0])


def svdvals_batch(stack, tol=SVD_TOL, max_sweeps=MAX_SWEEPS, backend=None):
    """Singular values, sorted descending, of a ``(k, n, n)`` stack.

    Returns ``(values, sweeps)`` as in :func:`eigvalsh_batch`.
    """
    stack = np.ascontiguousarray(stack, dtype=np.float64)
    if _backend(backend) == "numba":
        values, sweeps = _svdvals_batch_numba(stack, tol, max_sweeps)
    else:
        w, _, sweeps, _ = _svd_numpy_batch(stack, False, tol, max_sweeps)
        values = np.sqrt(np.sum(w * w, axis=1))
    return -np.sort(-values, axis=1), sweeps
