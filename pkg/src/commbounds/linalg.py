"""Dense real square matrices: validation, commutators, norms and splits.

Matrices are plain ``float64`` numpy arrays. :func:`as_matrix` is the one
boundary check (square, finite) and hands back a read-only array, so values
can be shared freely. Vectorization is row-major throughout the package:
``vec(Y)[i * n + j] == Y[i, j]``.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class DimensionError(ValueError):
    pass


def _frozen(a):
    a.setflags(write=False)
    return a


def as_matrix(x):
    """Validate ``x`` as a finite square matrix and return a read-only copy."""
    a = np.array(x, dtype=np.float64, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DimensionError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return _frozen(a)


def _pair(x, y):
    x = as_matrix(x)
    y = as_matrix(y)
    if x.shape != y.shape:
        raise DimensionError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    return x, y


@dataclass(frozen=True)
class BlockPair:
    """The block-diagonal ``A = diag(C, B)`` stored as its two blocks."""

    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        b, c = _pair(self.b, self.c)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def n(self):
        return self.b.shape[0]

    def norm_sq(self):
        return frobenius_norm_sq(self.b) + frobenius_norm_sq(self.c)

    def vec(self):
        """Stack as ``(vec(C), vec(B))``, mirroring the block order of A."""
        return np.concatenate([self.c.ravel(), self.b.ravel()])

    @classmethod
    def from_vec(cls, v, n):
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (2 * n * n,):
            raise DimensionError(f"expected a vector of length {2 * n * n}")
        return cls(b=v[n * n:].reshape(n, n), c=v[: n * n].reshape(n, n))

    def scaled(self, t):
        return BlockPair(b=t * self.b, c=t * self.c)

    def dot(self, other):
        return trace_inner_product(self.b, other.b) + trace_inner_product(self.c, other.c)


def commutator(x, y):
    """``XY - YX``."""
    x, y = _pair(x, y)
    return _frozen(x @ y - y @ x)


def frobenius_norm_sq(x):
    x = np.asarray(x, dtype=np.float64)
    return float(np.sum(x * x))


def frobenius_norm(x):
    return float(np.sqrt(frobenius_norm_sq(x)))


def trace_inner_product(a, b):
    """``tr(A^T B)``, computed as the entrywise dot product."""
    a, b = _pair(a, b)
    return float(np.dot(a.ravel(), b.ravel()))


def elementary(n, i, j):
    """``E_ij`` with 1-based ``i, j``: a single unit entry at row i, column j."""
    if n < 1:
        raise DimensionError("dimension must be positive")
    if not (1 <= i <= n and 1 <= j <= n):
        raise IndexError(f"index ({i}, {j}) out of range for n = {n}")
    e = np.zeros((n, n))
    e[i - 1, j - 1] = 1.0
    return _frozen(e)


def triangular_split(y):
    """Return ``(diagonal, strictly upper, strictly lower)`` parts of ``y``."""
    y = as_matrix(y)
    d = np.diag(np.diag(y))
    upper = np.triu(y, 1)
    lower = np.tril(y, -1)
    return _frozen(d), _frozen(upper), _frozen(lower)


def offdiag_max_abs(y):
    """Largest ``|y_ij|`` over ``i != j``; zero for 1x1 matrices."""
    y = as_matrix(y)
    n = y.shape[0]
    if n == 1:
        return 0.0
    return float(np.max(np.abs(y[~np.eye(n, dtype=bool)])))


def vec(y):
    return np.asarray(y, dtype=np.float64).ravel().copy()


def unvec(v, n):
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (n * n,):
        raise DimensionError(f"expected a vector of length {n * n}")
    return as_matrix(v.reshape(n, n))


def is_symmetric(x, tol=1e-12):
    x = np.asarray(x)
    scale = max(1.0, float(np.max(np.abs(x))))
    return bool(np.max(np.abs(x - x.T)) <= tol * scale)


def is_diagonal(x, tol=1e-12):
    x = np.asarray(x)
    n = x.shape[0]
    if n == 1:
        return True
    scale = float(np.max(np.abs(x)))
    return bool(np.max(np.abs(x[~np.eye(n, dtype=bool)])) <= tol * scale)


# --------------------------------------------------------------------------
# text / JSON format


def parse_matrix(text):
    """Parse either the plain text format or a JSON array of arrays.

    The text format is the dimension ``n`` on the first line followed by ``n``
    rows of ``n`` whitespace-separated decimals.
    """
    stripped = text.strip()
    if not stripped:
        raise ValueError("empty matrix input")
    if stripped.startswith("["):
        try:
            rows = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed JSON matrix: {exc}") from None
        if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
            raise ValueError("JSON matrix must be an array of arrays")
        if any(len(r) != len(rows) for r in rows):
            raise DimensionError("JSON matrix must be square")
        return as_matrix(rows)
    lines = [ln for ln in stripped.splitlines() if ln.strip()]
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise ValueError(f"first line must be the dimension, got {lines[0]!r}") from None
    if n < 1:
        raise DimensionError("dimension must be positive")
    body = lines[1:]
    if len(body) != n:
        raise DimensionError(f"expected {n} rows, found {len(body)}")
    rows = []
    for k, line in enumerate(body, start=1):
        parts = line.split()
        if len(parts) != n:
            raise DimensionError(f"row {k} has {len(parts)} entries, expected {n}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise ValueError(f"row {k} contains a non-numeric entry") from None
    return as_matrix(rows)


def format_matrix(x):
    """Text format with 17 significant digits per entry."""
    x = as_matrix(x)
    lines = [str(x.shape[0])]
    lines += [" ".join(f"{v:.17g}" for v in row) for row in x]
    return "\n".join(lines) + "\n"


def read_matrix(path):
    return parse_matrix(Path(path).read_text())


def write_matrix(path, x):
    Path(path).write_text(format_matrix(x))


def matrix_to_json(x):
    """JSON-ready nested list; floats round-trip exactly through ``json``."""
    return [[float(v) for v in row] for row in np.asarray(x)]
