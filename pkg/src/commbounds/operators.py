"""The commutator operator ``T_X(Y) = [X^T, [X, Y]]`` and its block restriction.

For a diagonal ``Lam = diag(s_1, ..., s_n)`` the operator acting on block
pairs ``(B, C)`` is ``(B, C) -> (Lam D, -D Lam)`` with ``D = Lam B - C Lam``.
Entry ``(i, j)`` of the pair only couples ``b_ij`` and ``c_ij`` through the
2x2 block ``[[s_i^2, -s_i s_j], [-s_i s_j, s_j^2]]``; that is what makes its
spectrum available in closed form.
"""

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .linalg import (
    BlockPair,
    DimensionError,
    as_matrix,
    commutator,
    elementary,
    frobenius_norm_sq,
    matrix_to_json,
)
from .spectral import clusters, symmetric_eigen

GENERIC_TOL = 1e-9


def t_apply(x, y):
    """``[X^T, [X, Y]]``."""
    x = as_matrix(x)
    return commutator(x.T, commutator(x, y))


def commutator_map(x):
    """Matrix of ``Y -> [X, Y]`` on row-major ``vec(Y)``."""
    x = as_matrix(x)
    eye = np.eye(x.shape[0])
    return np.kron(x, eye) - np.kron(eye, x.T)


def t_materialize(x):
    """Symmetric ``n^2 x n^2`` matrix of ``T_X``, equal to ``K^T K`` for ``K``
    the commutator map, so that ``M @ vec(Y) == vec(t_apply(x, Y))``."""
    k = commutator_map(x)
    m = k.T @ k
    return as_matrix(0.5 * (m + m.T))


def _lambda(lambda_diag, n=None):
    lam = np.asarray(lambda_diag, dtype=np.float64).ravel()
    if lam.size == 0:
        raise DimensionError("lambda_diag must be non-empty")
    if not np.all(np.isfinite(lam)):
        raise ValueError("lambda_diag entries must be finite")
    if n is not None and lam.size != n:
        raise DimensionError(f"lambda_diag has length {lam.size}, block dimension is {n}")
    return lam


def tilde_apply(lambda_diag, a):
    """Apply the restricted operator to a block pair: ``(Lam D, -D Lam)``."""
    lam = _lambda(lambda_diag, a.n)
    d = lam[:, None] * a.b - a.c * lam[None, :]
    return BlockPair(b=lam[:, None] * d, c=-d * lam[None, :])


def block_commutator_norm_sq(lambda_diag, a):
    """``||Lam B - C Lam||^2``."""
    lam = _lambda(lambda_diag, a.n)
    return frobenius_norm_sq(lam[:, None] * a.b - a.c * lam[None, :])


def tilde_materialize(lambda_diag):
    """``2n^2 x 2n^2`` matrix of the restricted operator on ``BlockPair.vec``.

    Built column by column from :func:`tilde_apply` on the unit basis, so it
    does not lean on the closed-form structure it is later checked against.
    """
    lam = _lambda(lambda_diag)
    n = lam.size
    size = 2 * n * n
    m = np.empty((size, size))
    for k in range(size):
        e = np.zeros(size)
        e[k] = 1.0
        m[:, k] = tilde_apply(lam, BlockPair.from_vec(e, n)).vec()
    return as_matrix(0.5 * (m + m.T))


# --------------------------------------------------------------------------
# genericity


@dataclass(frozen=True)
class GenericityReport:
    is_generic: bool
    violations: tuple = ()
    suggested_perturbation: float = 0.0

    def to_dict(self):
        return {
            "is_generic": self.is_generic,
            "violations": list(self.violations),
            "suggested_perturbation": self.suggested_perturbation,
        }


class NonGenericError(ValueError):
    def __init__(self, report):
        super().__init__(
            "singular values are not generic: " + ", ".join(report.violations)
        )
        self.report = report


def _all_distinct(values, tol):
    v = np.sort(np.asarray(values))
    return bool(np.all(np.diff(v) > tol))


def check_genericity(lambda_diag):
    """Check that all ``s_i`` are nonzero, all ``s_i^2`` are distinct, and all
    sums ``s_i^2 + s_j^2`` (``i <= j``) are distinct.

    Squared quantities are compared at ``1e-9 * max s_i^2``; nonzero-ness is
    judged on ``|s_i|`` against ``1e-9 * max |s_i|``.
    """
    lam = _lambda(lambda_diag)
    sq = lam * lam
    top = float(sq.max())
    tol = GENERIC_TOL * top
    violations = []
    if top == 0.0 or np.any(np.abs(lam) <= GENERIC_TOL * np.abs(lam).max()):
        violations.append("nonzero")
    if not _all_distinct(sq, tol):
        violations.append("distinct")
    iu = np.triu_indices(lam.size)
    sums = (sq[:, None] + sq[None, :])[iu]
    if not _all_distinct(sums, tol):
        violations.append("sums-distinct")
    eps = 1e-6 * max(1.0, float(np.abs(lam).max())) if violations else 0.0
    return GenericityReport(not violations, tuple(violations), eps)


def perturb_to_generic(lambda_diag, seed=0, max_attempts=100):
    """Nudge values away from zero and from each other until generic.

    Each entry moves by at most ``1e-6 * max(1, max|s|)``, in the direction of
    its sign (zeros move up). Generic input is returned unchanged; descending
    input stays descending.
    """
    lam = _lambda(lambda_diag)
    if check_genericity(lam).is_generic:
        return lam.copy()
    eps = 1e-6 * max(1.0, float(np.abs(lam).max()))
    descending = bool(np.all(np.diff(lam) <= 0))
    rng = np.random.default_rng(seed)
    direction = np.where(lam < 0, -1.0, 1.0)
    for _ in range(max_attempts):
        # uniform on (0, eps]
        jitter = eps * (1.0 - rng.random(lam.size))
        out = lam + direction * jitter
        if descending:
            out = -np.sort(-out)
        if check_genericity(out).is_generic:
            return out
    raise RuntimeError(f"no generic perturbation found in {max_attempts} attempts")


# --------------------------------------------------------------------------
# closed-form spectrum


class Kind(str, Enum):
    DIAG = "diag-2s2"
    MIXED = "mixed-s2+s2"
    KERNEL = "kernel"


@dataclass(frozen=True)
class SpectrumEntry:
    value: float
    kind: Kind
    i: int  # 1-based, as in E_ij
    j: int
    vector: BlockPair


@dataclass(frozen=True)
class GenericSpectrumPrediction:
    lambda_diag: np.ndarray
    entries: tuple

    def values(self):
        return np.array([e.value for e in self.entries])

    def residuals(self):
        out = []
        for e in self.entries:
            image = tilde_apply(self.lambda_diag, e.vector)
            diff = BlockPair(b=image.b - e.value * e.vector.b, c=image.c - e.value * e.vector.c)
            out.append(math.sqrt(diff.norm_sq()))
        return np.array(out)


def _unit_pair(n, i, j, b_coef, c_coef):
    e = elementary(n, i, j)
    scale = math.hypot(b_coef, c_coef)
    return BlockPair(b=(b_coef / scale) * e, c=(c_coef / scale) * e)


def mixed_eigenvector(lambda_diag, i, j):
    """Eigenvector at ``s_i^2 + s_j^2`` supported on entry ``(i, j)``.

    From the entrywise equation ``-s_i s_j b_ij = (lam - s_j^2) c_ij`` with
    ``lam = s_i^2 + s_j^2`` the ratio is ``c_ij / b_ij = -s_j / s_i``.
    """
    lam = _lambda(lambda_diag)
    si, sj = lam[i - 1], lam[j - 1]
    return _unit_pair(lam.size, i, j, 1.0, -sj / si)


def lemma2_spectrum(lambda_diag):
    """All ``2n^2`` eigenpairs of the restricted operator in closed form.

    Requires generic values (see :func:`check_genericity`); raises
    :class:`NonGenericError` otherwise. Eigenvectors are unit normalized and
    entries are sorted by descending eigenvalue.
    """
    lam = _lambda(lambda_diag)
    report = check_genericity(lam)
    if not report.is_generic:
        raise NonGenericError(report)
    n = lam.size
    sq = lam * lam
    entries = []
    for i in range(1, n + 1):
        entries.append(SpectrumEntry(2.0 * sq[i - 1], Kind.DIAG, i, i, _unit_pair(n, i, i, 1.0, -1.0)))
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i != j:
                value = sq[i - 1] + sq[j - 1]
                entries.append(SpectrumEntry(value, Kind.MIXED, i, j, mixed_eigenvector(lam, i, j)))
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            pair = _unit_pair(n, i, j, 1.0, lam[i - 1] / lam[j - 1])
            entries.append(SpectrumEntry(0.0, Kind.KERNEL, i, j, pair))
    entries.sort(key=lambda e: -e.value)
    return GenericSpectrumPrediction(lambda_diag=lam, entries=tuple(entries))


def coefficient_check(lambda_diag):
    """Residuals at ``s_1^2 + s_2^2`` of two candidates supported on ``E_21``.

    ``derived`` uses ``C = -(s_1/s_2) E_21``, which the entrywise eigen-equations
    give; ``reciprocal`` uses the inverted ratio ``C = -(s_2/s_1) E_21``, a
    common misstatement that only agrees when ``s_1 = s_2``. Both vectors are
    unit normalized.
    """
    lam = _lambda(lambda_diag)
    if lam.size < 2:
        return None
    s1, s2 = lam[0], lam[1]
    value = s1 * s1 + s2 * s2
    n = lam.size

    def residual(pair):
        image = tilde_apply(lam, pair)
        diff = BlockPair(b=image.b - value * pair.b, c=image.c - value * pair.c)
        return math.sqrt(diff.norm_sq())

    derived = _unit_pair(n, 2, 1, 1.0, -s1 / s2)
    reciprocal = _unit_pair(n, 2, 1, 1.0, -s2 / s1)
    return {
        "entry": [2, 1],
        "eigenvalue": float(value),
        "derived_coefficient": float(-s1 / s2),
        "derived_residual": residual(derived),
        "reciprocal_coefficient": float(-s2 / s1),
        "reciprocal_residual": residual(reciprocal),
    }


# --------------------------------------------------------------------------
# report


@dataclass
class SpectrumReport:
    lambda_diag: np.ndarray
    genericity: GenericityReport
    perturbed: bool
    predicted: GenericSpectrumPrediction
    computed: np.ndarray
    value_error: float
    max_vector_residual: float
    multiplicities: list = field(default_factory=list)
    coefficients: dict = None

    def to_dict(self):
        return {
            "lambda": [float(v) for v in self.lambda_diag],
            "genericity": self.genericity.to_dict(),
            "perturbed": self.perturbed,
            "predicted": [
                {"value": float(e.value), "kind": e.kind.value, "i": e.i, "j": e.j,
                 "b": matrix_to_json(e.vector.b), "c": matrix_to_json(e.vector.c)}
                for e in self.predicted.entries
            ],
            "computed": [float(v) for v in self.computed],
            "max_value_error": self.value_error,
            "max_vector_residual": self.max_vector_residual,
            "multiplicities": self.multiplicities,
            "coefficient_check": self.coefficients,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def multiplicity_table(predicted_values, computed_values, gap):
    """Group computed values into clusters and count predicted values in each."""
    computed = np.sort(np.asarray(computed_values))[::-1]
    predicted = np.asarray(predicted_values)
    table = []
    for group in clusters(computed, gap):
        lo, hi = computed[group[-1]], computed[group[0]]
        hits = int(np.sum((predicted >= lo - gap) & (predicted <= hi + gap)))
        table.append({
            "value": float(np.mean(computed[group])),
            "computed_multiplicity": len(group),
            "predicted_multiplicity": hits,
        })
    return table


def spectrum_report(lambda_diag, perturb=False, seed=0, backend=None):
    """Closed-form spectrum next to a Jacobi eigensolve of the materialization."""
    lam = _lambda(lambda_diag)
    report = check_genericity(lam)
    used = lam
    if not report.is_generic:
        if not perturb:
            raise NonGenericError(report)
        used = perturb_to_generic(lam, seed=seed)
    prediction = lemma2_spectrum(used)
    numeric = symmetric_eigen(tilde_materialize(used), backend=backend).values
    predicted_sorted = np.sort(prediction.values())[::-1]
    computed_sorted = np.sort(numeric)[::-1]
    gap = GENERIC_TOL * float(np.max(used * used))
    return SpectrumReport(
        lambda_diag=used,
        genericity=report,
        perturbed=not report.is_generic,
        predicted=prediction,
        computed=computed_sorted,
        value_error=float(np.max(np.abs(predicted_sorted - computed_sorted))),
        max_vector_residual=float(np.max(prediction.residuals())),
        multiplicities=multiplicity_table(predicted_sorted, computed_sorted, gap),
        coefficients=coefficient_check(used),
    )
