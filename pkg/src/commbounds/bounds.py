"""Upper bounds for ``||[X, Y]||^2`` and the scalar identities behind them.

Four bound families are evaluated:

``bw``       ``2 ||X||^2 ||Y||^2``                     any X
``kyfan``    ``2 (s_1^2 + s_2^2) ||Y||^2``             any X
``cdck``     ``(lam_max - lam_min)^2 ||Y||^2``         symmetric X
``infnorm``  ``||X||^2 (||Y||^2 + 2 ||Y||_inf^2)``     diagonal X

Asking for a bound outside its domain raises :class:`NotApplicableError`;
:func:`evaluate_all` instead records the family as not applicable.
"""

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .linalg import (
    DimensionError,
    _pair,
    as_matrix,
    commutator,
    frobenius_norm_sq,
    is_diagonal,
    is_symmetric,
    offdiag_max_abs,
    triangular_split,
)
from .spectral import singular_values, symmetric_eigen

FAMILIES = ("bw", "kyfan", "cdck", "infnorm")
EQUALITY_TOL = 1e-9
VIOLATION_SLACK = 1e-9


class NotApplicableError(ValueError):
    pass


def commutator_norm_sq(x, y):
    return frobenius_norm_sq(commutator(x, y))


def bw_bound(x, y):
    x, y = _pair(x, y)
    return 2.0 * frobenius_norm_sq(x) * frobenius_norm_sq(y)


def kyfan_norm_sq(x):
    """``s_1^2 + s_2^2``; for 1x1 matrices the squared Ky Fan norm is ``s_1^2``."""
    s = singular_values(x)
    return float(np.sum(s[:2] ** 2))


def kyfan_bound(x, y):
    x, y = _pair(x, y)
    if x.shape[0] == 1:
        return 0.0
    return 2.0 * kyfan_norm_sq(x) * frobenius_norm_sq(y)


def cdck_bound(x, y):
    x, y = _pair(x, y)
    if not is_symmetric(x):
        raise NotApplicableError("cdck bound needs a symmetric X")
    lam = symmetric_eigen(x).values
    spread = float(np.max(lam) - np.min(lam))
    return spread * spread * frobenius_norm_sq(y)


def infnorm_bound(x, y):
    x, y = _pair(x, y)
    if not is_diagonal(x):
        raise NotApplicableError("infnorm bound needs a diagonal X")
    return frobenius_norm_sq(x) * (frobenius_norm_sq(y) + 2.0 * offdiag_max_abs(y) ** 2)


_EVALUATORS = {"bw": bw_bound, "kyfan": kyfan_bound, "cdck": cdck_bound, "infnorm": infnorm_bound}


def applicable(name, x):
    if name == "cdck":
        return is_symmetric(x)
    if name == "infnorm":
        return is_diagonal(x)
    return True


def scalar_inequality_check(lambdas, y):
    """Both sides of the weighted scalar inequality used for diagonal X.

    ``lhs = 2 sum_{i<j} (l_i - l_j)^2 y_ij^2`` and
    ``rhs = (sum l_j^2) (2 sum_{i>j} y_ij^2 + 2 max_{i>j} y_ij^2)``.
    """
    y = as_matrix(y)
    lam = np.asarray(lambdas, dtype=np.float64).ravel()
    n = y.shape[0]
    if lam.size != n:
        raise DimensionError("lambdas and y disagree on dimension")
    if not is_symmetric(y):
        raise ValueError("scalar inequality needs a symmetric y")
    iu = np.triu_indices(n, 1)
    il = np.tril_indices(n, -1)
    diff_sq = (lam[:, None] - lam[None, :]) ** 2
    lhs = 2.0 * float(np.sum(diff_sq[iu] * y[iu] ** 2))
    lower_sq = y[il] ** 2
    peak = float(lower_sq.max()) if lower_sq.size else 0.0
    rhs = float(np.sum(lam**2)) * (2.0 * float(np.sum(lower_sq)) + 2.0 * peak)
    return lhs, rhs


def cdck_vs_kyfan_gap(lambdas):
    """``((l_max - l_min)^2, 2 max_{i != j} (l_i^2 + l_j^2))``."""
    lam = np.asarray(lambdas, dtype=np.float64).ravel()
    if lam.size < 2:
        raise DimensionError("need at least two eigenvalues")
    spread = float(lam.max() - lam.min())
    top2 = np.sort(lam * lam)[-2:]
    return spread * spread, 2.0 * float(top2.sum())


def pythagorean_split_check(x, y):
    """``(||[X,Y]||^2, ||[X,Y_upper]||^2, ||[X,Y_lower]||^2)`` for diagonal X."""
    x, y = _pair(x, y)
    if not is_diagonal(x):
        raise NotApplicableError("the triangular split identity needs a diagonal X")
    _, upper, lower = triangular_split(y)
    return commutator_norm_sq(x, y), commutator_norm_sq(x, upper), commutator_norm_sq(x, lower)


# --------------------------------------------------------------------------
# report


@dataclass(frozen=True)
class BoundEntry:
    name: str
    applicable: bool
    value: Optional[float] = None
    ratio: Optional[float] = None
    equality: bool = False

    def to_dict(self):
        return {
            "name": self.name,
            "applicable": self.applicable,
            "value": self.value,
            "ratio": self.ratio,
            "equality": self.equality,
        }


@dataclass(frozen=True)
class BoundReport:
    n: int
    lhs: float
    entries: tuple = field(default_factory=tuple)
    tightest: Optional[str] = None

    def entry(self, name):
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def violations(self, slack=VIOLATION_SLACK):
        """Names of applicable families whose value the lhs exceeds."""
        return [
            e.name
            for e in self.entries
            if e.applicable and self.lhs > e.value * (1.0 + slack)
        ]

    def to_dict(self):
        return {
            "n": self.n,
            "lhs": self.lhs,
            "bounds": [e.to_dict() for e in self.entries],
            "tightest": self.tightest,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def is_equality(lhs, value, tol=EQUALITY_TOL):
    return abs(value - lhs) <= tol * value


def ratio(lhs, value):
    if value == 0.0:
        return None if lhs == 0.0 else float("inf")
    return lhs / value


def evaluate_all(x, y, tol=EQUALITY_TOL):
    """Evaluate every family on ``(x, y)``.

    ``tightest`` is the smallest applicable value; ties go to the earlier name
    in ``bw, kyfan, cdck, infnorm``.
    """
    x, y = _pair(x, y)
    lhs = commutator_norm_sq(x, y)
    entries = []
    for name in FAMILIES:
        if not applicable(name, x):
            entries.append(BoundEntry(name, False))
            continue
        value = float(_EVALUATORS[name](x, y))
        entries.append(BoundEntry(name, True, value, ratio(lhs, value), is_equality(lhs, value, tol)))
    live = [e for e in entries if e.applicable]
    tightest = min(live, key=lambda e: e.value).name
    return BoundReport(n=x.shape[0], lhs=lhs, entries=tuple(entries), tightest=tightest)
