import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from commbounds.bounds import (
    NotApplicableError,
    bw_bound,
    cdck_bound,
    cdck_vs_kyfan_gap,
    commutator_norm_sq,
    evaluate_all,
    infnorm_bound,
    kyfan_bound,
    pythagorean_split_check,
    scalar_inequality_check,
)
from commbounds.linalg import elementary, frobenius_norm_sq

E = elementary
SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])


def test_bw_examples(rng):
    assert bw_bound(E(2, 1, 2), E(2, 2, 1)) == 2.0
    assert commutator_norm_sq(E(2, 1, 2), E(2, 2, 1)) == 2.0
    y = rng.standard_normal((3, 3))
    assert bw_bound(np.eye(3), y) == pytest.approx(6 * frobenius_norm_sq(y))
    assert commutator_norm_sq(np.eye(3), y) == 0.0
    x = rng.standard_normal((3, 3))
    assert commutator_norm_sq(x, x) == 0.0 < bw_bound(x, x)


def test_kyfan_examples(rng):
    y = rng.standard_normal((2, 2))
    assert kyfan_bound(E(2, 1, 2), y) == pytest.approx(2 * frobenius_norm_sq(y), rel=1e-15)
    assert kyfan_bound(E(2, 1, 2), y) == pytest.approx(bw_bound(E(2, 1, 2), y), rel=1e-15)
    y3 = rng.standard_normal((3, 3))
    assert kyfan_bound(np.eye(3), y3) == pytest.approx(4 * frobenius_norm_sq(y3), rel=1e-15)
    assert kyfan_bound(np.eye(3), y3) < bw_bound(np.eye(3), y3)
    assert kyfan_bound(np.diag([3.0, 1.0]), E(2, 1, 2)) == pytest.approx(20.0, rel=1e-15)
    assert commutator_norm_sq(np.diag([3.0, 1.0]), E(2, 1, 2)) == 4.0
    assert kyfan_bound([[2.0]], [[5.0]]) == 0.0


def test_cdck_examples(rng):
    assert cdck_bound(np.diag([3.0, 1.0]), E(2, 1, 2)) == pytest.approx(4.0, rel=1e-15)
    assert cdck_bound(np.eye(3), rng.standard_normal((3, 3))) == 0.0
    assert cdck_bound(np.diag([1.0, -1.0]), SWAP) == pytest.approx(8.0, rel=1e-15)
    assert commutator_norm_sq(np.diag([1.0, -1.0]), SWAP) == 8.0
    with pytest.raises(NotApplicableError):
        cdck_bound(E(2, 1, 2), SWAP)


def test_infnorm_examples():
    assert infnorm_bound(np.diag([1.0, -1.0]), SWAP) == 8.0
    y = np.diag([2.0, -5.0])
    assert infnorm_bound(np.diag([1.0, 2.0]), y) == frobenius_norm_sq(np.diag([1.0, 2.0])) * frobenius_norm_sq(y)
    assert commutator_norm_sq(np.diag([1.0, 2.0]), y) == 0.0
    assert infnorm_bound(np.diag([3.0, 1.0]), E(2, 1, 2)) == 30.0
    with pytest.raises(NotApplicableError):
        infnorm_bound(SWAP, SWAP)


def test_scalar_inequality_examples():
    assert scalar_inequality_check([1.0, -1.0], SWAP) == (8.0, 8.0)
    lhs, rhs = scalar_inequality_check([1.0, 2.0, 3.0], np.diag([1.0, 2.0, 3.0]))
    assert lhs == 0.0
    lhs, rhs = scalar_inequality_check([2.0, 2.0, 2.0], np.ones((3, 3)))
    assert lhs == 0.0 and lhs <= rhs
    with pytest.raises(ValueError):
        scalar_inequality_check([1.0, 2.0], E(2, 1, 2))


def test_gap_examples():
    assert cdck_vs_kyfan_gap([1.0, -1.0]) == (4.0, 4.0)
    assert cdck_vs_kyfan_gap([3.0, 1.0]) == (4.0, 20.0)
    assert cdck_vs_kyfan_gap([1.5, 1.5, 1.5]) == (0.0, 9.0)
    with pytest.raises(ValueError):
        cdck_vs_kyfan_gap([1.0])


def test_pythagorean_examples():
    assert pythagorean_split_check(np.diag([1.0, -1.0]), [[5, 1], [2, 5]]) == (20.0, 4.0, 16.0)
    assert pythagorean_split_check(np.diag([1.0, 2.0]), np.diag([3.0, 4.0])) == (0.0, 0.0, 0.0)
    total, upper, lower = pythagorean_split_check(np.diag([1.0, 4.0, 9.0]), np.triu(np.ones((3, 3)), 1))
    assert lower == 0.0 and total == upper
    with pytest.raises(NotApplicableError):
        pythagorean_split_check(SWAP, SWAP)


def test_evaluate_all_examples():
    rep = evaluate_all(E(2, 1, 2), E(2, 2, 1))
    assert [e.applicable for e in rep.entries] == [True, True, False, False]
    assert rep.entry("bw").value == 2.0 and rep.entry("kyfan").value == 2.0
    assert rep.entry("bw").equality and rep.entry("kyfan").equality

    rep = evaluate_all(np.diag([3.0, 1.0]), E(2, 1, 2))
    values = tuple(round(rep.entry(k).value, 12) for k in ("bw", "kyfan", "cdck", "infnorm"))
    assert values == (20.0, 20.0, 4.0, 30.0)
    assert rep.tightest == "cdck"
    assert rep.entry("cdck").equality and not rep.entry("bw").equality

    rep = evaluate_all(np.zeros((2, 2)), SWAP)
    assert rep.lhs == 0.0
    assert all(e.value == 0.0 for e in rep.entries if e.applicable)
    assert rep.entry("bw").ratio is None
    assert rep.tightest == "bw"  # tie goes to the earliest family


def test_report_json_schema():
    d = json.loads(evaluate_all(np.diag([1.0, -1.0]), SWAP).to_json())
    assert set(d) == {"n", "lhs", "bounds", "tightest"}
    assert [b["name"] for b in d["bounds"]] == ["bw", "kyfan", "cdck", "infnorm"]
    assert set(d["bounds"][0]) == {"name", "applicable", "value", "ratio", "equality"}
    assert all(b["equality"] for b in d["bounds"][1:])


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_bounds_hold_and_order(n, seed):
    r = np.random.default_rng(seed)
    x, y = r.standard_normal((2, n, n))
    rep = evaluate_all(x, y)
    assert not rep.violations()
    assert rep.entry("kyfan").value <= rep.entry("bw").value * (1 + 1e-12)
    s = 0.5 * (x + x.T)
    lam = np.linalg.eigvalsh(s)
    assert cdck_bound(s, y) <= kyfan_bound(s, y) * (1 + 1e-9)
    lhs, rhs = cdck_vs_kyfan_gap(lam)
    assert lhs <= rhs * (1 + 1e-12)
    ys = 0.5 * (y + y.T)
    lhs, rhs = scalar_inequality_check(lam, ys)
    assert lhs <= rhs * (1 + 1e-12)
    total, upper, lower = pythagorean_split_check(np.diag(lam), y)
    assert abs(total - upper - lower) <= 1e-12 * max(total, 1e-300)
