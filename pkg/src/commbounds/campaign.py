"""Monte Carlo verification campaigns over paired X / Y ensembles.

Trials are processed a block at a time with batched kernels. Every check
produces, per trial, an applicability flag, a left side and a right side; the
summary keeps counts, maxima and exactly rounded sums (``math.fsum``) so the
result does not depend on the order in which blocks are merged.
"""

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .bounds import EQUALITY_TOL, VIOLATION_SLACK
from .ensembles import BLOCK_SIZE, EnsembleSpec, draw, sample_block
from .extremal import change_of_variables, lambda_max_batch
from .operators import block_commutator_norm_sq, lemma2_spectrum, perturb_to_generic, tilde_materialize
from .spectral import symmetric_eigen

BOUND_CHECKS = ("bw", "kyfan", "cdck", "infnorm")
CHECKS = BOUND_CHECKS + (
    "pythagorean",
    "scalar",
    "gap",
    "change_of_variables",
    "extremal",
    "spectrum",
)

PYTHAGOREAN_TOL = 1e-12
CHANGE_OF_VARIABLES_TOL = 1e-10
EXTREMAL_SLACK = 1e-8
SPECTRUM_VALUE_TOL = 1e-9
SPECTRUM_VECTOR_TOL = 1e-10


def parse_checks(text):
    names = tuple(dict.fromkeys(c.strip() for c in text.split(",") if c.strip()))
    unknown = [c for c in names if c not in CHECKS]
    if unknown:
        raise ValueError(f"unknown checks {unknown}; expected names from {CHECKS}")
    if not names:
        raise ValueError("no checks requested")
    return names


# --------------------------------------------------------------------------
# per-block evaluation


def _sym_mask(xs):
    scale = np.maximum(1.0, np.max(np.abs(xs), axis=(1, 2)))
    return np.max(np.abs(xs - np.swapaxes(xs, 1, 2)), axis=(1, 2)) <= 1e-12 * scale


def _diag_mask(xs):
    n = xs.shape[-1]
    if n == 1:
        return np.ones(len(xs), dtype=bool)
    off = np.abs(xs[:, ~np.eye(n, dtype=bool)]).max(axis=1)
    return off <= 1e-12 * np.max(np.abs(xs), axis=(1, 2))


def _commutator_sq(xs, ys):
    c = xs @ ys - ys @ xs
    return np.sum(c * c, axis=(1, 2))


def _offdiag_max(ys):
    n = ys.shape[-1]
    if n == 1:
        return np.zeros(len(ys))
    return np.abs(ys[:, ~np.eye(n, dtype=bool)]).max(axis=1)


@dataclass
class _Column:
    applicable: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    violation: np.ndarray


def _bound_column(applicable, lhs, rhs, slack=VIOLATION_SLACK):
    rhs = np.where(applicable, rhs, np.nan)
    violation = applicable & (lhs > rhs * (1.0 + slack))
    return _Column(applicable, lhs, rhs, violation)


def evaluate_block(xs, ys, checks, base_offset=0):
    """Run ``checks`` on paired stacks; returns ``(columns, failures, spectrum)``.

    ``failures`` lists ``(offset, check, message)`` for trials where a solver
    raised; those trials are marked not applicable for that check.
    """
    k, n, _ = xs.shape
    columns = {}
    failures = []
    lhs = _commutator_sq(xs, ys)
    x2 = np.sum(xs * xs, axis=(1, 2))
    y2 = np.sum(ys * ys, axis=(1, 2))
    ones = np.ones(k, dtype=bool)
    need = set(checks)

    kyfan_sq = None
    if need & {"kyfan", "extremal", "spectrum"}:
        s, sweeps = kernels.svdvals_batch(xs)
        ok = sweeps >= 0
        for b in np.nonzero(~ok)[0]:
            failures.append((base_offset + int(b), "svd", "one-sided Jacobi did not converge"))
        kyfan_sq = np.sum(s[:, :2] ** 2, axis=1)
        sigma = s
    sym = _sym_mask(xs)
    diag = _diag_mask(xs)

    eig = None
    if need & {"cdck", "gap"} and sym.any():
        idx = np.nonzero(sym)[0]
        sub = xs[idx]
        values, sweeps = kernels.eigvalsh_batch(0.5 * (sub + np.swapaxes(sub, 1, 2)))
        eig = np.full((k, n), np.nan)
        eig[idx] = values
        for b in idx[sweeps < 0]:
            failures.append((base_offset + int(b), "eigen", "Jacobi did not converge"))
            sym = sym.copy()
            sym[b] = False

    if "bw" in need:
        columns["bw"] = _bound_column(ones, lhs, 2.0 * x2 * y2)
    if "kyfan" in need:
        rhs = np.zeros(k) if n == 1 else 2.0 * kyfan_sq * y2
        columns["kyfan"] = _bound_column(ok, lhs, rhs)
    spread = np.zeros(k)
    if eig is not None:
        spread[sym] = eig[sym].max(axis=1) - eig[sym].min(axis=1)
    if "cdck" in need:
        columns["cdck"] = _bound_column(sym, lhs, spread * spread * y2)
    if "infnorm" in need:
        columns["infnorm"] = _bound_column(diag, lhs, x2 * (y2 + 2.0 * _offdiag_max(ys) ** 2))
    if "pythagorean" in need:
        upper = np.triu(ys, 1)
        lower = np.tril(ys, -1)
        parts = _commutator_sq(xs, upper) + _commutator_sq(xs, lower)
        bad = diag & (np.abs(lhs - parts) > PYTHAGOREAN_TOL * lhs)
        columns["pythagorean"] = _Column(diag, np.where(diag, parts, np.nan), np.where(diag, lhs, np.nan), bad)
    if "scalar" in need:
        lam = np.diagonal(xs, axis1=1, axis2=2)
        ysym = 0.5 * (ys + np.swapaxes(ys, 1, 2))
        iu = np.triu_indices(n, 1)
        il = np.tril_indices(n, -1)
        diff_sq = (lam[:, :, None] - lam[:, None, :]) ** 2
        s_lhs = 2.0 * np.sum(diff_sq[:, iu[0], iu[1]] * ysym[:, iu[0], iu[1]] ** 2, axis=1)
        low = ysym[:, il[0], il[1]] ** 2
        peak = low.max(axis=1) if low.shape[1] else np.zeros(k)
        s_rhs = np.sum(lam * lam, axis=1) * (2.0 * low.sum(axis=1) + 2.0 * peak)
        columns["scalar"] = _bound_column(diag, s_lhs, s_rhs)
    if "gap" in need:
        gap_ok = sym & (n >= 2)
        g_lhs = spread * spread
        g_rhs = np.zeros(k)
        if eig is not None:
            g_rhs[sym] = 2.0 * np.sort(eig[sym] ** 2, axis=1)[:, -2:].sum(axis=1)
        columns["gap"] = _bound_column(gap_ok, g_lhs, g_rhs)
    if "change_of_variables" in need:
        block_side = np.full(k, np.nan)
        app = ones.copy()
        for b in range(k):
            try:
                s_b, pair = change_of_variables(xs[b], ys[b])
                block_side[b] = block_commutator_norm_sq(s_b, pair)
            except Exception as exc:  # recorded, campaign continues
                app[b] = False
                failures.append((base_offset + b, "change_of_variables", str(exc)))
        scale = np.maximum(1.0, x2 * y2)
        bad = app & (np.abs(block_side - lhs) > CHANGE_OF_VARIABLES_TOL * scale)
        columns["change_of_variables"] = _Column(app, block_side, np.where(app, lhs, np.nan), bad)
    if "extremal" in need:
        try:
            lam_max = lambda_max_batch(xs)
            app = ok.copy()
        except Exception as exc:
            lam_max = np.full(k, np.nan)
            app = np.zeros(k, dtype=bool)
            failures.extend((base_offset + b, "extremal", str(exc)) for b in range(k))
        ky = 2.0 * kyfan_sq
        chain_bad = ky > 2.0 * x2 * (1.0 + EXTREMAL_SLACK)
        col = _bound_column(app, lam_max, ky, slack=EXTREMAL_SLACK)
        col.violation = col.violation | (app & chain_bad)
        columns["extremal"] = col

    spectrum = None
    if "spectrum" in need:
        residuals = []
        for b in range(k):
            try:
                s_b = perturb_to_generic(sigma[b], seed=base_offset + b)
                pred = lemma2_spectrum(s_b)
                numeric = np.sort(symmetric_eigen(tilde_materialize(s_b)).values)
                top = float(np.max(s_b * s_b))
                value_err = float(np.max(np.abs(np.sort(pred.values()) - numeric))) / top
                vec_err = float(np.max(pred.residuals())) / max(1.0, top)
                residuals.append((value_err, vec_err))
            except Exception as exc:
                failures.append((base_offset + b, "spectrum", str(exc)))
        spectrum = residuals
    return columns, failures, spectrum


# --------------------------------------------------------------------------
# aggregation


@dataclass
class CheckStats:
    checked: int = 0
    violations: int = 0
    max_ratio: Optional[float] = None
    mean_ratio: Optional[float] = None
    equality_hits: int = 0

    def to_dict(self):
        return {
            "checked": self.checked,
            "violations": self.violations,
            "max_ratio": self.max_ratio,
            "mean_ratio": self.mean_ratio,
            "equality_hits": self.equality_hits,
        }


@dataclass
class SpectrumStats:
    instances: int = 0
    max_residual: float = 0.0
    violations: int = 0

    def to_dict(self):
        return {"instances": self.instances, "max_residual": self.max_residual, "violations": self.violations}


@dataclass
class CampaignSummary:
    spec_x: EnsembleSpec
    spec_y: EnsembleSpec
    checks: tuple
    trials: int
    stats: dict
    spectrum: Optional[SpectrumStats]
    violations: list
    failures: list
    equality_tol: float = EQUALITY_TOL
    runtime_ms: float = 0.0
    trial_rows: list = field(default=None, repr=False)

    @property
    def passed(self):
        spectral_ok = self.spectrum is None or self.spectrum.violations == 0
        return not self.violations and not self.failures and spectral_ok

    def to_dict(self, include_timing=False):
        out = {
            "x": self.spec_x.to_dict(),
            "y": self.spec_y.to_dict(),
            "checks": list(self.checks),
            "equality_tol": self.equality_tol,
            "trials": self.trials,
            "passed": self.passed,
            "stats": {name: self.stats[name].to_dict() for name in self.checks if name in self.stats},
            "spectrum": None if self.spectrum is None else self.spectrum.to_dict(),
            "violation_count": len(self.violations),
            "failure_count": len(self.failures),
            "violation_records": self.violations,
            "failures": self.failures,
        }
        if include_timing:
            out["runtime_ms"] = self.runtime_ms
        return out

    def to_json(self, include_timing=False):
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=True)

    def to_csv(self, include_timing=False):
        """Flat two-line CSV (header, values) of every scalar summary field.

        Cells hold the JSON encoding of each value, so the CSV and JSON forms
        agree exactly; record lists are represented by their counts.
        """
        flat = flatten_summary(self.to_dict(include_timing))
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(list(flat))
        writer.writerow([json.dumps(v) for v in flat.values()])
        return buf.getvalue()

    def trials_csv(self):
        """One row per trial: offset, lhs, and per-check applicability and sides."""
        if self.trial_rows is None:
            raise ValueError("campaign was run without keep_trials")
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        header = ["offset", "lhs"]
        for name in self.checks:
            if name != "spectrum":
                header += [f"{name}.applicable", f"{name}.lhs", f"{name}.rhs", f"{name}.violation"]
        writer.writerow(header)
        writer.writerows(self.trial_rows)
        return buf.getvalue()


def flatten_summary(d, prefix=""):
    flat = {}
    for key in sorted(d):
        value = d[key]
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(flatten_summary(value, name + "."))
        elif isinstance(value, list):
            if key in ("violation_records", "failures"):
                continue
            flat[name] = ",".join(str(v) for v in value)
        else:
            flat[name] = value
    return flat


def _block_task(args):
    spec_x, spec_y, checks, block, keep_trials = args
    xs = sample_block(spec_x, block)
    ys = sample_block(spec_y, block)
    base = block * BLOCK_SIZE
    columns, failures, spectrum = evaluate_block(xs, ys, checks, base_offset=base)
    rows = None
    if keep_trials:
        lhs = _commutator_sq(xs, ys)
        rows = []
        for b in range(len(xs)):
            row = [base + b, repr(float(lhs[b]))]
            for name in checks:
                if name == "spectrum":
                    continue
                col = columns[name]
                row += [int(col.applicable[b]), repr(float(col.lhs[b])), repr(float(col.rhs[b])), int(col.violation[b])]
            rows.append(row)
    return block, columns, failures, spectrum, rows


def run_campaign(spec_x, spec_y, checks, equality_tol=EQUALITY_TOL, workers=1, keep_trials=False):
    """Pair trial ``t`` of ``spec_x`` with trial ``t`` of ``spec_y`` and run
    ``checks`` on every pair. Violations and solver failures are collected
    rather than raised."""
    checks = tuple(checks)
    unknown = [c for c in checks if c not in CHECKS]
    if unknown:
        raise ValueError(f"unknown checks {unknown}")
    if spec_x.n != spec_y.n:
        raise ValueError("X and Y ensembles must share n")
    if spec_x.count != spec_y.count:
        raise ValueError("X and Y ensembles must have the same count")
    start = time.perf_counter()
    tasks = [(spec_x, spec_y, checks, b, keep_trials) for b in range(spec_x.blocks)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_block_task, tasks))
    else:
        results = [_block_task(t) for t in tasks]
    results.sort(key=lambda r: r[0])

    ratios = {name: [] for name in checks if name != "spectrum"}
    stats = {name: CheckStats() for name in ratios}
    violations = []
    failures = []
    spectrum = SpectrumStats() if "spectrum" in checks else None
    rows = [] if keep_trials else None
    for block, columns, block_failures, block_spectrum, block_rows in results:
        base = block * BLOCK_SIZE
        for name, col in columns.items():
            st = stats[name]
            st.checked += int(col.applicable.sum())
            st.violations += int(col.violation.sum())
            live = col.applicable & (col.rhs > 0)
            r = col.lhs[live] / col.rhs[live]
            ratios[name].extend(r.tolist())
            eq = col.applicable & (np.abs(col.rhs - col.lhs) <= equality_tol * col.rhs)
            st.equality_hits += int(eq.sum())
            for b in np.nonzero(col.violation)[0]:
                violations.append({
                    "check": name,
                    "offset": base + int(b),
                    "seed_x": spec_x.seed,
                    "stream_x": spec_x.stream,
                    "seed_y": spec_y.seed,
                    "stream_y": spec_y.stream,
                    "lhs": float(col.lhs[b]),
                    "rhs": float(col.rhs[b]),
                })
        failures.extend({"offset": o, "check": c, "message": m} for o, c, m in block_failures)
        if spectrum is not None:
            for value_err, vec_err in block_spectrum:
                spectrum.instances += 1
                spectrum.max_residual = max(spectrum.max_residual, value_err, vec_err)
                if value_err > SPECTRUM_VALUE_TOL or vec_err > SPECTRUM_VECTOR_TOL:
                    spectrum.violations += 1
        if rows is not None:
            rows.extend(block_rows)
    for name, st in stats.items():
        if ratios[name]:
            st.max_ratio = max(ratios[name])
            st.mean_ratio = math.fsum(ratios[name]) / len(ratios[name])
    elapsed = (time.perf_counter() - start) * 1e3
    return CampaignSummary(
        spec_x=spec_x,
        spec_y=spec_y,
        checks=checks,
        trials=spec_x.count,
        stats=stats,
        spectrum=spectrum,
        violations=violations,
        failures=failures,
        equality_tol=equality_tol,
        runtime_ms=elapsed,
        trial_rows=rows,
    )


def replay(spec_x, spec_y, offset):
    """Regenerate the ``(X, Y)`` pair of trial ``offset``."""
    return draw(spec_x, offset), draw(spec_y, offset)


# --------------------------------------------------------------------------
# bound comparison


def compare_bounds(n, count, seed, kinds=("gaussian", "symmetric", "diagonal"), equality_tol=EQUALITY_TOL):
    """Win rates of the four bound families per X ensemble (Y Gaussian).

    A family wins a trial when it has the smallest value among the applicable
    ones, ties going to the earlier family in ``bw, kyfan, cdck, infnorm``.
    """
    rows = []
    for stream, kind in enumerate(kinds):
        spec_x = EnsembleSpec(n, kind, count, seed, stream=2 * stream)
        spec_y = EnsembleSpec(n, "gaussian", count, seed, stream=2 * stream + 1)
        wins = {name: 0 for name in BOUND_CHECKS}
        app = {name: 0 for name in BOUND_CHECKS}
        ratio_lists = {name: [] for name in BOUND_CHECKS}
        for block in range(spec_x.blocks):
            xs = sample_block(spec_x, block)
            ys = sample_block(spec_y, block)
            columns, _, _ = evaluate_block(xs, ys, BOUND_CHECKS, base_offset=block * BLOCK_SIZE)
            values = np.stack([np.where(columns[name].applicable, columns[name].rhs, np.inf) for name in BOUND_CHECKS])
            best = np.argmin(values, axis=0)
            for i, name in enumerate(BOUND_CHECKS):
                col = columns[name]
                app[name] += int(col.applicable.sum())
                wins[name] += int(np.sum(best == i))
                live = col.applicable & (col.rhs > 0)
                ratio_lists[name].extend((col.lhs[live] / col.rhs[live]).tolist())
        for name in BOUND_CHECKS:
            r = ratio_lists[name]
            rows.append({
                "kind_x": kind,
                "bound": name,
                "applicable": app[name],
                "wins": wins[name],
                "win_rate": wins[name] / count,
                "mean_ratio": math.fsum(r) / len(r) if r else None,
            })
    return rows
