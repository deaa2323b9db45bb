"""Trace ingestion and K-S fitting of power-law / multi-core power-law models.

The empirical curve is the accumulated relative frequency of pages ranked
by decreasing count; the model curve is the accumulated probability of the
fitted distribution over the same number of ranks.  Parameters minimise the
K-S statistic between the two curves.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .dist import multicore_mass, multicore_power_law, power_law

ALPHA_GRID = np.round(np.arange(0.05, 3.0 + 1e-9, 0.05), 10)
KAPPA_DECADES = 6
KAPPA_PER_DECADE = 7
ALPHA_TOL = 1e-3
LOG_KAPPA_TOL = math.log(1.01)
ALPHA_MIN = 1e-6
ALPHA_MAX = 10.0
KAPPA_MAX = 10.0 ** (KAPPA_DECADES + 1)

GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True, eq=False)
class TraceSummary:
    counts: dict  # identifier -> request count, in first-appearance order
    ranked_pages: list
    ranked_counts: np.ndarray
    total: int

    @property
    def m(self) -> int:
        return len(self.ranked_counts)

    def empirical_cdf(self) -> np.ndarray:
        return np.cumsum(self.ranked_counts) / self.total


def _summary(counts: dict) -> TraceSummary:
    if not counts:
        raise ValueError("trace contains no requests")
    # sorted() is stable, so equal counts keep first-appearance order
    ranked = sorted(counts, key=lambda p: -counts[p])
    ranked_counts = np.array([counts[p] for p in ranked], dtype=np.int64)
    return TraceSummary(counts, ranked, ranked_counts, int(ranked_counts.sum()))


def summarize(tokens) -> TraceSummary:
    """Summary of an in-memory sequence of page identifiers."""
    arr = np.asarray(tokens)
    if arr.dtype.kind in "iu" and arr.ndim == 1:
        if len(arr) == 0:
            raise ValueError("trace contains no requests")
        uniq, first, cnt = np.unique(arr, return_index=True, return_counts=True)
        order = np.argsort(first, kind="stable")
        return _summary({int(uniq[i]): int(cnt[i]) for i in order})
    return _summary(Counter(tokens))


def ingest_trace(path) -> TraceSummary:
    """Read a trace: one page identifier per line, ``#`` lines are comments.

    Blank lines are skipped.  A line holding more than one token, or bytes
    that are not valid UTF-8, is rejected with its line number.
    """
    counts: dict = {}
    with open(path, "rb") as fh:
        for lineno, raw in enumerate(fh, 1):
            try:
                line = raw.decode("utf-8").strip()
            except UnicodeDecodeError:
                raise ValueError(f"{path}:{lineno}: line is not valid UTF-8") from None
            if not line or line.startswith("#"):
                continue
            if len(line.split()) != 1:
                raise ValueError(f"{path}:{lineno}: expected one page identifier, got {line!r}")
            counts[line] = counts.get(line, 0) + 1
    return _summary(counts)


def _check_curve(curve, name):
    curve = np.asarray(curve, dtype=float)
    if curve.ndim != 1 or len(curve) == 0:
        raise ValueError(f"{name} curve must be a non-empty 1-d array")
    if np.any(np.diff(curve) < -1e-12):
        raise ValueError(f"{name} curve is not non-decreasing")
    if abs(curve[-1] - 1.0) > 1e-6:
        raise ValueError(f"{name} curve ends at {curve[-1]!r}, not 1")
    return curve


def ks_statistic(empirical, model) -> float:
    """Largest absolute gap between two cumulative curves over the ranks."""
    empirical = np.asarray(empirical, dtype=float)
    model = np.asarray(model, dtype=float)
    if empirical.shape != model.shape:
        raise ValueError(f"curve lengths differ: {len(empirical)} vs {len(model)}")
    empirical = _check_curve(empirical, "empirical")
    model = _check_curve(model, "model")
    return float(np.max(np.abs(empirical - model)))


@dataclass(frozen=True, eq=False)
class FitResult:
    model: str  # "power_law" or "multicore"
    alpha: float
    kappa: float
    ks: float
    empirical_cdf: np.ndarray
    model_cdf: np.ndarray
    total: int

    @property
    def m(self) -> int:
        return len(self.empirical_cdf)

    def record(self) -> dict:
        return {"model": self.model, "alpha": self.alpha, "kappa": self.kappa,
                "ks": self.ks, "m": self.m, "total": self.total}

    def to_json(self) -> str:
        return json.dumps(self.record(), sort_keys=True)


class _Objective:
    """K-S distance as a function of (alpha, log kappa) for a fixed trace."""

    def __init__(self, trace: TraceSummary):
        self.emp = trace.empirical_cdf()
        self.log_rank = np.log(np.arange(1, trace.m + 1, dtype=np.float64))
        self.cache = {}

    def cdf(self, alpha, log_kappa):
        w = np.exp(-alpha * self.log_rank)
        p = w / w.sum()
        if log_kappa > 0:
            p = multicore_mass(p, math.exp(log_kappa))
            p /= p.sum()
        return np.cumsum(p)

    def __call__(self, alpha, log_kappa=0.0):
        key = (alpha, log_kappa)
        if key not in self.cache:
            self.cache[key] = float(np.max(np.abs(self.emp - self.cdf(alpha, log_kappa))))
        return self.cache[key]


def _golden_min(f, lo, hi, tol):
    """Golden-section search for a minimum of ``f`` on ``[lo, hi]``."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def _check_trace(trace):
    if trace.m < 2:
        raise ValueError("fitting needs at least two distinct pages")


def _refine_alpha(obj, alpha, log_kappa, step):
    lo = max(ALPHA_MIN, alpha - step)
    hi = min(ALPHA_MAX, alpha + step)
    a, v = _golden_min(lambda x: obj(x, log_kappa), lo, hi, ALPHA_TOL)
    return (a, v) if v < obj(alpha, log_kappa) else (alpha, obj(alpha, log_kappa))


def _finish(kind, trace, alpha, kappa):
    if kind == "power_law":
        probs = power_law(alpha, trace.m).probs
    else:
        probs = multicore_power_law(alpha, trace.m, kappa).probs
    emp = trace.empirical_cdf()
    model = np.cumsum(probs)
    return FitResult(kind, float(alpha), float(kappa), ks_statistic(emp, model), emp, model, trace.total)


def fit_power_law(trace: TraceSummary) -> FitResult:
    """Fit ``alpha`` of a power law over the trace's distinct pages."""
    _check_trace(trace)
    obj = _Objective(trace)
    alpha = min(ALPHA_GRID, key=lambda a: obj(float(a), 0.0))
    alpha, _ = _refine_alpha(obj, float(alpha), 0.0, 0.05)
    return _finish("power_law", trace, alpha, 1.0)


def fit_multicore(trace: TraceSummary) -> FitResult:
    """Jointly fit ``(alpha, kappa)`` of the multi-core power-law model.

    Coarse grid over alpha and log-spaced kappa, then alternating
    golden-section refinement of alpha and log kappa.  The power-law fit
    (kappa = 1) is always a candidate, so the result never fits worse.
    """
    _check_trace(trace)
    obj = _Objective(trace)
    log_kappas = np.linspace(0.0, KAPPA_DECADES * math.log(10), KAPPA_DECADES * KAPPA_PER_DECADE + 1)
    best = min(((float(a), float(lk)) for a in ALPHA_GRID for lk in log_kappas), key=lambda x: obj(*x))
    alpha, lk = best
    a_step = 0.05
    k_step = log_kappas[1]
    for _ in range(20):
        before = obj(alpha, lk)
        alpha, _ = _refine_alpha(obj, alpha, lk, a_step)
        lo, hi = max(0.0, lk - k_step), min(math.log(KAPPA_MAX), lk + k_step)
        cand, v = _golden_min(lambda x: obj(alpha, x), lo, hi, LOG_KAPPA_TOL)
        if v < obj(alpha, lk):
            lk = cand
        if before - obj(alpha, lk) < 1e-9:
            break
        a_step, k_step = a_step / 2, k_step / 2
    fit = _finish("multicore", trace, alpha, math.exp(lk))
    pl = fit_power_law(trace)
    if pl.ks < fit.ks:
        fit = _finish("multicore", trace, pl.alpha, 1.0)
    return fit


def write_curve(path, curve) -> None:
    with open(path, "w") as fh:
        for r, v in enumerate(np.asarray(curve, dtype=float).tolist(), 1):
            fh.write(f"{r} {v!r}\n")


def read_curve(path) -> np.ndarray:
    vals = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                vals.append(float(line.split()[1]))
    return np.array(vals)


def export_cdf_curves(fit: FitResult, prefix) -> tuple[str, str]:
    """Write ``<prefix>_data.dat`` and ``<prefix>_model.dat`` (rank, cumulative)."""
    data_path = f"{prefix}_data.dat"
    model_path = f"{prefix}_model.dat"
    write_curve(data_path, fit.empirical_cdf)
    write_curve(model_path, fit.model_cdf)
    return data_path, model_path
