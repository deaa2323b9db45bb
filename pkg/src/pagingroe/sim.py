"""Monte Carlo estimation of ratio-of-expectations and phase statistics.

Every trial draws its own sequence from a generator keyed on
``(seed, cell, trial, stream)``, so results do not depend on the order in
which trials run.  Stream 0 feeds the workload, stream 1 the policy coins.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import bounds
from .dist import PageDistribution, draw_pages, explicit, multicore_power_law, power_law, uniform
from .phase import big_small_phases, marking_phases
from .policy import (
    _belady_kernel,
    _fifo_kernel,
    _fwf_kernel,
    _lfu_incache_kernel,
    _lru_kernel,
    _marker_kernel,
    _plfu_empirical_kernel,
    parse_policy,
)

WORKLOAD = 0
COINS = 1


def default_n(k: int) -> int:
    return max(10**5, 100 * k)


def trial_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def trial_pages(dist: PageDistribution, n: int, seed: int, trial: int, cell: int = 0) -> np.ndarray:
    return draw_pages(dist, n, trial_rng(seed, cell, trial, WORKLOAD))


def ratio_stderr(num: np.ndarray, den: np.ndarray) -> float:
    """Delta-method standard error of ``mean(num) / mean(den)`` over trials."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    t = len(num)
    if t < 2 or den.mean() == 0:
        return math.nan
    r = num.mean() / den.mean()
    cov = np.cov(num, den, ddof=1)
    var = (cov[0, 0] - 2 * r * cov[0, 1] + r * r * cov[1, 1]) / (t * den.mean() ** 2)
    return math.sqrt(max(var, 0.0))


def bootstrap_stderr(num, den, resamples: int, seed: int) -> float:
    """Trial-level bootstrap alternative to :func:`ratio_stderr`."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2**31 - 1,)))
    idx = rng.integers(0, len(num), size=(resamples, len(num)))
    ratios = num[idx].sum(axis=1) / den[idx].sum(axis=1)
    return float(ratios.std(ddof=1))


def policy_cost(descriptor: str, pages: np.ndarray, k: int, dist: PageDistribution,
                seed: int, trial: int, cell: int = 0) -> tuple[int, float]:
    """(faults, cost) of one policy on one trial's pages (1-based ranks)."""
    name, marker_seed = parse_policy(descriptor) if descriptor != "marker" else ("marker", None)
    n_ids = dist.m + 1
    if name == "plfu-oracle":
        if k >= dist.m:
            raise ValueError(f"PLFU needs k < m (k={k}, m={dist.m})")
        f = int(np.count_nonzero(pages > k))
        return f, 2.0 * f
    if name == "plfu-empirical":
        miss, cost = _plfu_empirical_kernel(pages, k, n_ids)
        return int(miss.sum()), float(cost)
    if name == "marker":
        key = (cell, trial, COINS) if marker_seed is None else (cell, trial, COINS, marker_seed)
        u = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key)).random(len(pages))
        miss = _marker_kernel(pages, k, n_ids, u)
    else:
        kernel = {
            "lru": _lru_kernel,
            "fifo": _fifo_kernel,
            "fwf": _fwf_kernel,
            "lfu-incache": _lfu_incache_kernel,
            "belady": _belady_kernel,
        }[name]
        miss = kernel(pages, k, n_ids)
    f = int(miss.sum())
    return f, float(f)


@dataclass(frozen=True)
class RoeEstimate:
    policy: str
    mean_alg_cost: float
    mean_opt_cost: float
    roe: float
    stderr: float
    n: int
    trials: int
    seed: int
    convention: str = "cost"
    undefined: bool = False

    def as_dict(self):
        return asdict(self)


def _check_roe_args(k, n, trials):
    if n < 10 * k:
        raise ValueError(f"n must be >= 10*k (n={n}, k={k})")
    if trials < 30:
        raise ValueError(f"need at least 30 trials, got {trials}")


def _roe_from(policy, alg, opt, n, trials, seed, convention, resamples=0):
    alg = np.asarray(alg, dtype=float)
    opt = np.asarray(opt, dtype=float)
    if opt.sum() == 0:
        return RoeEstimate(policy, alg.mean(), 0.0, math.nan, math.nan, n, trials, seed, convention, True)
    roe = alg.sum() / opt.sum()
    se = bootstrap_stderr(alg, opt, resamples, seed) if resamples else ratio_stderr(alg, opt)
    return RoeEstimate(policy, float(alg.mean()), float(opt.mean()), float(roe), se, n, trials, seed, convention)


def estimate_roe_many(policies, dist, k, n, trials, seed, convention="cost", resamples=0, cell=0):
    """Estimate RoE of several policies against Belady on shared sequences."""
    _check_roe_args(k, n, trials)
    if convention not in ("cost", "faults"):
        raise ValueError("convention must be 'cost' or 'faults'")
    for p in policies:
        if p != "marker":
            parse_policy(p)
    col = 1 if convention == "cost" else 0
    alg = {p: np.empty(trials) for p in policies}
    opt = np.empty(trials)
    for t in range(trials):
        pages = trial_pages(dist, n, seed, t, cell)
        opt[t] = policy_cost("belady", pages, k, dist, seed, t, cell)[0]
        for p in policies:
            alg[p][t] = policy_cost(p, pages, k, dist, seed, t, cell)[col]
    return {p: _roe_from(p, alg[p], opt, n, trials, seed, convention, resamples) for p in policies}


def estimate_roe(policy, dist, k, n, trials, seed, convention="cost", resamples=0) -> RoeEstimate:
    """Ratio of summed policy cost to summed Belady cost over ``trials`` sequences.

    ``convention="cost"`` charges oracle PLFU 2 per fault; ``"faults"``
    counts faults only.  ``resamples > 0`` switches the standard error to a
    trial-level bootstrap.
    """
    return estimate_roe_many([policy], dist, k, n, trials, seed, convention, resamples)[policy]


@dataclass(frozen=True)
class PhaseEstimate:
    """Per-phase mean pooled over trials, with a trial-level ratio stderr."""

    mean: float
    stderr: float
    phases: int
    trials: int

    @property
    def has_data(self) -> bool:
        return self.phases > 0


def _pooled(sums, counts, trials):
    sums = np.asarray(sums, float)
    counts = np.asarray(counts, float)
    total = int(counts.sum())
    if total == 0:
        return PhaseEstimate(math.nan, math.nan, 0, trials)
    return PhaseEstimate(float(sums.sum() / counts.sum()), ratio_stderr(sums, counts), total, trials)


def clean_page_stats(pages, k):
    """(sum of s, number of phases) over complete, non-first marking phases."""
    rep = marking_phases(pages, k)
    sel = rep.complete.copy()
    sel[0] = False
    return int(rep.clean[sel].sum()), int(sel.sum())


def estimate_clean_pages(dist, k, trials, seed, n=None) -> PhaseEstimate:
    """Mean clean pages per complete marking phase (first phase excluded)."""
    n = n or default_n(k)
    sums, counts = np.empty(trials), np.empty(trials)
    for t in range(trials):
        sums[t], counts[t] = clean_page_stats(trial_pages(dist, n, seed, t), k)
    return _pooled(sums, counts, trials)


def small_page_stats(pages, k, j):
    """(requests to page j, number of phases) over complete big/small phases."""
    rep = big_small_phases(pages, k)
    sel = rep.complete
    if not sel.any():
        return 0, 0
    hits = rep.per_phase(pages == j)
    return int(hits[sel].sum()), int(sel.sum())


def estimate_small_page_occurrences(dist, k, j, trials, seed, n=None) -> PhaseEstimate:
    """Mean requests to small page ``j`` per complete big/small phase."""
    if not k < j <= dist.m:
        raise ValueError(f"page {j} is not a small page for k={k}, m={dist.m}")
    n = n or default_n(k)
    sums, counts = np.empty(trials), np.empty(trials)
    for t in range(trials):
        sums[t], counts[t] = small_page_stats(trial_pages(dist, n, seed, t), k, j)
    return _pooled(sums, counts, trials)


# ---------------------------------------------------------------------------
# lower-bound demonstrations


@dataclass(frozen=True)
class UniformDemo:
    k: int
    n: int
    trials: int
    seed: int
    mean_phase_length: float
    expected_phase_length: float
    belady_faults_per_phase: float
    harmonic_k: float
    roe: dict  # policy -> RoeEstimate (unit faults)
    roe_plfu_cost: RoeEstimate

    def rows(self):
        yield {"metric": "mean_phase_length", "value": self.mean_phase_length,
               "expected": self.expected_phase_length}
        yield {"metric": "belady_faults_per_phase", "value": self.belady_faults_per_phase, "expected": 1.0}
        for name, est in self.roe.items():
            yield {"metric": f"roe_{name}", "value": est.roe, "expected": self.harmonic_k, "stderr": est.stderr}
        yield {"metric": "roe_plfu-oracle_cost", "value": self.roe_plfu_cost.roe,
               "expected": 2 * self.harmonic_k, "stderr": self.roe_plfu_cost.stderr}


def demo_uniform_lower_bound(k, n, trials, seed,
                             policies=("lru", "fifo", "marker", "plfu-oracle")) -> UniformDemo:
    """Uniform distribution over ``k+1`` pages, where every online policy has RoE ``H_k``.

    Phase lengths are pooled over all complete marking phases; Belady faults
    per phase skip the cold-start first phase.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    dist = uniform(k + 1)
    len_sum = np.zeros(trials)
    len_cnt = np.zeros(trials)
    opt_sum = np.zeros(trials)
    opt_cnt = np.zeros(trials)
    opt = np.zeros(trials)
    faults = {p: np.zeros(trials) for p in policies}
    plfu_cost = np.zeros(trials)
    for t in range(trials):
        pages = trial_pages(dist, n, seed, t)
        rep = marking_phases(pages, k)
        lens = rep.lengths[rep.complete]
        len_sum[t], len_cnt[t] = lens.sum(), len(lens)
        miss = _belady_kernel(pages, k, dist.m + 1)
        opt[t] = miss.sum()
        per = rep.per_phase(miss)
        sel = rep.complete.copy()
        sel[0] = False
        opt_sum[t], opt_cnt[t] = per[sel].sum(), sel.sum()
        for p in policies:
            f, c = policy_cost(p, pages, k, dist, seed, t)
            faults[p][t] = f
            if p == "plfu-oracle":
                plfu_cost[t] = c
    roe = {p: _roe_from(p, faults[p], opt, n, trials, seed, "faults") for p in policies}
    h = bounds.harmonic(k)
    return UniformDemo(
        k, n, trials, seed,
        mean_phase_length=float(len_sum.sum() / len_cnt.sum()) if len_cnt.sum() else math.nan,
        expected_phase_length=(k + 1) * h,
        belady_faults_per_phase=float(opt_sum.sum() / opt_cnt.sum()) if opt_cnt.sum() else math.nan,
        harmonic_k=h,
        roe=roe,
        roe_plfu_cost=_roe_from("plfu-oracle", plfu_cost, opt, n, trials, seed, "cost"),
    )


def separation_distribution(k: int) -> PageDistribution:
    """k big pages of mass ``(1-eps)/k`` and one small page of mass ``eps = 1/k^3``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    eps = 1.0 / k**3
    return explicit([(1.0 - eps) / k] * k + [eps])


@dataclass(frozen=True)
class SeparationDemo:
    k: int
    n: int
    trials: int
    seed: int
    roe_lru: RoeEstimate
    roe_plfu: RoeEstimate
    bound_plfu_harmonic: float
    ratio: float

    def rows(self):
        yield {"k": self.k, "roe_lru": self.roe_lru.roe, "roe_lru_stderr": self.roe_lru.stderr,
               "roe_plfu": self.roe_plfu.roe, "roe_plfu_stderr": self.roe_plfu.stderr,
               "bound_plfu_harmonic": self.bound_plfu_harmonic, "ratio": self.ratio}


def demo_lru_vs_plfu(k, n, trials, seed) -> SeparationDemo:
    """LRU against oracle PLFU where one rare page breaks LRU's recency order.

    The rare page has mass ``1/k^3``; pick ``n`` well above ``k^3`` so that
    cold-start misses do not dominate.
    """
    dist = separation_distribution(k)
    lru = np.zeros(trials)
    plfu = np.zeros(trials)
    opt = np.zeros(trials)
    for t in range(trials):
        pages = trial_pages(dist, n, seed, t)
        opt[t] = _belady_kernel(pages, k, dist.m + 1).sum()
        lru[t] = _lru_kernel(pages, k, dist.m + 1).sum()
        plfu[t] = 2.0 * np.count_nonzero(pages > k)
    r_lru = _roe_from("lru", lru, opt, n, trials, seed, "faults")
    r_plfu = _roe_from("plfu-oracle", plfu, opt, n, trials, seed, "cost")
    return SeparationDemo(k, n, trials, seed, r_lru, r_plfu,
                          bounds.bound_plfu_harmonic(dist, k), r_lru.roe / r_plfu.roe)


# ---------------------------------------------------------------------------
# bound-validation sweep

SWEEP_COLUMNS = [
    "model", "alpha", "kappa", "k", "m",
    "roe_lru", "roe_lru_stderr", "roe_plfu", "roe_plfu_stderr",
    "bound_lru", "bound_plfu_clean", "bound_plfu_harmonic", "bound_plfu_costrate",
    "formula_min", "certificate",
    "clean_mean", "clean_stderr", "clean_lb",
    "opt_rate", "opt_rate_stderr", "opt_rate_lb",
    "plfu_rate", "plfu_rate_expected", "plfu_rate_sigma",
    "pass_lru", "pass_plfu", "pass_clean", "pass_opt_rate", "pass_plfu_rate", "pass_certificate",
]
PASS_COLUMNS = [c for c in SWEEP_COLUMNS if c.startswith("pass_")]


@dataclass(frozen=True)
class SweepCell:
    model: str
    alpha: float
    kappa: float
    k: int

    def dist(self) -> PageDistribution:
        if self.model == "power_law":
            return power_law(self.alpha, 2 * self.k)
        return multicore_power_law(self.alpha, 2 * self.k, self.kappa)


def sweep_grid(alphas, ks, kappas=()) -> list[SweepCell]:
    """Power-law cells plus one multi-core cell per ``kappa``, in sorted key order."""
    cells = [SweepCell("power_law", float(a), 1.0, int(k)) for a in alphas for k in ks]
    cells += [SweepCell("multicore", float(a), float(c), int(k)) for a in alphas for k in ks for c in kappas]
    return sorted(cells, key=lambda c: (c.model != "power_law", c.alpha, c.kappa, c.k))


@dataclass
class SweepRow:
    values: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.values[c] for c in PASS_COLUMNS)

    def __getitem__(self, key):
        return self.values[key]


def run_cell(cell: SweepCell, n: int, trials: int, seed: int, cell_index: int = 0) -> SweepRow:
    dist = cell.dist()
    k = cell.k
    _check_roe_args(k, n, trials)
    lru = np.empty(trials)
    plfu = np.empty(trials)
    opt = np.empty(trials)
    s_sum = np.empty(trials)
    s_cnt = np.empty(trials)
    for t in range(trials):
        pages = trial_pages(dist, n, seed, t, cell_index)
        opt[t] = _belady_kernel(pages, k, dist.m + 1).sum()
        lru[t] = _lru_kernel(pages, k, dist.m + 1).sum()
        plfu[t] = 2.0 * np.count_nonzero(pages > k)
        s_sum[t], s_cnt[t] = clean_page_stats(pages, k)
    r_lru = _roe_from("lru", lru, opt, n, trials, seed, "faults")
    r_plfu = _roe_from("plfu-oracle", plfu, opt, n, trials, seed, "cost")
    clean = _pooled(s_sum, s_cnt, trials)
    rep = bounds.bound_report(dist, k)
    tail = rep.tail
    opt_rates = opt / n
    opt_rate = float(opt_rates.mean())
    opt_se = float(opt_rates.std(ddof=1) / math.sqrt(trials))
    plfu_rate = float(plfu.sum() / (n * trials))
    plfu_sigma = 2.0 * math.sqrt(tail * (1.0 - tail) / (n * trials))
    plfu_min = min(rep.roe_plfu_clean_upper, rep.roe_plfu_harmonic_upper, rep.roe_plfu_costrate_upper)
    clean_lb = rep.formula_min * k / 8.0
    cert = rep.certificate
    v = {
        "model": cell.model,
        "alpha": cell.alpha,
        "kappa": cell.kappa,
        "k": k,
        "m": dist.m,
        "roe_lru": r_lru.roe,
        "roe_lru_stderr": r_lru.stderr,
        "roe_plfu": r_plfu.roe,
        "roe_plfu_stderr": r_plfu.stderr,
        "bound_lru": rep.roe_lru_upper,
        "bound_plfu_clean": rep.roe_plfu_clean_upper,
        "bound_plfu_harmonic": rep.roe_plfu_harmonic_upper,
        "bound_plfu_costrate": rep.roe_plfu_costrate_upper,
        "formula_min": rep.formula_min,
        "certificate": cert,
        "clean_mean": clean.mean,
        "clean_stderr": clean.stderr,
        "clean_lb": clean_lb,
        "opt_rate": opt_rate,
        "opt_rate_stderr": opt_se,
        "opt_rate_lb": rep.cr_opt_lb,
        "plfu_rate": plfu_rate,
        "plfu_rate_expected": rep.cr_plfu,
        "plfu_rate_sigma": plfu_sigma,
        "pass_lru": bool(r_lru.roe <= rep.roe_lru_upper + 3 * r_lru.stderr),
        "pass_plfu": bool(r_plfu.roe <= plfu_min + 3 * r_plfu.stderr),
        "pass_clean": bool(clean.mean >= clean_lb - 3 * clean.stderr),
        "pass_opt_rate": bool(opt_rate >= rep.cr_opt_lb - 3 * opt_se),
        "pass_plfu_rate": bool(abs(plfu_rate - rep.cr_plfu) <= 3 * plfu_sigma),
        "pass_certificate": bool(cert is None or rep.formula_min >= cert - 1e-6),
    }
    return SweepRow(v)


def sweep(cells, n, trials, seed) -> list[SweepRow]:
    """Empirical RoE next to every closed-form bound for each grid cell."""
    return [run_cell(c, n, trials, seed, i) for i, c in enumerate(cells)]
