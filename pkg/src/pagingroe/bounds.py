"""Closed-form ratio-of-expectations bounds, cost rates and certificates.

Notation: ``p[x:y]`` is the mass of ranks ``x..y`` inclusive and the tail
``p[k+1:m]`` is the mass outside the top ``k`` pages.  A bound whose
denominator vanishes is *vacuous* and evaluates to ``inf``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from fractions import Fraction

from .dist import MULTICORE, POWER_LAW, PageDistribution, pad_to

INF = math.inf
MIN_FORMULA_K = 8


def harmonic(n: int) -> float:
    """n-th harmonic number; ``harmonic(0) == 0``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return math.fsum(1.0 / i for i in range(1, n + 1))


def _mass(dist: PageDistribution, lo: int, hi: int) -> float:
    # empty or out-of-range parts contribute nothing (pages past m are dummies)
    hi = min(hi, dist.m)
    lo = max(lo, 1)
    if lo > hi:
        return 0.0
    return dist.prefix(lo, hi)


def _num_range(k, a, b):
    """Numerator range [a*k, b*k] rounded inwards (never overstates the mass)."""
    return math.ceil(Fraction(a) * k), math.floor(Fraction(b) * k)


def _den_lo(k, a):
    """Denominator lower endpoint rounded outwards."""
    return math.floor(Fraction(a) * k)


def formula_terms(dist: PageDistribution, k: int) -> tuple[float, float]:
    """The two ratios whose minimum lower-bounds the clean pages per phase.

    ``(p[3k/8:k/2] + p[3k/2:m]) / p[3k/8:m]`` and ``p[11k/8:m] / p[k/2:m]``.
    Exact when ``k`` is a multiple of 8.  Otherwise numerator ranges are
    rounded inwards and denominator ranges outwards, so the value can only
    be understated.  A ratio with a zero denominator is reported as 0.
    """
    if k < MIN_FORMULA_K:
        raise ValueError(
            f"k must be >= {MIN_FORMULA_K}: the 3k/8, k/2, 11k/8, 3k/2 indices are "
            "evaluated exactly for k divisible by 8 and rounded conservatively otherwise"
        )
    if dist.m < 2 * k:
        dist = pad_to(dist, 2 * k)
    m = dist.m
    a_lo, a_hi = _num_range(k, "3/8", "1/2")
    c_lo, _ = _num_range(k, "3/2", "3/2")
    d_lo, _ = _num_range(k, "11/8", "11/8")
    den1 = _mass(dist, _den_lo(k, "3/8"), m)
    den2 = _mass(dist, _den_lo(k, "1/2"), m)
    t1 = (_mass(dist, a_lo, a_hi) + _mass(dist, c_lo, m)) / den1 if den1 > 0 else 0.0
    t2 = _mass(dist, d_lo, m) / den2 if den2 > 0 else 0.0
    return min(t1, 1.0), min(t2, 1.0)


def formula_min(dist: PageDistribution, k: int) -> float:
    """Minimum of :func:`formula_terms`; 0 means the LRU bounds are vacuous."""
    return min(formula_terms(dist, k))


def bound_lru(dist: PageDistribution, k: int) -> float:
    f = formula_min(dist, k)
    return 16.0 / f if f > 0 else INF


def bound_plfu_clean(dist: PageDistribution, k: int) -> float:
    return 2.0 * bound_lru(dist, k)


def bound_plfu_harmonic(dist: PageDistribution, k: int) -> float:
    """``2 * sum_{i=2}^{k+1} p_{k+1} / p[i:k+1]``, never above ``2 H_{k+1}``.

    Zero when ``p_{k+1} = 0``: PLFU then never faults.
    """
    if not 1 <= k < dist.m:
        raise ValueError(f"need 1 <= k < m (k={k}, m={dist.m})")
    pk1 = float(dist.probs[k])
    if pk1 == 0.0:
        return 0.0
    # running suffix sum p[i:k+1] accumulated from the smallest term upward
    terms = []
    run = pk1
    for i in range(k, 1, -1):
        terms.append(pk1 / run)
        run += float(dist.probs[i - 1])
    terms.append(pk1 / run)
    return 2.0 * math.fsum(terms)


def bound_plfu_costrate(dist: PageDistribution, k: int) -> float:
    tail = dist.tail(k)
    return 8.0 / tail - 4.0 if tail > 0 else INF


def bound_lazy(dist: PageDistribution, k: int) -> float:
    """Bound valid for any lazy policy: ``4/t^2 - 2/t`` with ``t = p[k+1:m]``."""
    tail = dist.tail(k)
    return 4.0 / tail**2 - 2.0 / tail if tail > 0 else INF


def opt_cost_rate_lb(tail: float) -> float:
    return tail * tail / (4.0 - 2.0 * tail)


def cost_rates(dist: PageDistribution, k: int) -> tuple[float, float, float]:
    """(PLFU cost rate, online lower bound, offline lower bound) per request."""
    tail = dist.tail(k)
    return 2.0 * tail, tail, opt_cost_rate_lb(tail)


def occurrence_cap(dist: PageDistribution, k: int, j: int) -> float:
    """Cap on the expected requests to small page ``j`` per big/small phase.

    ``1 + sum_{i=2}^{k} p_j / (p[i:k] + p_j)``
    """
    if not k < j <= dist.m:
        raise ValueError(f"page {j} is not a small page for k={k}, m={dist.m}")
    pj = dist.p(j)
    if pj == 0.0:
        return 1.0
    return 1.0 + math.fsum(pj / (dist.prefix(i, k) + pj) for i in range(2, k + 1))


# ---------------------------------------------------------------------------
# alpha-only certificates


def _pow_diff(a: float, b: float, e: float) -> float:
    # a**e - b**e, accurate when e is tiny
    return math.expm1(e * math.log(a)) - math.expm1(e * math.log(b))


def powerlaw_certificate(alpha: float) -> float:
    """Lower bound on :func:`formula_min` for any power law with ``m >= 2k``.

    Depends on ``alpha`` only.  Note the ``alpha == 1`` case is strictly
    larger than the limit of either neighbouring branch (both tend to
    ``1 - log 3 / log 4``).
    """
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    if alpha == 1:
        return 2.0 - math.log(11) / math.log(4)
    if alpha < 1:
        e = 1.0 - alpha
        return 1.0 - _pow_diff(3.0, 1.0, e) / _pow_diff(4.0, 1.0, e)
    e = alpha - 1.0
    first = 1.0 - _pow_diff(2.0, 2.0 / 3.0, e) / _pow_diff(8.0 / 3.0, 0.5, e)
    second = _pow_diff(4.0 / 3.0, 1.0, e) / _pow_diff(4.0, 1.0, e)
    return min(first, second)


def multicore_certificate(alpha: float, kappa: float) -> float:
    """Half the power-law certificate; independent of ``kappa``."""
    if not kappa >= 1:
        raise ValueError("kappa must be >= 1")
    return powerlaw_certificate(alpha) / 2.0


def certificate(dist: PageDistribution) -> float | None:
    if dist.kind == POWER_LAW:
        return powerlaw_certificate(dist.alpha)
    if dist.kind == MULTICORE:
        return multicore_certificate(dist.alpha, dist.kappa)
    return None


def sandwich_terms(x: float, kappa: float) -> tuple[float, float, float, float]:
    """``(kx, 1-(1-x)^kappa, kx/(1+kx), kx/2)``."""
    kx = kappa * x
    if kappa == 1:
        g = x  # identity; the log/exp route can land one ulp above kx
    elif x < 1:
        g = -math.expm1(kappa * math.log1p(-x))
    else:
        g = 1.0
    return kx, g, kx / (1.0 + kx), kx / 2.0


def sandwich_inequality_check(x: float, kappa: float, slack: float = 1e-12) -> bool:
    """Check ``kx >= 1-(1-x)^kappa >= kx/(1+kx) >= kx/2`` for ``0 <= x <= 1/kappa``."""
    if not kappa >= 1:
        raise ValueError("kappa must be >= 1")
    if not 0.0 <= x <= 1.0 / kappa:
        raise ValueError(f"x={x} outside [0, 1/kappa]")
    a, b, c, d = sandwich_terms(x, kappa)
    return a >= b - slack and b >= c - slack and c >= d - slack


# ---------------------------------------------------------------------------
# report


@dataclass(frozen=True)
class BoundReport:
    k: int
    m: int
    tail: float
    formula_min: float
    roe_lru_upper: float
    roe_plfu_clean_upper: float
    roe_plfu_harmonic_upper: float
    roe_plfu_costrate_upper: float
    roe_lazy_upper: float
    cr_plfu: float
    cr_online_lb: float
    cr_opt_lb: float
    certificate: float | None = None
    formula_vacuous: bool = False
    tail_vacuous: bool = False

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def header(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def csv_row(self) -> list[str]:
        return [_fmt(v) for v in asdict(self).values()]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def bound_report(dist: PageDistribution, k: int) -> BoundReport:
    f = formula_min(dist, k)
    lru = 16.0 / f if f > 0 else INF
    tail = dist.tail(k)
    cr = cost_rates(dist, k)
    return BoundReport(
        k=k,
        m=dist.m,
        tail=tail,
        formula_min=f,
        roe_lru_upper=lru,
        roe_plfu_clean_upper=2.0 * lru,
        roe_plfu_harmonic_upper=bound_plfu_harmonic(dist, k) if k < dist.m else 0.0,
        roe_plfu_costrate_upper=bound_plfu_costrate(dist, k),
        roe_lazy_upper=bound_lazy(dist, k),
        cr_plfu=cr[0],
        cr_online_lb=cr[1],
        cr_opt_lb=cr[2],
        certificate=certificate(dist),
        formula_vacuous=f == 0,
        tail_vacuous=tail == 0,
    )
