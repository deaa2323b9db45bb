"""Page-probability distributions over frequency-ranked pages.

Pages are identified by their 1-based rank: page 1 is the most probable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

NORM_TOL = 1e-9

EXPLICIT = "explicit"
POWER_LAW = "power_law"
MULTICORE = "multicore"


@dataclass(frozen=True, eq=False)
class PageDistribution:
    """Sorted page probabilities ``p_1 >= ... >= p_m`` with prefix sums.

    Instances are immutable; ``probs`` and ``cum`` are read-only arrays.
    Use the module-level constructors rather than building one directly.
    """

    probs: np.ndarray
    cum: np.ndarray
    kind: str = EXPLICIT
    alpha: float | None = None
    kappa: float | None = None
    # Normalised cumulative used for sampling; last positive entry is exactly 1.
    _sample_cum: np.ndarray = field(default=None, repr=False)
    _last_positive: int = field(default=0, repr=False)

    @property
    def m(self) -> int:
        return len(self.probs)

    def p(self, i: int) -> float:
        """Probability of the page with rank ``i`` (1-based); 0 beyond ``m``."""
        if i < 1:
            raise ValueError(f"page rank must be >= 1, got {i}")
        return float(self.probs[i - 1]) if i <= self.m else 0.0

    def prefix(self, x: int, y: int) -> float:
        """Mass of ranks ``x..y`` inclusive."""
        if not (1 <= x <= y <= self.m):
            raise ValueError(f"prefix range [{x}:{y}] outside 1..{self.m}")
        lo = self.cum[x - 2] if x > 1 else 0.0
        return float(min(max(self.cum[y - 1] - lo, 0.0), 1.0))

    def tail(self, k: int) -> float:
        """Mass of the pages ranked after the top ``k`` (``p[k+1:m]``)."""
        if k >= self.m:
            return 0.0
        return self.prefix(k + 1, self.m)

    def descriptor(self) -> dict:
        if self.kind == POWER_LAW:
            return {"kind": POWER_LAW, "alpha": self.alpha, "m": self.m}
        if self.kind == MULTICORE:
            return {"kind": MULTICORE, "alpha": self.alpha, "kappa": self.kappa, "m": self.m}
        return {"kind": EXPLICIT, "probs": [float(v) for v in self.probs]}

    def __eq__(self, other):
        if not isinstance(other, PageDistribution):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.alpha == other.alpha
            and self.kappa == other.kappa
            and np.array_equal(self.probs, other.probs)
        )

    __hash__ = None


def _build(probs, kind=EXPLICIT, alpha=None, kappa=None) -> PageDistribution:
    probs = np.array(probs, dtype=np.float64)
    if probs.ndim != 1 or len(probs) == 0:
        raise ValueError("probabilities must be a non-empty 1-d sequence")
    if np.any(~np.isfinite(probs)) or np.any(probs < 0):
        raise ValueError("probabilities must be finite and non-negative")
    if np.any(np.diff(probs) > 0):
        raise ValueError("probabilities must be sorted in non-increasing order")
    total = math.fsum(probs)
    if abs(total - 1.0) > NORM_TOL:
        raise ValueError(f"probabilities sum to {total!r}, not 1")
    cum = np.cumsum(probs)
    positive = np.flatnonzero(probs > 0)
    last = int(positive[-1])
    sample_cum = cum / cum[last]
    sample_cum[last:] = 1.0
    for arr in (probs, cum, sample_cum):
        arr.flags.writeable = False
    return PageDistribution(probs, cum, kind, alpha, kappa, sample_cum, last)


def explicit(probs) -> PageDistribution:
    """Distribution from an explicit, already sorted probability vector."""
    return _build(probs)


def uniform(m: int) -> PageDistribution:
    if m < 1:
        raise ValueError("m must be >= 1")
    return _build(np.full(m, 1.0 / m))


def _check_alpha_m(alpha, m):
    if not alpha > 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    if int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")


def _rank_weights(alpha: float, m: int) -> np.ndarray:
    w = np.arange(1, m + 1, dtype=np.float64) ** (-float(alpha))
    # pow is monotone in exact arithmetic; guard against ulp-level wobble
    return np.minimum.accumulate(w)


def zeta_partial(alpha: float, m: int) -> float:
    """Return ``L(alpha, m) = sum_{i=1}^m i^-alpha`` (exactly rounded sum)."""
    _check_alpha_m(alpha, m)
    return math.fsum(_rank_weights(alpha, int(m)))


def power_law(alpha: float, m: int) -> PageDistribution:
    """Power-law distribution ``p_i = i^-alpha / L(alpha, m)``."""
    _check_alpha_m(alpha, m)
    w = _rank_weights(alpha, int(m))
    probs = w / math.fsum(w)
    return _build(probs, POWER_LAW, alpha=float(alpha))


def multicore_mass(p: np.ndarray, kappa: float) -> np.ndarray:
    """Un-normalised multi-core mass ``1 - (1 - p)^kappa``, exactly 1 where p == 1."""
    p = np.asarray(p, dtype=np.float64)
    with np.errstate(divide="ignore"):
        raw = -np.expm1(kappa * np.log1p(-p))
    raw[p >= 1.0] = 1.0
    return raw


def multicore_power_law(alpha: float, m: int, kappa: float) -> PageDistribution:
    """Aggregate request distribution of ``kappa`` concurrent power-law streams.

    ``p~_i = C * (1 - (1 - p_i)^kappa)`` where ``p_i`` is the power-law
    probability and ``C`` normalises. ``kappa`` may be fractional.
    """
    _check_alpha_m(alpha, m)
    if not kappa >= 1:
        raise ValueError(f"kappa must be >= 1, got {kappa}")
    base = power_law(alpha, m).probs
    if kappa == 1:
        probs = np.array(base)
    else:
        raw = np.minimum.accumulate(multicore_mass(base, float(kappa)))
        probs = raw / math.fsum(raw)
    return _build(probs, MULTICORE, alpha=float(alpha), kappa=float(kappa))


def pad_to(dist: PageDistribution, m_new: int) -> PageDistribution:
    """Append zero-probability dummy pages up to ``m_new`` pages."""
    if m_new < dist.m:
        raise ValueError(f"cannot pad a distribution of {dist.m} pages down to {m_new}")
    if m_new == dist.m:
        return dist
    probs = np.concatenate([dist.probs, np.zeros(m_new - dist.m)])
    return _build(probs, dist.kind, dist.alpha, dist.kappa)


def from_descriptor(desc: dict) -> PageDistribution:
    kind = desc.get("kind", EXPLICIT)
    if kind == POWER_LAW:
        return power_law(desc["alpha"], int(desc["m"]))
    if kind == MULTICORE:
        return multicore_power_law(desc["alpha"], int(desc["m"]), desc["kappa"])
    if kind == EXPLICIT:
        return explicit(desc["probs"])
    if kind == "uniform":
        return uniform(int(desc["m"]))
    raise ValueError(f"unknown distribution kind {kind!r}")


def dumps_descriptor(dist: PageDistribution) -> str:
    return json.dumps(dist.descriptor(), sort_keys=True)


def loads_descriptor(text: str) -> PageDistribution:
    return from_descriptor(json.loads(text))


# ---------------------------------------------------------------------------
# Request sequences


@dataclass(frozen=True, eq=False)
class RequestSequence:
    """Ordered page requests plus a record of where they came from."""

    pages: np.ndarray
    source: dict

    def __post_init__(self):
        if len(self.pages) == 0:
            raise ValueError("a request sequence must be non-empty")

    def __len__(self):
        return len(self.pages)

    def __eq__(self, other):
        if not isinstance(other, RequestSequence):
            return NotImplemented
        return self.source == other.source and np.array_equal(self.pages, other.pages)

    __hash__ = None


def draw_pages(dist: PageDistribution, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` i.i.d. 1-based page ranks from ``dist`` using ``rng``.

    Inverse-CDF sampling by binary search over the cumulative sums.
    """
    u = rng.random(n)
    idx = np.searchsorted(dist._sample_cum, u, side="right")
    np.minimum(idx, dist._last_positive, out=idx)
    idx += 1
    return idx.astype(np.int64, copy=False)


def sample_sequence(dist: PageDistribution, n: int, seed: int) -> RequestSequence:
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    pages = draw_pages(dist, n, rng)
    return RequestSequence(pages, {"kind": "synthetic", "seed": seed, "dist": dist.descriptor()})


def as_sequence(pages) -> RequestSequence:
    """Wrap a plain list of page identifiers (handy for hand-written traces)."""
    if isinstance(pages, RequestSequence):
        return pages
    return RequestSequence(np.asarray(pages, dtype=np.int64), {"kind": "inline"})


def write_sequence(seq: RequestSequence, path, header: dict | None = None) -> None:
    """One page index per line, optional ``#`` header lines."""
    with open(path, "w") as fh:
        if header is not None:
            fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
        fh.write("\n".join(map(str, seq.pages.tolist())))
        fh.write("\n")


def read_sequence(path) -> RequestSequence:
    pages = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                pages.append(int(line))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: not an integer page index: {line!r}") from None
    return RequestSequence(np.asarray(pages, dtype=np.int64), {"kind": "trace", "path": str(Path(path))})
