"""Offline phase decompositions of a request sequence.

Three flavours:

* marking phases -- a phase holds exactly ``k`` distinct pages and the
  request introducing the (k+1)-th distinct page opens the next phase;
* big/small phases -- ranks ``1..k`` are *big*; a phase ends on the request
  that completes the set of big pages;
* k'-phases -- a phase ends on the request that completes ``k'`` distinct pages.

Boundaries are 0-based half-open ``[start, end)`` request indices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .dist import PageDistribution, as_sequence
from .policy import _dense


@dataclass(frozen=True, eq=False)
class PhaseReport:
    kind: str
    starts: np.ndarray
    ends: np.ndarray
    complete: np.ndarray
    distinct: np.ndarray
    clean: np.ndarray | None = None  # s(phi): clean pages (marking) / distinct small pages (big-small)
    small: np.ndarray | None = None  # f(phi): small-page requests (big-small only)

    def __len__(self):
        return len(self.starts)

    @property
    def boundaries(self):
        return list(zip(self.starts.tolist(), self.ends.tolist()))

    @property
    def lengths(self) -> np.ndarray:
        return self.ends - self.starts

    @property
    def n_complete(self) -> int:
        return int(self.complete.sum())

    def per_phase(self, mask: np.ndarray) -> np.ndarray:
        """Sum a per-request 0/1 (or count) array over each phase."""
        return np.add.reduceat(np.asarray(mask, dtype=np.int64), self.starts)

    def records(self):
        for i in range(len(self)):
            rec = {
                "start": int(self.starts[i]),
                "end": int(self.ends[i]),
                "complete": bool(self.complete[i]),
                "distinct": int(self.distinct[i]),
            }
            if self.clean is not None:
                rec["s"] = int(self.clean[i])
            if self.small is not None:
                rec["f"] = int(self.small[i])
            yield rec

    def write(self, path) -> None:
        cols = ["start", "end", "complete", "distinct"]
        if self.clean is not None:
            cols.append("s")
        if self.small is not None:
            cols.append("f")
        with open(path, "w") as fh:
            fh.write("# " + " ".join(cols) + "\n")
            for rec in self.records():
                fh.write(" ".join(str(int(rec[c])) for c in cols) + "\n")


@njit(cache=True)
def _marking_kernel(pages, k, n_ids):
    n = pages.shape[0]
    last_phase = np.full(n_ids, -1, np.int64)
    starts = np.empty(n, np.int64)
    distinct = np.empty(n, np.int64)
    clean = np.empty(n, np.int64)
    q = 0
    starts[0] = 0
    distinct[0] = 0
    clean[0] = 0
    for t in range(n):
        x = pages[t]
        lp = last_phase[x]
        if lp == q:
            continue
        if distinct[q] == k:
            q += 1
            starts[q] = t
            distinct[q] = 0
            clean[q] = 0
        distinct[q] += 1
        # first phase: every page counts as clean by convention
        if q == 0 or last_phase[x] != q - 1:
            clean[q] += 1
        last_phase[x] = q
    return starts[: q + 1].copy(), distinct[: q + 1].copy(), clean[: q + 1].copy()


def marking_phases(seq, k: int) -> PhaseReport:
    """Split ``seq`` into marking phases and count clean pages per phase.

    A phase is complete when the next phase has started, so only the final
    phase can be incomplete.  ``clean[0]`` equals the first phase's distinct
    count by convention and should be left out of expectation estimates.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    pages, n_ids = _dense(as_sequence(seq).pages)
    starts, distinct, clean = _marking_kernel(pages, int(k), n_ids)
    ends = np.append(starts[1:], len(pages))
    complete = np.ones(len(starts), bool)
    complete[-1] = False
    return PhaseReport("marking", starts, ends, complete, distinct, clean=clean)


@njit(cache=True)
def _big_small_kernel(pages, k, n_ids):
    n = pages.shape[0]
    last_phase = np.full(n_ids, -1, np.int64)
    starts = np.empty(n + 1, np.int64)
    small_distinct = np.zeros(n + 1, np.int64)
    small_req = np.zeros(n + 1, np.int64)
    distinct = np.zeros(n + 1, np.int64)
    q = 0
    starts[0] = 0
    bigs = 0
    for t in range(n):
        x = pages[t]
        if last_phase[x] != q:
            last_phase[x] = q
            distinct[q] += 1
            if x <= k:
                bigs += 1
            else:
                small_distinct[q] += 1
        if x > k:
            small_req[q] += 1
        if bigs == k:
            q += 1
            starts[q] = t + 1
            bigs = 0
    # q is the number of complete phases; a trailing partial phase exists iff starts[q] < n
    n_phases = q + 1 if starts[q] < n else q
    return (
        starts[:n_phases].copy(),
        distinct[:n_phases].copy(),
        small_distinct[:n_phases].copy(),
        small_req[:n_phases].copy(),
        q,
    )


def big_small_phases(seq, k: int) -> PhaseReport:
    """Phases that end once every big page (rank <= k) has been requested.

    Pages must be 1-based ranks.  ``clean`` holds s(phi), the number of
    distinct small pages, and ``small`` holds f(phi), the number of
    small-page requests.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    pages = np.asarray(as_sequence(seq).pages, dtype=np.int64)
    if pages.min() < 1:
        raise ValueError("big/small phases need 1-based page ranks")
    starts, distinct, s, f, n_complete = _big_small_kernel(pages, int(k), int(pages.max()) + 1)
    ends = np.append(starts[1:], len(pages))
    complete = np.arange(len(starts)) < n_complete
    return PhaseReport("big_small", starts, ends, complete, distinct, clean=s, small=f)


@njit(cache=True)
def _kprime_kernel(pages, kp, n_ids):
    n = pages.shape[0]
    last_phase = np.full(n_ids, -1, np.int64)
    starts = np.empty(n + 1, np.int64)
    distinct = np.zeros(n + 1, np.int64)
    q = 0
    starts[0] = 0
    for t in range(n):
        x = pages[t]
        if last_phase[x] != q:
            last_phase[x] = q
            distinct[q] += 1
            if distinct[q] == kp:
                q += 1
                starts[q] = t + 1
    n_phases = q + 1 if starts[q] < n else q
    return starts[:n_phases].copy(), distinct[:n_phases].copy(), q


def kprime_phases(seq, k_prime: int) -> PhaseReport:
    """Phases ending on the request that completes ``k_prime`` distinct pages."""
    if k_prime < 1:
        raise ValueError("k_prime must be >= 1")
    pages, n_ids = _dense(as_sequence(seq).pages)
    starts, distinct, n_complete = _kprime_kernel(pages, int(k_prime), n_ids)
    ends = np.append(starts[1:], len(pages))
    complete = np.arange(len(starts)) < n_complete
    return PhaseReport("kprime", starts, ends, complete, distinct)


def kprime_threshold(dist: PageDistribution, k: int) -> int:
    """Largest ``k'`` with ``p[1:k'] <= 1 - p[k+1:m] / 2``.

    Returns ``m`` when the tail mass is zero; the cost-rate bound built on
    ``k'`` is vacuous in that case.
    """
    if not 1 <= k < dist.m:
        raise ValueError(f"need 1 <= k < m (k={k}, m={dist.m})")
    tail = dist.tail(k)
    if tail == 0.0:
        return dist.m
    limit = 1.0 - tail / 2.0
    # small slack absorbs rounding in the cumulative sums
    return int(np.searchsorted(dist.cum, limit + 1e-12, side="right"))
