"""Cache replacement policies with unit fault cost (oracle PLFU pays 2).

Every simulator starts from an empty cache and returns a per-request miss
mask; ties are always broken towards the lower page identifier.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .dist import PageDistribution, RequestSequence, as_sequence

POLICY_NAMES = (
    "lru",
    "fifo",
    "fwf",
    "marker",
    "plfu-oracle",
    "plfu-empirical",
    "lfu-incache",
    "belady",
)


@dataclass(frozen=True)
class PolicyRun:
    policy: str
    faults: int
    cost: float
    misses: np.ndarray | None = field(default=None, compare=False, repr=False)


# ---------------------------------------------------------------------------
# kernels: pages are dense ints in [0, n_ids)


@njit(cache=True)
def _lru_kernel(pages, k, n_ids):
    n = pages.shape[0]
    miss = np.zeros(n, np.uint8)
    # doubly linked recency list; head = most recent, tail = least recent
    prev = np.full(n_ids, -1, np.int64)
    nxt = np.full(n_ids, -1, np.int64)
    resident = np.zeros(n_ids, np.bool_)
    head = -1
    tail = -1
    size = 0
    for t in range(n):
        x = pages[t]
        if resident[x]:
            if x == head:
                continue
            # unlink
            a = prev[x]
            b = nxt[x]
            nxt[a] = b
            if b != -1:
                prev[b] = a
            else:
                tail = a
        else:
            miss[t] = 1
            if size == k:
                v = tail
                tail = prev[v]
                if tail != -1:
                    nxt[tail] = -1
                else:
                    head = -1
                resident[v] = False
            else:
                size += 1
            resident[x] = True
        # push front
        prev[x] = -1
        nxt[x] = head
        if head != -1:
            prev[head] = x
        head = x
        if tail == -1:
            tail = x
    return miss


@njit(cache=True)
def _fifo_kernel(pages, k, n_ids):
    n = pages.shape[0]
    miss = np.zeros(n, np.uint8)
    resident = np.zeros(n_ids, np.bool_)
    ring = np.empty(k, np.int64)
    size = 0
    oldest = 0
    for t in range(n):
        x = pages[t]
        if resident[x]:
            continue
        miss[t] = 1
        if size < k:
            ring[size] = x
            size += 1
        else:
            resident[ring[oldest]] = False
            ring[oldest] = x
            oldest = (oldest + 1) % k
        resident[x] = True
    return miss


@njit(cache=True)
def _fwf_kernel(pages, k, n_ids):
    n = pages.shape[0]
    miss = np.zeros(n, np.uint8)
    resident = np.zeros(n_ids, np.bool_)
    slots = np.empty(k, np.int64)
    size = 0
    for t in range(n):
        x = pages[t]
        if resident[x]:
            continue
        miss[t] = 1
        if size == k:
            # every resident page is marked: flush and start a new phase
            for i in range(size):
                resident[slots[i]] = False
            size = 0
        slots[size] = x
        size += 1
        resident[x] = True
    return miss


@njit(cache=True)
def _marker_kernel(pages, k, n_ids, u):
    n = pages.shape[0]
    miss = np.zeros(n, np.uint8)
    resident = np.zeros(n_ids, np.bool_)
    marked = np.zeros(n_ids, np.bool_)
    cache = np.empty(k, np.int64)
    size = 0
    unmarked = np.empty(k, np.int64)
    upos = np.full(n_ids, -1, np.int64)
    n_unmarked = 0
    for t in range(n):
        x = pages[t]
        if resident[x]:
            if not marked[x]:
                marked[x] = True
                i = upos[x]
                last = unmarked[n_unmarked - 1]
                unmarked[i] = last
                upos[last] = i
                upos[x] = -1
                n_unmarked -= 1
            continue
        miss[t] = 1
        if size < k:
            cache[size] = x
            size += 1
        else:
            if n_unmarked == 0:
                # new phase
                for i in range(size):
                    y = cache[i]
                    marked[y] = False
                    unmarked[i] = y
                    upos[y] = i
                n_unmarked = size
            j = int(u[t] * n_unmarked)
            if j >= n_unmarked:
                j = n_unmarked - 1
            v = unmarked[j]
            last = unmarked[n_unmarked - 1]
            unmarked[j] = last
            upos[last] = j
            upos[v] = -1
            n_unmarked -= 1
            resident[v] = False
            for i in range(size):
                if cache[i] == v:
                    cache[i] = x
                    break
        resident[x] = True
        marked[x] = True
    return miss


@njit(cache=True)
def _lfu_incache_kernel(pages, k, n_ids):
    n = pages.shape[0]
    miss = np.zeros(n, np.uint8)
    resident = np.zeros(n_ids, np.bool_)
    count = np.zeros(n_ids, np.int64)
    cache = np.empty(k, np.int64)
    size = 0
    for t in range(n):
        x = pages[t]
        if resident[x]:
            count[x] += 1
            continue
        miss[t] = 1
        if size < k:
            cache[size] = x
            size += 1
        else:
            best = 0
            for i in range(1, size):
                a = cache[i]
                b = cache[best]
                if count[a] < count[b] or (count[a] == count[b] and a < b):
                    best = i
            v = cache[best]
            resident[v] = False
            count[v] = 0
            cache[best] = x
        resident[x] = True
        count[x] = 1
    return miss


@njit(cache=True)
def _plfu_empirical_kernel(pages, k, n_ids):
    """Global-frequency LFU; returns (miss mask, total cost)."""
    n = pages.shape[0]
    miss = np.zeros(n, np.uint8)
    resident = np.zeros(n_ids, np.bool_)
    count = np.zeros(n_ids, np.int64)
    cache = np.empty(k, np.int64)
    size = 0
    cost = 0
    for t in range(n):
        x = pages[t]
        count[x] += 1
        if resident[x]:
            continue
        miss[t] = 1
        if size < k:
            cache[size] = x
            size += 1
            resident[x] = True
            cost += 1
            continue
        # weakest resident: lowest count, ties -> higher identifier
        w = 0
        for i in range(1, size):
            a = cache[i]
            b = cache[w]
            if count[a] < count[b] or (count[a] == count[b] and a > b):
                w = i
        v = cache[w]
        if count[x] > count[v] or (count[x] == count[v] and x < v):
            # requested page overtakes the k-th most frequent and stays
            resident[v] = False
            cache[w] = x
            resident[x] = True
            cost += 1
        else:
            # evict k-th most frequent, serve x, re-admit the evicted page
            cost += 2
    return miss, cost


@njit(cache=True)
def _next_use(pages, n_ids):
    n = pages.shape[0]
    nxt = np.empty(n, np.int64)
    seen = np.full(n_ids, n, np.int64)
    for t in range(n - 1, -1, -1):
        x = pages[t]
        nxt[t] = seen[x]
        seen[x] = t
    return nxt


@njit(cache=True)
def _heap_above(key, a, b):
    # a sits above b in the eviction heap: farther next use, ties lower id
    return key[a] > key[b] or (key[a] == key[b] and a < b)


@njit(cache=True)
def _sift_up(heap, pos, key, i):
    while i > 0:
        parent = (i - 1) >> 1
        if _heap_above(key, heap[i], heap[parent]):
            a = heap[i]
            b = heap[parent]
            heap[i] = b
            heap[parent] = a
            pos[b] = i
            pos[a] = parent
            i = parent
        else:
            break


@njit(cache=True)
def _sift_down(heap, pos, key, i, size):
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        best = left
        right = left + 1
        if right < size and _heap_above(key, heap[right], heap[left]):
            best = right
        if _heap_above(key, heap[best], heap[i]):
            a = heap[i]
            b = heap[best]
            heap[i] = b
            heap[best] = a
            pos[b] = i
            pos[a] = best
            i = best
        else:
            break


@njit(cache=True)
def _belady_kernel(pages, k, n_ids):
    n = pages.shape[0]
    miss = np.zeros(n, np.uint8)
    nxt = _next_use(pages, n_ids)
    key = np.zeros(n_ids, np.int64)
    pos = np.full(n_ids, -1, np.int64)
    heap = np.empty(k, np.int64)
    size = 0
    for t in range(n):
        x = pages[t]
        if pos[x] >= 0:
            # next use only moves later: sift towards the root
            key[x] = nxt[t]
            _sift_up(heap, pos, key, pos[x])
            continue
        miss[t] = 1
        key[x] = nxt[t]
        if size == k:
            v = heap[0]
            pos[v] = -1
            heap[0] = x
            pos[x] = 0
            _sift_down(heap, pos, key, 0, size)
        else:
            heap[size] = x
            pos[x] = size
            size += 1
            _sift_up(heap, pos, key, size - 1)
    return miss


# ---------------------------------------------------------------------------
# public API


def _dense(pages):
    """Map page identifiers to dense non-negative ints, preserving order."""
    pages = np.asarray(pages)
    if pages.dtype.kind in "iu" and len(pages):
        lo = int(pages.min())
        hi = int(pages.max())
        if lo >= 0 and hi <= 4 * len(pages) + 4096:
            return pages.astype(np.int64, copy=False), hi + 1
    uniq, inv = np.unique(pages, return_inverse=True)
    return inv.astype(np.int64), len(uniq)


def _check_k(k):
    if int(k) != k or k < 1:
        raise ValueError(f"cache size k must be a positive integer, got {k}")
    return int(k)


def _unit_run(name, kernel, seq, k, trace):
    seq = as_sequence(seq)
    k = _check_k(k)
    pages, n_ids = _dense(seq.pages)
    miss = kernel(pages, k, n_ids)
    faults = int(miss.sum())
    return PolicyRun(name, faults, float(faults), miss if trace else None)


def run_lru(seq, k, trace=False) -> PolicyRun:
    return _unit_run("lru", _lru_kernel, seq, k, trace)


def run_fifo(seq, k, trace=False) -> PolicyRun:
    return _unit_run("fifo", _fifo_kernel, seq, k, trace)


def run_fwf(seq, k, trace=False) -> PolicyRun:
    """Flush-when-full: empties the cache whenever a phase ends."""
    return _unit_run("fwf", _fwf_kernel, seq, k, trace)


def run_incache_lfu(seq, k, trace=False) -> PolicyRun:
    """LFU counting only resident pages; a newly admitted page starts at 1."""
    return _unit_run("lfu-incache", _lfu_incache_kernel, seq, k, trace)


def run_belady(seq, k, trace=False) -> PolicyRun:
    """Offline optimum: evict the resident page requested farthest in the future."""
    return _unit_run("belady", _belady_kernel, seq, k, trace)


def marker_uniforms(n: int, seed) -> np.ndarray:
    return np.random.default_rng(seed).random(n)


def run_marker(seq, k, seed, trace=False) -> PolicyRun:
    """Randomized marking: evict a uniformly random unmarked page at a fault."""
    seq = as_sequence(seq)
    k = _check_k(k)
    pages, n_ids = _dense(seq.pages)
    u = seed if isinstance(seed, np.ndarray) else marker_uniforms(len(pages), seed)
    miss = _marker_kernel(pages, k, n_ids, u)
    faults = int(miss.sum())
    name = "marker" if isinstance(seed, np.ndarray) else f"marker:{seed}"
    return PolicyRun(name, faults, float(faults), miss if trace else None)


def run_plfu_oracle(seq, k, dist: PageDistribution, trace=False) -> PolicyRun:
    """Perfect LFU with oracle knowledge of ``dist``.

    The cache permanently holds ranks ``1..k``; each request to a lower
    ranked page is a fault costing 2 (evict the k-th page, serve, re-admit).
    """
    seq = as_sequence(seq)
    k = _check_k(k)
    if k >= dist.m:
        raise ValueError(f"PLFU needs k < m (k={k}, m={dist.m})")
    miss = seq.pages > k
    faults = int(np.count_nonzero(miss))
    return PolicyRun("plfu-oracle", faults, 2.0 * faults, miss.astype(np.uint8) if trace else None)


def run_plfu_empirical(seq, k, trace=False) -> PolicyRun:
    """LFU over global request counts observed so far (no oracle)."""
    seq = as_sequence(seq)
    k = _check_k(k)
    pages, n_ids = _dense(seq.pages)
    miss, cost = _plfu_empirical_kernel(pages, k, n_ids)
    return PolicyRun("plfu-empirical", int(miss.sum()), float(cost), miss if trace else None)


def parse_policy(descriptor: str) -> tuple[str, int | None]:
    """Split a CLI descriptor such as ``marker:7`` into (name, seed)."""
    name, _, arg = descriptor.strip().partition(":")
    if name not in POLICY_NAMES:
        raise ValueError(f"unknown policy {descriptor!r}; choose from {', '.join(POLICY_NAMES)}")
    if name == "marker":
        if not arg:
            raise ValueError("marker needs an explicit seed, e.g. marker:7")
        try:
            return name, int(arg)
        except ValueError:
            raise ValueError(f"bad marker seed in {descriptor!r}") from None
    if arg:
        raise ValueError(f"policy {name!r} takes no argument")
    return name, None


def run_policy(descriptor: str, seq, k, dist: PageDistribution | None = None, trace=False) -> PolicyRun:
    name, seed = parse_policy(descriptor)
    if name == "marker":
        return run_marker(seq, k, seed, trace=trace)
    if name == "plfu-oracle":
        if dist is None:
            raise ValueError("plfu-oracle needs the generating distribution")
        return run_plfu_oracle(seq, k, dist, trace=trace)
    return {
        "lru": run_lru,
        "fifo": run_fifo,
        "fwf": run_fwf,
        "plfu-empirical": run_plfu_empirical,
        "lfu-incache": run_incache_lfu,
        "belady": run_belady,
    }[name](seq, k, trace=trace)


# ---------------------------------------------------------------------------
# exhaustive oracle for Belady

MAX_BRUTE_DISTINCT = 6
MAX_BRUTE_N = 14
MAX_BRUTE_K = 3


def brute_force_opt(seq, k) -> int:
    """Exact minimum number of faults by DP over cache configurations.

    Only for tiny instances; refuses anything larger than 6 distinct pages,
    14 requests or k above 3.
    """
    pages = [int(p) for p in as_sequence(seq).pages]
    k = _check_k(k)
    if len(set(pages)) > MAX_BRUTE_DISTINCT or len(pages) > MAX_BRUTE_N or k > MAX_BRUTE_K:
        raise ValueError("instance too large for brute-force search")
    # best[c] = min faults so far ending in cache configuration c
    best = {frozenset(): 0}
    for x in pages:
        nxt = {}
        for cache, cost in best.items():
            if x in cache:
                options = [(cache, cost)]
            elif len(cache) < k:
                options = [(cache | {x}, cost + 1)]
            else:
                options = [((cache - {v}) | {x}, cost + 1) for v in cache]
            for c, v in options:
                if v < nxt.get(c, 1 << 30):
                    nxt[c] = v
        best = nxt
    return min(best.values())
