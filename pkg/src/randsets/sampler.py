"""Samplers for ``E_X ∩ (start, N]``.

``sample_naive`` flips one coin per index.  Draw ``k`` of the stream decides
index ``k``, so any sub-range of a naive realization can be regenerated on
its own, and batches of trials can be evaluated as one array.

``sample_skip`` jumps from success to success by inverse transform.  From a
current position ``c`` and a uniform ``u`` the next success is the smallest
``m > c`` whose log-survival ``S(c, m) = sum_{c<j<=m} log(1 - p_j)`` satisfies
``S(c, m) <= log u``.  Indices with ``p_j = 1`` are emitted unconditionally
and contribute 0 to ``S``.

The rounding of ``S`` is pinned down so that the fast path and the linear
oracle agree exactly.  The index line is cut into chunks of ``chunk_size``;
``L_b`` is the running sum of log-survival inside chunk ``b``, accumulated in
ascending order from the chunk's first index.  Then

* ``m`` in the same chunk as ``c``:  ``S = L_b[m] - L_b[c]``
* otherwise ``S`` is carried chunk by chunk: ``s = L_b[end] - L_b[c]`` for the
  head chunk (0 if ``c`` ends a chunk), ``s = s + L_b[end]`` for every chunk
  passed whole, and ``S = s + L_b[m]`` inside the final chunk,

each operation rounded once in double precision.  Because rounding is
monotone these values are non-increasing in ``m``, which makes a binary
search over a chunk exact.
"""

from __future__ import annotations

import math
import threading
from bisect import bisect_left
from collections import OrderedDict

import numpy as np

from .errors import ConfigError
from .profiles import ProbabilityProfile
from .realization import Realization
from .rng import RngStream, uniforms_at

DEFAULT_CHUNK = 1 << 16

_cache: OrderedDict = OrderedDict()
_cache_lock = threading.Lock()
_cache_budget = 1 << 25  # cached log-survival entries, all chunks together
_cache_used = 0


def _evict_locked() -> None:
    global _cache_used
    while _cache_used > _cache_budget and len(_cache) > 1:
        _, (neg, _) = _cache.popitem(last=False)
        _cache_used -= neg.size


def set_cache_budget(n_entries: int) -> None:
    global _cache_budget
    with _cache_lock:
        _cache_budget = max(1, int(n_entries))
        _evict_locked()


def clear_cache() -> None:
    global _cache_used
    with _cache_lock:
        _cache.clear()
        _cache_used = 0


def _pred(v: float, t: float) -> bool:
    # t >= 0 only when u == 1: the first index with p > 0 wins
    return v <= t if t < 0 else v < 0


class ChunkTable:
    """Lazily built per-chunk running sums of log-survival for one profile."""

    def __init__(self, profile: ProbabilityProfile, chunk_size: int = DEFAULT_CHUNK):
        if chunk_size < 1:
            raise ConfigError("chunk size must be positive")
        self.profile = profile
        self.size = int(chunk_size)

    def entry(self, b: int):
        global _cache_used
        key = (self.profile.digest, self.size, b)
        with _cache_lock:
            hit = _cache.get(key)
            if hit is not None:
                _cache.move_to_end(key)
                return hit
        ks = np.arange(b * self.size + 1, (b + 1) * self.size + 1, dtype=np.int64)
        p = self.profile.probs(ks)
        forced = ks[p == 1.0]
        with np.errstate(divide="ignore"):
            ell = np.where(p == 1.0, 0.0, np.log1p(-p))
        # stored negated (non-decreasing) so searchsorted works on views
        neg = -np.cumsum(ell)
        neg.setflags(write=False)
        forced.setflags(write=False)
        val = (neg, forced)
        with _cache_lock:
            if key not in _cache:
                _cache[key] = val
                _cache_used += neg.size
                _evict_locked()
        return val

    def is_forced(self, k: int) -> bool:
        _, forced = self.entry((k - 1) // self.size)
        if not forced.size:
            return False
        i = np.searchsorted(forced, k)
        return i < forced.size and forced[i] == k

    @staticmethod
    def _first_true(neg, lo, hi, value, t, approx_target):
        """First ``i`` in ``[lo, hi]`` with ``_pred(value(i), t)``; ``hi + 1`` if none."""
        side = "left" if t < 0 else "right"
        g = lo + int(np.searchsorted(neg[lo:hi + 1], -approx_target, side=side))
        ok_left = g == lo or not _pred(value(g - 1), t)
        ok_right = g > hi or _pred(value(g), t)
        if ok_left and ok_right:
            return g
        return bisect_left(range(lo, hi + 1), True, key=lambda i: _pred(value(i), t)) + lo

    def next_success(self, c: int, t: float, N: int):
        """Next success after ``c`` for threshold ``t = log u``; ``None`` past ``N``."""
        S = self.size
        if c >= N:
            return None
        if c >= 1 and c % S:
            b = (c - 1) // S
            base = b * S
            neg, forced = self.entry(b)
            ic = c - base - 1
            rc = -float(neg[ic])
            hi_idx = min(N, base + S)
            last = hi_idx - base - 1
            i = self._first_true(neg, ic + 1, last, lambda i: -float(neg[i]) - rc, t, rc + min(t, 0.0))
            m = base + i + 1 if i <= last else None
            f = _first_forced(forced, c, hi_idx)
            if m is not None or f is not None:
                return min(x for x in (m, f) if x is not None)
            if hi_idx == N:
                return None
            s = -float(neg[S - 1]) - rc
            b += 1
        else:
            s = 0.0
            b = c // S
        while b * S < N:
            base = b * S
            hi_idx = min(N, base + S)
            full = hi_idx == base + S
            neg, forced = self.entry(b)
            f = _first_forced(forced, base, hi_idx)
            if full and f is None:
                s_end = s + -float(neg[S - 1])
                if not _pred(s_end, t):
                    s = s_end
                    b += 1
                    continue
            last = hi_idx - base - 1
            s0 = s
            i = self._first_true(neg, 0, last, lambda i: s0 + -float(neg[i]), t, min(t, 0.0) - s0)
            m = base + i + 1 if i <= last else None
            if m is not None or f is not None:
                return min(x for x in (m, f) if x is not None)
            if not full:
                return None
            s = s + -float(neg[S - 1])
            b += 1
        return None


def _first_forced(forced, lo, hi):
    """Smallest forced index in ``(lo, hi]``."""
    if not forced.size:
        return None
    i = np.searchsorted(forced, lo, side="right")
    if i < forced.size and forced[i] <= hi:
        return int(forced[i])
    return None


def skip_oracle(profile: ProbabilityProfile, current: int, u: float, N: int,
                chunk_size: int = DEFAULT_CHUNK):
    """Linear-scan reference for :meth:`ChunkTable.next_success`.

    Walks ``m = current+1, current+2, ...`` accumulating log-survival one term
    at a time with the same rounding convention; no cached sums, no search.
    """
    if current >= N:
        return None
    t = math.log(u) if u > 0 else -math.inf
    S = chunk_size
    first = ((current - 1) // S) * S + 1 if current >= 1 else 1
    ks = np.arange(first, N + 1, dtype=np.int64)
    p = profile.probs(ks).tolist()
    with np.errstate(divide="ignore"):
        ell = profile.log_survival(ks).tolist()
    acc = 0.0
    pos = 0
    for k in range(first, current + 1):
        acc += 0.0 if p[pos] == 1.0 else ell[pos]
        pos += 1
    acc_c = acc
    head_chunk = (current - 1) // S if current >= 1 else -1
    prev_val = 0.0
    s_before = 0.0
    for m in range(current + 1, N + 1):
        term = 0.0 if p[pos] == 1.0 else ell[pos]
        pos += 1
        if (m - 1) % S == 0:
            acc = 0.0
            s_before = prev_val
        acc += term
        if (m - 1) // S == head_chunk:
            val = acc - acc_c
        else:
            val = s_before + acc
        if p[pos - 1] == 1.0:
            return m
        if _pred(val, t):
            return m
        prev_val = val
    return None


def sample_skip(profile: ProbabilityProfile, N: int, rng: RngStream, start: int = 0,
                chunk_size: int = DEFAULT_CHUNK) -> Realization:
    """Realization of ``E_X ∩ (start, N]`` by success-to-success jumps."""
    if N < 1:
        raise ConfigError("N must be >= 1")
    seed = rng.seed
    table = ChunkTable(profile, chunk_size)
    out = []
    c = start
    while c < N:
        if table.is_forced(c + 1):
            c += 1
            out.append(c)
            continue
        u = 1.0 - rng.uniform()  # (0, 1]
        m = table.next_success(c, math.log(u), N)
        if m is None:
            break
        out.append(m)
        c = m
    return Realization(np.asarray(out, dtype=np.int64), N, profile_digest=profile.digest, seed=seed,
                       sampler_kind="skip", range_start=start, profile_spec=profile.to_spec())


def sample_naive(profile: ProbabilityProfile, N: int, rng: RngStream, start: int = 0,
                 chunk: int = 1 << 20) -> Realization:
    """Realization of ``E_X ∩ (start, N]`` with one uniform per index.

    Index ``k`` is kept iff draw number ``k`` of ``rng`` is below ``p_k``.
    """
    if N < 1:
        raise ConfigError("N must be >= 1")
    parts = []
    for lo in range(start, N, chunk):
        ks = np.arange(lo + 1, min(N, lo + chunk) + 1, dtype=np.int64)
        parts.append(ks[uniforms_at(rng.seed, ks) < profile.probs(ks)])
    rng.counter = max(rng.counter, N)
    idx = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
    return Realization(idx, N, profile_digest=profile.digest, seed=rng.seed, sampler_kind="naive",
                       range_start=start, profile_spec=profile.to_spec())


def naive_indicators(profile: ProbabilityProfile, seeds, lo: int, hi: int) -> np.ndarray:
    """Inclusion matrix ``[trial, k - lo - 1]`` for ``k`` in ``(lo, hi]``.

    Row ``t`` equals what :func:`sample_naive` with ``RngStream(seeds[t])``
    decides on the same indices.
    """
    ks = np.arange(lo + 1, hi + 1, dtype=np.int64)
    seeds = np.asarray(seeds, dtype=np.uint64)
    return uniforms_at(seeds[:, None], ks[None, :]) < profile.probs(ks)[None, :]


def sample(profile: ProbabilityProfile, N: int, seed: int, kind: str = "skip", start: int = 0,
           chunk_size: int = DEFAULT_CHUNK) -> Realization:
    rng = RngStream(seed)
    if kind == "skip":
        return sample_skip(profile, N, rng, start=start, chunk_size=chunk_size)
    if kind == "naive":
        return sample_naive(profile, N, rng, start=start)
    raise ConfigError(f"unknown sampler kind {kind!r}")
