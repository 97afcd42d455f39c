"""Exact finite-range laws and expectations used as Monte Carlo oracles."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analyzers import floor_pow
from .errors import BlockTooLargeError, ConfigError
from .profiles import ProbabilityProfile
from .sets import BoundedGapSet

MAX_BLOCK = 1 << 21
AP_EXACT_CAP = 100_000
_SEGMENT = 1 << 15


@dataclass(frozen=True)
class BlockLaw:
    """``P[N_n = j]`` for ``j <= cap`` and the overflow mass ``P[N_n > cap]``."""

    probs: np.ndarray
    overflow: float
    lo: int
    hi: int

    @property
    def length(self) -> int:
        return self.hi - self.lo

    def at_least(self, j: int) -> float:
        """``P[N_n >= j]`` for ``j <= cap + 1``."""
        return math.fsum(self.probs[j:].tolist()) + self.overflow


def _combine(av, ao, bv, bo, cap):
    """Law of the sum of two independent truncated counts."""
    out = np.zeros_like(av)
    spill = np.zeros(av.shape[0])
    for i in range(cap + 1):
        for j in range(cap + 1):
            if i + j <= cap:
                out[:, i + j] += av[:, i] * bv[:, j]
            else:
                spill += av[:, i] * bv[:, j]
    over = ao + av.sum(axis=1) * bo + spill
    return out, over


def _reduce(v, o, cap):
    while v.shape[0] > 1:
        if v.shape[0] % 2:
            ident = np.zeros((1, cap + 1))
            ident[0, 0] = 1.0
            v = np.vstack([v, ident])
            o = np.append(o, 0.0)
        v, o = _combine(v[0::2], o[0::2], v[1::2], o[1::2], cap)
    return v, o


def poisson_binomial_truncated(p, cap: int):
    """Law of ``sum Bernoulli(p_i)`` truncated at ``cap`` plus overflow mass.

    Factors are multiplied pairwise in a balanced tree; terms that would
    exceed ``cap`` are moved to the overflow instead of being dropped.
    """
    p = np.asarray(p, dtype=np.float64)
    if cap < 1:
        raise ConfigError("count cap must be >= 1")
    if not p.size:
        probs = np.zeros(cap + 1)
        probs[0] = 1.0
        return probs, 0.0
    seg_v, seg_o = [], []
    for s in range(0, p.size, _SEGMENT):
        q = p[s:s + _SEGMENT]
        v = np.zeros((q.size, cap + 1))
        v[:, 0] = 1.0 - q
        v[:, 1] = q
        v, o = _reduce(v, np.zeros(q.size), cap)
        seg_v.append(v)
        seg_o.append(o)
    v, o = _reduce(np.vstack(seg_v), np.concatenate(seg_o), cap)
    return v[0], float(o[0])


def block_count_distribution(profile: ProbabilityProfile, a: float, n: int, count_cap: int,
                             max_block: int = MAX_BLOCK) -> BlockLaw:
    """Exact law of ``N_n = |E ∩ (a^n, a^{n+1}]|`` up to ``count_cap``."""
    lo, hi = floor_pow(a, n), floor_pow(a, n + 1)
    if hi - lo > max_block:
        raise BlockTooLargeError(
            f"block ({lo}, {hi}] has {hi - lo} indices, above the exact limit {max_block}; "
            "estimate it by Monte Carlo instead")
    probs, over = poisson_binomial_truncated(profile.probs(np.arange(lo + 1, hi + 1)), count_cap)
    return BlockLaw(probs, over, lo, hi)


def block_empty_probability(profile: ProbabilityProfile, lo: int, hi: int) -> float:
    """``P[E ∩ (lo, hi] = ∅]``."""
    total = []
    for s in range(lo, hi, 1 << 20):
        ell = profile.log_survival(np.arange(s + 1, min(hi, s + (1 << 20)) + 1))
        if np.isneginf(ell).any():
            return 0.0
        total.append(math.fsum(ell.tolist()))
    return math.exp(math.fsum(total))


def miss_probability(profile: ProbabilityProfile, S: BoundedGapSet, N: int) -> float:
    """``P[S ∩ E ∩ [1, N] = ∅] = prod_{i in S, i <= N} (1 - p_i)``."""
    if N < 1:
        raise ConfigError("N must be >= 1")
    parts = []
    for lo in range(0, N, 1 << 20):
        elems = S.materialize(min(N, lo + (1 << 20)), lo)
        if not elems.size:
            continue
        ell = profile.log_survival(elems)
        if np.isneginf(ell).any():
            return 0.0
        parts.append(math.fsum(ell.tolist()))
    return math.exp(math.fsum(parts))


def expected_ap_count(profile: ProbabilityProfile, l: int, N: int, cap: int = AP_EXACT_CAP) -> float:
    """Expected number of ``(l+1)``-term progressions inside ``E ∩ [1, N]``.

    Sums ``prod_{j=0..l} p_{i + j d}`` over all ``i, d >= 1`` with
    ``i + l d <= N``: one vectorised pass per step ``d``, with the per-step
    partial sums combined by ``math.fsum``.
    """
    if l < 2:
        raise ConfigError("l must be >= 2")
    if N < 3:
        raise ConfigError("N must be >= 3")
    if N > cap:
        raise ConfigError(f"N = {N} exceeds the exact summation cap {cap}")
    p = profile.probs(np.arange(1, N + 1))
    partials = []
    for d in range(1, (N - 1) // l + 1):
        n_starts = N - l * d
        prod = p[:n_starts].copy()
        for j in range(1, l + 1):
            prod *= p[j * d:j * d + n_starts]
        partials.append(float(prod.sum()))
    return math.fsum(partials)


def block_event_terms(profile: ProbabilityProfile, l: int, k_max: int) -> np.ndarray:
    """``P[E(k)] = prod_{i=1..l} p_{i + k l}`` for ``k = 0 .. k_max``."""
    if k_max < 0:
        return np.zeros(0)
    p = profile.probs(np.arange(1, l * (k_max + 1) + 1)).reshape(k_max + 1, l)
    return p.prod(axis=1)


def expected_block_events(profile: ProbabilityProfile, l: int, k_max: int) -> float:
    """``sum_{k <= k_max} P[E(k)]``, the expected number of full step-1 blocks."""
    return math.fsum(block_event_terms(profile, l, k_max).tolist())


def expected_pair_coincidences(profile: ProbabilityProfile, lag: int, N: int) -> float:
    """``sum_{k + lag <= N} p_k p_{k+lag}``."""
    if N <= lag:
        return 0.0
    p = profile.probs(np.arange(1, N + 1))
    return math.fsum((p[:-lag] * p[lag:]).tolist())
