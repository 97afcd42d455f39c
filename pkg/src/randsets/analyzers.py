"""Statistics of a single realization: blocks, gaps, ratios, progressions."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor

import numpy as np

from .errors import ConfigError
from .realization import Realization
from .sets import BoundedGapSet

INSTANCE_CAP = 10_000
COUNT_CAP = 2**63 - 1


def floor_pow(a: float, n: int) -> int:
    """``floor(a**n)`` computed exactly from the binary value of ``a``."""
    if float(a).is_integer():
        base = int(a)
        return base**n if n >= 0 else 0
    return floor(Fraction(a) ** n)


def block_edges(a: float, first_n: int, last_n: int) -> np.ndarray:
    """Integer edges ``floor(a^n)`` for ``n = first_n .. last_n + 1``."""
    if not a > 1:
        raise ConfigError(f"block base must exceed 1, got {a}")
    return np.array([floor_pow(a, n) for n in range(first_n, last_n + 2)], dtype=np.int64)


@dataclass(frozen=True)
class BlockCounts:
    base_a: float
    first_n: int
    last_n: int
    counts: np.ndarray
    block_lengths: np.ndarray

    @property
    def ns(self) -> np.ndarray:
        return np.arange(self.first_n, self.last_n + 1)

    def products(self) -> np.ndarray:
        """``N_n * N_{n+1}`` for consecutive blocks in the window."""
        return self.counts[:-1] * self.counts[1:]


def block_counts(r: Realization, a: float, first_n: int, last_n: int) -> BlockCounts:
    """``N_n = |E ∩ (a^n, a^{n+1}]|`` for ``n`` in ``[first_n, last_n]``."""
    if last_n < first_n:
        raise ConfigError("empty block window")
    edges = block_edges(a, first_n, last_n)
    if edges[-1] > r.range_end or edges[0] < r.range_start:
        raise ConfigError(
            f"block window ({edges[0]}, {edges[-1]}] exceeds realization range "
            f"({r.range_start}, {r.range_end}]")
    pos = np.searchsorted(r.indices, edges, side="right")
    return BlockCounts(float(a), first_n, last_n, np.diff(pos), np.diff(edges))


def max_block_index(a: float, range_end: int, first_n: int = 0) -> int:
    """Largest ``n`` with ``a^{n+1} <= range_end`` (``first_n - 1`` if none)."""
    n = first_n - 1
    while floor_pow(a, n + 2) <= range_end:
        n += 1
    return n


@dataclass(frozen=True)
class GapStats:
    indices: np.ndarray
    gaps: np.ndarray

    def tail_min_gap(self, w: int) -> int | None:
        if not self.gaps.size:
            return None
        return int(self.gaps[-w:].min())

    def pair_coincidences(self, l: int) -> int:
        """Number of ``k`` with both ``k`` and ``k + l`` in the set."""
        idx = self.indices
        if idx.size < 2:
            return 0
        pos = np.searchsorted(idx, idx + l)
        hit = pos < idx.size
        return int(np.count_nonzero(idx[pos[hit]] == idx[hit] + l))

    def window(self, lo: int, hi: int) -> "GapStats":
        """Gaps between consecutive elements lying in ``(lo, hi]``."""
        idx = self.indices[(self.indices > lo) & (self.indices <= hi)]
        return GapStats(idx, np.diff(idx))


def gap_sequence(r: Realization) -> GapStats:
    return GapStats(r.indices, np.diff(r.indices))


@dataclass(frozen=True)
class LacunarityStats:
    ratios: np.ndarray
    adjacent_block_products: np.ndarray

    def tail_inf(self, w: int) -> float | None:
        if not self.ratios.size:
            return None
        return float(self.ratios[-w:].min())


def lacunarity_stats(r: Realization, bc: BlockCounts | None = None) -> LacunarityStats:
    idx = r.indices.astype(np.float64)
    ratios = idx[1:] / idx[:-1] if idx.size > 1 else np.zeros(0)
    prods = bc.products() if bc is not None else np.zeros(0, dtype=np.int64)
    return LacunarityStats(ratios, prods)


@dataclass
class APReport:
    length_l: int
    count: int = 0
    instances: list = field(default_factory=list)
    truncated: bool = False
    block_event_hits: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"length": self.length_l, "count": self.count, "instances_recorded": len(self.instances),
                "truncated": self.truncated, "block_event_hits": len(self.block_event_hits)}


def _members(sorted_idx: np.ndarray, cand: np.ndarray) -> np.ndarray:
    pos = np.searchsorted(sorted_idx, cand)
    ok = pos < sorted_idx.size
    out = np.zeros(cand.shape, dtype=bool)
    out[ok] = sorted_idx[pos[ok]] == cand[ok]
    return out


def find_aps(r: Realization, l: int, cap: int = INSTANCE_CAP, count_cap: int = COUNT_CAP) -> APReport:
    """All length-``l`` progressions ``i, i+d, ..., i+(l-1)d`` inside the set.

    Each progression is counted once, with ``d >= 1``.  Instances are listed
    in ``(i, d)`` order up to ``cap``; the count continues up to ``count_cap``.
    """
    if l < 3:
        raise ConfigError("progression length must be at least 3")
    idx = r.indices
    rep = APReport(l)
    if idx.size < l:
        return rep
    top = int(idx[-1])
    count = 0
    for a_pos in range(idx.size - l + 1):
        x = int(idx[a_pos])
        dmax = (top - x) // (l - 1)
        ys = idx[a_pos + 1:]
        ys = ys[ys - x <= dmax]
        if not ys.size:
            continue
        d = ys - x
        keep = np.ones(d.shape, dtype=bool)
        for j in range(2, l):
            keep &= _members(idx, x + j * d)
        hits = d[keep]
        if not hits.size:
            continue
        count += int(hits.size)
        room = cap - len(rep.instances)
        if room > 0:
            rep.instances.extend((x, int(dd)) for dd in hits[:room].tolist())
        if count >= count_cap:
            count = count_cap
            break
    rep.count = count
    rep.truncated = len(rep.instances) < count
    return rep


def ap_block_events(r: Realization, l: int, k_max: int) -> list:
    """``k`` in ``[0, k_max]`` whose block ``{1 + k l, ..., l + k l}`` lies in the set."""
    if l < 1:
        raise ConfigError("block length must be positive")
    top = l * (k_max + 1)
    if top > r.range_end:
        raise ConfigError(f"l * (k_max + 1) = {top} exceeds range end {r.range_end}")
    if k_max < 0:
        return []
    mark = np.zeros(top + 1, dtype=bool)
    idx = r.indices[r.indices <= top]
    mark[idx] = True
    full = mark[1:].reshape(k_max + 1, l).all(axis=1)
    return np.flatnonzero(full).tolist()


def intersect_bounded_gap(r: Realization, S: BoundedGapSet):
    """``(S ∩ E nonempty, smallest common element or None)``."""
    inside = S.contains(r.indices)
    if not inside.any():
        return False, None
    return True, int(r.indices[np.argmax(inside)])


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def block_counts_csv(bc: BlockCounts) -> str:
    prods = list(bc.products().tolist()) + [""]
    rows = [(int(n), int(c), int(L), p) for n, c, L, p in
            zip(bc.ns, bc.counts, bc.block_lengths, prods)]
    return _csv(("n", "N_n", "L_n", "product_with_next"), rows)


def gaps_csv(gs: GapStats) -> str:
    idx = gs.indices.tolist()
    rows = []
    for k, n_k in enumerate(idx, start=1):
        if k < len(idx):
            rows.append((k, n_k, idx[k] - n_k, repr(idx[k] / n_k)))
        else:
            rows.append((k, n_k, "", ""))
    return _csv(("k", "n_k", "gap", "ratio"), rows)


def aps_csv(rep: APReport) -> str:
    return _csv(("i", "d", "l"), [(i, d, rep.length_l) for i, d in rep.instances])
