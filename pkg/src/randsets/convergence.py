"""Numerical convergence diagnostics for series and ``dx / (x f(x))`` integrals.

A finite computation cannot prove divergence.  The verdicts here are a
diagnostic: partial sums are taken at a ladder of cutoffs, and the decay of
the per-log-length increments is compared with the borderline ``1/log``
rate.  Increments decaying like ``(log X)**-q`` with ``q`` at most
``diverge_order`` (and staying above ``floor``) read as divergence; ``q`` of
at least ``converge_order``, geometric decay, or vanishing increments read
as convergence; anything in between is inconclusive.

Integrals are evaluated in the variable ``t = log x`` with composite
Gauss-Legendre rules, so each panel has constant log-width.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericError
from .profiles import AdmissibleFunction, ProbabilityProfile

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)
_LOG_MAX = math.log(np.finfo(np.float64).max)

DEFAULT_CUTOFFS = tuple(10**j for j in range(3, 10))


@dataclass(frozen=True)
class ConvergenceVerdict:
    verdict: str  # "Diverges" | "Converges" | "Inconclusive"
    partial_sum_at_cutoffs: tuple
    growth_exponent_estimate: float
    increment_decay_order: float = float("nan")

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "partial_sum_at_cutoffs": [list(p) for p in self.partial_sum_at_cutoffs],
            "growth_exponent_estimate": self.growth_exponent_estimate,
            "increment_decay_order": self.increment_decay_order,
        }


@dataclass(frozen=True)
class AdmissibilityReport:
    first: ConvergenceVerdict
    second: dict = field(default_factory=dict)  # epsilon -> verdict

    @property
    def admissible(self) -> bool:
        return self.first.verdict == "Diverges" and all(
            v.verdict == "Converges" for v in self.second.values())

    def to_dict(self) -> dict:
        return {
            "admissible": self.admissible,
            "first_integral": self.first.to_dict(),
            "second_integral": {repr(eps): v.to_dict() for eps, v in self.second.items()},
        }


def classify(cutoffs, partials, floor=1e-3, diverge_order=1.2, converge_order=1.5,
             rel_tol=1e-12) -> ConvergenceVerdict:
    """Verdict from partial sums ``partials[j]`` taken at ``cutoffs[j]``."""
    cutoffs = [float(c) for c in cutoffs]
    partials = [float(s) for s in partials]
    pairs = tuple(zip((int(c) for c in cutoffs), partials))
    if len(cutoffs) < 3:
        return ConvergenceVerdict("Inconclusive", pairs, float("nan"))
    logs = [math.log(c) for c in cutoffs]
    incs = [b - a for a, b in zip(partials, partials[1:])]
    per_log = [d / (l1 - l0) for d, l0, l1 in zip(incs, logs, logs[1:])]
    mids = [0.5 * (l0 + l1) for l0, l1 in zip(logs, logs[1:])]
    slope = per_log[-1]
    scale = max(abs(partials[-1]), 1e-300)

    if per_log[-1] <= rel_tol * scale:
        return ConvergenceVerdict("Converges", pairs, slope, math.inf)
    if per_log[-2] <= 0:
        return ConvergenceVerdict("Inconclusive", pairs, slope)
    q = -math.log(per_log[-1] / per_log[-2]) / math.log(mids[-1] / mids[-2])
    if q >= converge_order:
        verdict = "Converges"
    elif q <= diverge_order and all(d >= floor for d in incs):
        verdict = "Diverges"
    else:
        verdict = "Inconclusive"
    return ConvergenceVerdict(verdict, pairs, slope, q)


def _panel_edges(t0: float, t1: float, width: float, breaks=()) -> np.ndarray:
    n = max(1, math.ceil((t1 - t0) / width))
    edges = set(np.linspace(t0, t1, n + 1).tolist())
    edges.update(b for b in breaks if t0 < b < t1)
    return np.array(sorted(edges))


def _integrate_log(g, t0: float, t1: float, width: float, breaks=()) -> float:
    if t1 <= t0:
        return 0.0
    edges = _panel_edges(t0, t1, width, breaks)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = lo + half * (_GL_NODES[None, :] + 1.0)
    vals = g(nodes) * _GL_WEIGHTS[None, :] * half
    return math.fsum(vals.ravel().tolist())


def log_integral(f: AdmissibleFunction, x0: float, x1: float, power: float = 1.0,
                 tol: float = 1e-10) -> float:
    """``int_{x0}^{x1} dx / (x f(x)**power)`` for ``1 <= x0 <= x1``.

    Panels are halved until two successive refinements agree to ``tol``
    (relative).
    """
    if x0 < 1 or x1 < x0:
        raise ConfigError(f"need 1 <= x0 <= x1, got ({x0}, {x1})")
    t0, t1 = math.log(x0), math.log(x1)
    if t1 > _LOG_MAX:
        raise NumericError(f"upper limit exp({t1:g}) overflows")
    breaks = tuple(math.log(b) for b in f.breaks() if b >= 1)

    def g(t):
        return f(np.exp(t)) ** -power

    width = 1.0
    prev = _integrate_log(g, t0, t1, width, breaks)
    for _ in range(12):
        width *= 0.5
        cur = _integrate_log(g, t0, t1, width, breaks)
        if abs(cur - prev) <= tol * abs(cur):
            return cur
        prev = cur
    return cur


def block_integral(f: AdmissibleFunction, a: float, n: int, tol: float = 1e-10) -> float:
    """``int_{a^n}^{a^{n+1}} dx / (x f(x))``."""
    if not a > 1:
        raise ConfigError(f"block base must exceed 1, got {a}")
    if n < 0:
        raise ConfigError("block index must be non-negative")
    if (n + 1) * math.log(a) > _LOG_MAX:
        raise NumericError(f"a^(n+1) = {a}^{n + 1} overflows double precision")
    return log_integral(f, a**n, a ** (n + 1), tol=tol)


def check_admissibility(f: AdmissibleFunction, epsilons=(1.0,), cutoffs=DEFAULT_CUTOFFS,
                        **classify_kw) -> AdmissibilityReport:
    """Diagnose ``int dx/(x f) = inf`` and ``int dx/(x f^(1+eps)) < inf`` for each eps."""
    cutoffs = [float(c) for c in cutoffs]
    if not epsilons:
        raise ConfigError("at least one epsilon is required")
    if any(e <= 0 for e in epsilons):
        raise ConfigError("epsilons must be positive")
    if any(b <= a for a, b in zip(cutoffs, cutoffs[1:])) or cutoffs[0] <= 1:
        raise ConfigError("cutoffs must be strictly increasing and above 1")
    if cutoffs[-1] < 1e6:
        raise ConfigError("last cutoff must be at least 1e6")

    def partials(power):
        edges = [1.0] + cutoffs
        pieces = [log_integral(f, lo, hi, power) for lo, hi in zip(edges, edges[1:])]
        return [math.fsum(pieces[: j + 1]) for j in range(len(pieces))]

    first = classify(cutoffs, partials(1.0), **classify_kw)
    second = {float(e): classify(cutoffs, partials(1.0 + e), **classify_kw) for e in epsilons}
    return AdmissibilityReport(first, second)


@dataclass(frozen=True)
class SeriesResult:
    value: float
    verdict: ConvergenceVerdict


def _decade_cutoffs(N: int) -> list:
    cuts = []
    c = 10
    while c < N:
        cuts.append(c)
        c *= 10
    cuts.append(N)
    return cuts


def series_sum(profile: ProbabilityProfile, power: int, N: int, cutoffs=None,
               chunk: int = 1 << 20, **classify_kw) -> SeriesResult:
    """Compensated ``sum_{k<=N} p_k**power`` plus a verdict over decade cutoffs."""
    if power not in (1, 2):
        raise ConfigError("power must be 1 or 2")
    if N < 1:
        raise ConfigError("N must be >= 1")
    cuts = sorted(set(cutoffs or _decade_cutoffs(N)) | {N})
    if cuts[0] < 1 or cuts[-1] > N:
        raise ConfigError("cutoffs must lie in [1, N]")
    partials = []
    pieces = []
    lo = 0
    for cut in cuts:
        for start in range(lo, cut, chunk):
            stop = min(start + chunk, cut)
            vals = profile.probs(np.arange(start + 1, stop + 1)) ** power
            pieces.append(math.fsum(vals.tolist()))
        lo = cut
        partials.append(math.fsum(pieces))
    return SeriesResult(partials[-1], classify(cuts, partials, **classify_kw))
