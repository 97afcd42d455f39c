"""Interval estimates for event frequencies and Monte Carlo means."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError

Z_DEFAULT = 1.96
Z_ACCEPT = 3.29


@dataclass(frozen=True)
class ConfidenceInterval:
    point: float
    lower: float
    upper: float
    successes: int
    trials: int
    z: float = Z_DEFAULT
    method: str = "wilson"

    def contains(self, x: float) -> bool:
        return self.lower <= x <= self.upper


def estimate_event_probability(successes: int, trials: int, z: float = Z_DEFAULT) -> ConfidenceInterval:
    """Wilson score interval for ``successes`` out of ``trials``."""
    if trials < 1 or not 0 <= successes <= trials:
        raise ConfigError(f"need 0 <= successes <= trials and trials >= 1, got {successes}/{trials}")
    n = trials
    p = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2 * n)) / denom
    margin = z / denom * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n))
    lower = 0.0 if successes == 0 else max(0.0, min(p, center - margin))
    upper = 1.0 if successes == trials else min(1.0, max(p, center + margin))
    return ConfidenceInterval(p, lower, upper, int(successes), int(trials), z)


@dataclass(frozen=True)
class MeanEstimate:
    mean: float
    se: float
    trials: int

    def within(self, x: float, k: float = 4.0) -> bool:
        """``|mean - x| <= k * se``; exact equality required when ``se == 0``."""
        if self.se == 0:
            return math.isclose(self.mean, x, rel_tol=1e-9, abs_tol=1e-12)
        return abs(self.mean - x) <= k * self.se


def estimate_mean(values) -> MeanEstimate:
    v = np.asarray(values, dtype=np.float64)
    n = v.size
    if n == 0:
        raise ConfigError("no values to average")
    mean = math.fsum(v.tolist()) / n
    se = float(np.std(v, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return MeanEstimate(mean, se, n)
