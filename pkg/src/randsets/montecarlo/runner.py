"""Trial execution, deterministic aggregation and report output."""

from __future__ import annotations

import csv
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..analyzers import floor_pow
from ..errors import ConfigError
from ..exact import block_count_distribution
from ..rng import ALGORITHM, derive_seeds
from ..sampler import naive_indicators
from .config import SCHEMA_VERSION, ExperimentConfig
from .suites import SUITES


@dataclass
class ExperimentReport:
    config: dict
    derived: dict
    tables: dict
    checks: dict
    warnings: list
    timing: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c["passed"] is not False for c in self.checks.values())

    def body(self) -> dict:
        """Everything except the timing fields."""
        return {"schema_version": SCHEMA_VERSION, "config": self.config, "derived": self.derived,
                "tables": self.tables, "checks": self.checks, "warnings": self.warnings,
                "passed": self.passed}

    def body_json(self) -> str:
        return json.dumps(self.body(), sort_keys=True, indent=2, allow_nan=False) + "\n"

    def to_dict(self) -> dict:
        return {**self.body(), "timing": self.timing}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"

    def table_csv(self, name: str) -> str:
        tab = self.tables[name]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(tab["columns"])
        w.writerows([["" if v is None else repr(v) if isinstance(v, float) else v for v in row]
                     for row in tab["rows"]])
        return buf.getvalue()

    def write(self, out_dir, emit: str = "both") -> list:
        """Write ``report.json`` and/or one CSV per table; returns the paths."""
        if emit not in ("json", "csv", "both"):
            raise ConfigError(f"unknown emit format {emit!r}")
        os.makedirs(out_dir, exist_ok=True)
        paths = []
        if emit in ("json", "both"):
            paths.append(os.path.join(out_dir, "report.json"))
            with open(paths[-1], "w", newline="\n") as fh:
                fh.write(self.to_json())
        if emit in ("csv", "both"):
            for name in sorted(self.tables):
                paths.append(os.path.join(out_dir, f"{name}.csv"))
                with open(paths[-1], "w", newline="") as fh:
                    fh.write(self.table_csv(name))
        return paths


def _run_batch(cfg: ExperimentConfig, start: int, stop: int) -> np.ndarray:
    seeds = derive_seeds(cfg.master_seed, start, stop)
    return SUITES[cfg.suite].run_batch(cfg, seeds)


def _batches(cfg: ExperimentConfig):
    b = cfg.batch_size
    return [(s, min(cfg.trials, s + b)) for s in range(0, cfg.trials, b)]


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> ExperimentReport:
    """Run ``cfg.trials`` trials and fold them into a report.

    Trial ``t`` uses the sub-stream ``derive_seed(master_seed, t)``.  Batches
    are fixed by ``batch_size`` alone and folded in trial order, so the
    report body does not depend on ``jobs``.
    """
    if jobs < 1:
        raise ConfigError("jobs must be >= 1")
    suite = SUITES[cfg.suite]
    t0 = time.perf_counter()
    prep = suite.prepare(cfg)
    t1 = time.perf_counter()
    batches = _batches(cfg)
    if jobs == 1 or len(batches) == 1:
        parts = [_run_batch(cfg, s, e) for s, e in batches]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(batches))) as pool:
            parts = list(pool.map(_run_batch, [cfg] * len(batches), *zip(*batches)))
    rows = np.vstack(parts)
    t2 = time.perf_counter()
    res = suite.finalize(cfg, prep, rows)
    t3 = time.perf_counter()
    derived = {"rng": ALGORITHM, "profile_digest": cfg.profile.digest, **res.derived}
    timing = {"exact_seconds": t1 - t0, "sampling_seconds": t2 - t1, "aggregate_seconds": t3 - t2,
              "total_seconds": t3 - t0, "trials_per_second": cfg.trials / max(t2 - t1, 1e-9), "jobs": jobs}
    return ExperimentReport(cfg.to_dict(), derived, res.tables, res.checks,
                            prep.warnings + res.warnings, timing)


def block_count_frequencies(profile, a: float, n: int, trials: int, master_seed: int = 0,
                            batch: int = 4096) -> np.ndarray:
    """Histogram of ``N_n`` over ``trials`` naive samples of block ``n``.

    Only the block's own coins are drawn, which equals sampling the full
    range and counting.
    """
    lo, hi = floor_pow(a, n), floor_pow(a, n + 1)
    hist = np.zeros(hi - lo + 1, dtype=np.int64)
    for s in range(0, trials, batch):
        seeds = derive_seeds(master_seed, s, min(trials, s + batch))
        counts = naive_indicators(profile, seeds, lo, hi).sum(axis=1)
        hist += np.bincount(counts, minlength=hist.size)
    return hist


def compare_block_law(profile, a: float, n: int, trials: int, master_seed: int = 0, cap: int = 8,
                      k: float = 4.0) -> list:
    """Per-bin ``(j, frequency, exact, se, within k SE)`` with bins ``0..cap`` and ``> cap``."""
    hist = block_count_frequencies(profile, a, n, trials, master_seed)
    law = block_count_distribution(profile, a, n, cap)
    out = []
    exact = list(law.probs) + [law.overflow]
    freq = list(hist[:cap + 1] / trials) + [hist[cap + 1:].sum() / trials]
    for j, (f, x) in enumerate(zip(freq, exact)):
        se = float((x * (1 - x) / trials) ** 0.5)
        out.append((j, float(f), float(x), se, bool(abs(f - x) <= k * se if se else f == x)))
    return out
