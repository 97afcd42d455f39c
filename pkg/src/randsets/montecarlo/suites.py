"""Verification suites.

Every suite splits its work in four steps:

* ``resolve`` validates the parameters and fills defaults (no sampling),
* ``prepare`` computes exact oracle values once, in the parent process,
* ``run_batch`` maps a batch of trial seeds to one numeric row per trial,
* ``finalize`` folds the rows, ordered by trial index, into tables and checks.

Rows are float64 with NaN for "undefined in this trial"; counts are exact
integers well below 2**53.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..analyzers import ap_block_events, block_edges, find_aps, floor_pow
from ..convergence import block_integral, check_admissibility, series_sum
from ..errors import BlockTooLargeError, ConfigError
from ..exact import (AP_EXACT_CAP, MAX_BLOCK, block_count_distribution, block_empty_probability,
                     expected_ap_count, expected_block_events, expected_pair_coincidences,
                     miss_probability)
from ..realization import Realization
from ..rng import RngStream
from ..sampler import naive_indicators, sample_skip
from ..sets import BoundedGapSet
from .stats import estimate_event_probability, estimate_mean

GROW = 0.5
FLATTEN = 0.05
CALIBRATION = 0.99
_NAIVE_CELLS = 1 << 22


@dataclass
class SuiteResult:
    derived: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)


# ---------------------------------------------------------------- helpers

def realizations(cfg, seeds, lo: int, hi: int) -> list:
    """Index arrays of ``E ∩ (lo, hi]``, one per trial seed.

    The naive path evaluates a whole batch at once; it returns exactly what
    per-trial ``sample_naive`` would.
    """
    seeds = np.asarray(seeds, dtype=np.uint64)
    if cfg.sampler == "skip":
        return [sample_skip(cfg.profile, hi, RngStream(int(s)), start=lo,
                            chunk_size=cfg.chunk_size).indices for s in seeds]
    parts = [[] for _ in range(seeds.size)]
    step = max(1, _NAIVE_CELLS // max(1, seeds.size))
    for s in range(lo, hi, step):
        e = min(hi, s + step)
        rows, cols = np.nonzero(naive_indicators(cfg.profile, seeds, s, e))
        cuts = np.searchsorted(rows, np.arange(seeds.size + 1))
        for t in range(seeds.size):
            if cuts[t + 1] > cuts[t]:
                parts[t].append(cols[cuts[t]:cuts[t + 1]] + (s + 1))
    return [np.concatenate(p).astype(np.int64) if p else np.zeros(0, dtype=np.int64) for p in parts]


def _clean(x):
    """JSON-safe scalar: numpy types unwrapped, non-finite floats become None."""
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    return x if math.isfinite(x) else None


def table(columns, rows) -> dict:
    return {"columns": list(columns), "rows": [[_clean(v) for v in r] for r in rows]}


def prop_cells(successes: int, trials: int, cfg, exact=None) -> list:
    """estimate, lower, upper, acc_lower, acc_upper, exact."""
    ci = estimate_event_probability(successes, trials, cfg.z)
    acc = estimate_event_probability(successes, trials, cfg.acceptance_z)
    return [ci.point, ci.lower, ci.upper, acc.lower, acc.upper, exact]


def prop_columns(prefix: str) -> list:
    return [f"{prefix}_{c}" for c in ("estimate", "lower", "upper", "acc_lower", "acc_upper", "exact")]


def check(passed, detail: str = "") -> dict:
    return {"passed": None if passed is None else bool(passed), "detail": detail}


def calibration_check(cells) -> dict:
    """Exact values inside the acceptance interval in at least 99% of cells.

    ``cells`` holds ``(exact, acc_lower, acc_upper)``; cells without an
    exact value are ignored.
    """
    usable = [(x, lo, hi) for x, lo, hi in cells if x is not None]
    if not usable:
        return check(None, "no exact oracle cells")
    misses = sum(not (lo <= x <= hi) for x, lo, hi in usable)
    allowed = math.floor((1 - CALIBRATION) * len(usable))
    return check(misses <= allowed, f"{misses} of {len(usable)} cells outside the acceptance interval "
                                    f"({allowed} allowed)")


def mean_check(cells, k: float = 4.0) -> dict:
    """Every Monte Carlo mean within ``k`` standard errors of its exact value."""
    bad = [(m.mean, x) for m, x in cells if not m.within(x, k)]
    return check(not bad, f"{len(cells) - len(bad)} of {len(cells)} means within {k:g} SE"
                 + (f"; misses (mean, exact): {bad[:5]}" if bad else ""))


def increments(values) -> list:
    return [b - a for a, b in zip(values, values[1:])]


def trend_grows(values, ratio: float) -> dict:
    inc = increments(values)
    if len(inc) < 2:
        return check(None, "needs at least three cutoffs")
    return check(inc[-1] >= ratio * inc[0],
                 f"last increment {inc[-1]:.6g} vs first {inc[0]:.6g} (need ratio >= {ratio:g})")


def terms_flatten(terms, ratio: float) -> dict:
    if len(terms) < 2:
        return check(None, "needs at least two terms")
    return check(terms[-1] <= ratio * terms[0],
                 f"last term {terms[-1]:.6g} vs first {terms[0]:.6g} (need ratio <= {ratio:g})")


def _int_list(params, key, minimum=1, increasing=True) -> list:
    v = params.get(key)
    if not isinstance(v, list) or not v or not all(isinstance(x, int) and not isinstance(x, bool) for x in v):
        raise ConfigError(f"parameter {key!r} must be a non-empty list of integers")
    if any(x < minimum for x in v):
        raise ConfigError(f"parameter {key!r} entries must be >= {minimum}")
    if increasing and any(b <= a for a, b in zip(v, v[1:])):
        raise ConfigError(f"parameter {key!r} must be strictly increasing")
    return [int(x) for x in v]


def _int(params, key, default=None, minimum=None) -> int:
    v = params.get(key, default)
    if v is None:
        raise ConfigError(f"missing suite parameter {key!r}")
    if not isinstance(v, int) or isinstance(v, bool):
        raise ConfigError(f"parameter {key!r} must be an integer")
    if minimum is not None and v < minimum:
        raise ConfigError(f"parameter {key!r} must be >= {minimum}")
    return int(v)


def _num(params, key, default=None, lo=None) -> float:
    v = params.get(key, default)
    if v is None:
        raise ConfigError(f"missing suite parameter {key!r}")
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ConfigError(f"parameter {key!r} must be a number")
    if lo is not None and not v > lo:
        raise ConfigError(f"parameter {key!r} must exceed {lo}")
    return float(v)


def _check_keys(params, allowed):
    extra = set(params) - set(allowed)
    if extra:
        raise ConfigError(f"unknown suite parameters {sorted(extra)}")


def _window(params, N, a_default=2.0, extra_blocks=1):
    a = _num(params, "a", a_default, lo=1.0)
    n_first = _int(params, "n_first", minimum=0)
    n_last = _int(params, "n_last", minimum=0)
    if n_last < n_first:
        raise ConfigError("n_last must be >= n_first")
    top = floor_pow(a, n_last + extra_blocks)
    if top > N:
        raise ConfigError(f"block window needs N >= {top}, got N = {N}")
    return a, n_first, n_last


def _quantiles(v) -> list:
    v = np.asarray(v, dtype=np.float64)
    v = v[~np.isnan(v)]
    if not v.size:
        return [0, None, None, None, None, None]
    q = np.quantile(v, [0.0, 0.1, 0.5, 0.9, 1.0])
    return [int(v.size)] + q.tolist()


QUANTILE_COLUMNS = ["defined", "min", "q10", "median", "q90", "max"]


class Suite:
    name = ""
    keys: tuple = ()

    def resolve(self, cfg, params: dict) -> dict:
        raise NotImplementedError

    def prepare(self, cfg) -> SuiteResult:
        return SuiteResult()

    def run_batch(self, cfg, seeds) -> np.ndarray:
        raise NotImplementedError

    def finalize(self, cfg, prep: SuiteResult, rows: np.ndarray) -> SuiteResult:
        raise NotImplementedError


# ---------------------------------------------------------------- block-count limsup

def limsup_exact(profile, a, ns, C, max_block=MAX_BLOCK) -> list:
    """``(P[N_n = C], P[N_n >= C+1])`` per ``n``; ``None`` where the block is too large."""
    out = []
    for n in ns:
        try:
            law = block_count_distribution(profile, a, n, C + 1, max_block)
        except BlockTooLargeError:
            out.append(None)
            continue
        out.append((float(law.probs[C]), law.at_least(C + 1)))
    return out


class LimsupLemma(Suite):
    name = "limsup_lemma"
    keys = ("a", "n_first", "n_last", "C", "max_block", "grow", "flatten")

    def resolve(self, cfg, params):
        _check_keys(params, self.keys)
        if cfg.profile.kind == "admissible_power":
            C = cfg.profile.critical_count()
            if "C" in params and params["C"] != C:
                raise ConfigError(f"C is fixed by alpha to {C}, got {params['C']}")
        else:
            # other profiles only make sense with an explicit critical count
            C = _int(params, "C", minimum=1)
        a, n0, n1 = _window(params, cfg.N)
        return {"a": a, "n_first": n0, "n_last": n1, "C": C,
                "max_block": _int(params, "max_block", MAX_BLOCK, minimum=1),
                "grow": _num(params, "grow", GROW, lo=0), "flatten": _num(params, "flatten", FLATTEN, lo=0)}

    def prepare(self, cfg):
        p = cfg.params
        C = p["C"]
        ns = list(range(p["n_first"], p["n_last"] + 1))
        exact = limsup_exact(cfg.profile, p["a"], ns, C, p["max_block"])
        return SuiteResult(derived={"C": C, "exact": exact})

    def run_batch(self, cfg, seeds):
        p = cfg.params
        edges = block_edges(p["a"], p["n_first"], p["n_last"])
        reals = realizations(cfg, seeds, int(edges[0]), int(edges[-1]))
        return np.array([np.diff(np.searchsorted(r, edges, side="right")) for r in reals], dtype=np.float64)

    def finalize(self, cfg, prep, rows):
        p = cfg.params
        C = prep.derived["C"]
        exact = prep.derived["exact"]
        T = rows.shape[0]
        ns = list(range(p["n_first"], p["n_last"] + 1))
        lengths = np.diff(block_edges(p["a"], p["n_first"], p["n_last"]))
        out_rows, cells = [], []
        emp_crit, emp_excess = [], []
        for j, n in enumerate(ns):
            counts = rows[:, j]
            eq = int(np.count_nonzero(counts == C))
            ge = int(np.count_nonzero(counts >= C + 1))
            ex = exact[j]
            a_cells = prop_cells(eq, T, cfg, ex[0] if ex else None)
            b_cells = prop_cells(ge, T, cfg, ex[1] if ex else None)
            cells += [(a_cells[5], a_cells[3], a_cells[4]), (b_cells[5], b_cells[3], b_cells[4])]
            emp_crit.append(a_cells[0])
            emp_excess.append(b_cells[0])
            out_rows.append([n, int(lengths[j])] + a_cells + b_cells)
        res = SuiteResult(derived={"C": C})
        if cfg.profile.kind != "admissible_power":
            res.warnings.append("profile is not admissible_power; C was taken from the parameters")
        res.tables["blocks"] = table(["n", "L_n"] + prop_columns("critical") + prop_columns("excess"), out_rows)
        have = all(e is not None for e in exact)
        crit = [e[0] for e in exact] if have else []
        excess = [e[1] for e in exact] if have else []
        sums = [[n, s1, s2, e1, e2] for n, s1, s2, e1, e2 in zip(
            ns, np.cumsum(emp_crit), np.cumsum(emp_excess),
            np.cumsum(crit) if have else [None] * len(ns), np.cumsum(excess) if have else [None] * len(ns))]
        res.tables["partial_sums"] = table(
            ["n", "critical_empirical", "excess_empirical", "critical_exact", "excess_exact"], sums)
        if have:
            dec = all(b < a for a, b in zip(excess, excess[1:]))
            res.checks["exact_excess_strictly_decreasing"] = check(dec, "P[N_n >= C+1] over the window")
            res.checks["exact_excess_flattens"] = terms_flatten(excess, p["flatten"])
            res.checks["exact_critical_grows"] = check(
                crit[-1] >= p["grow"] * crit[0],
                f"last increment {crit[-1]:.6g} vs first {crit[0]:.6g} (need ratio >= {p['grow']:g})")
        else:
            res.warnings.append("some blocks exceed max_block; exact trend checks skipped")
        res.checks["oracle_calibration"] = calibration_check(cells)
        return res


# ---------------------------------------------------------------- lacunarity

class LacunaryThm1(Suite):
    name = "lacunary_thm1"
    keys = ("a", "n_first", "n_last", "tail_from", "ratio_window")

    def resolve(self, cfg, params):
        _check_keys(params, self.keys)
        prof = cfg.profile
        if prof.kind != "admissible_power" or prof.alpha != 1.0:
            raise ConfigError("lacunary_thm1 needs an admissible_power profile with alpha = 1")
        a, n0, n1 = _window(params, cfg.N, extra_blocks=2)
        if a != 2.0:
            raise ConfigError("lacunary_thm1 uses dyadic blocks (a = 2)")
        rep = check_admissibility(prof.f, epsilons=(1.0,))
        if not rep.admissible:
            raise ConfigError(
                f"f is not admissible: first integral {rep.first.verdict}, "
                f"second integral {rep.second[1.0].verdict}")
        tail = _int(params, "tail_from", (n0 + n1 + 1) // 2, minimum=n0)
        if tail > n1:
            raise ConfigError("tail_from must lie in the window")
        return {"a": a, "n_first": n0, "n_last": n1, "tail_from": tail,
                "ratio_window": _int(params, "ratio_window", 32, minimum=1)}

    def prepare(self, cfg):
        p = cfg.params
        f = cfg.profile.f
        ns = list(range(p["n_first"], p["n_last"] + 2))
        edges = block_edges(2, p["n_first"], p["n_last"] + 1)
        empty = [block_empty_probability(cfg.profile, int(lo), int(hi)) for lo, hi in zip(edges, edges[1:])]
        A = [block_integral(f, 2, n) for n in ns]
        return SuiteResult(derived={"empty": empty, "A": A})

    def run_batch(self, cfg, seeds):
        p = cfg.params
        edges = block_edges(2, p["n_first"], p["n_last"] + 1)
        w = p["ratio_window"]
        out = []
        for r in realizations(cfg, seeds, 0, int(edges[-1])):
            counts = np.diff(np.searchsorted(r, edges, side="right")).astype(np.float64)
            if r.size > 1:
                ratios = r[1:] / r[:-1]
                tail = float(ratios[-w:].min())
            else:
                tail = math.nan
            out.append(np.append(counts, tail))
        return np.array(out, dtype=np.float64).reshape(len(out), len(edges))

    def finalize(self, cfg, prep, rows):
        p = cfg.params
        f = cfg.profile.f
        T = rows.shape[0]
        K = p["n_last"] - p["n_first"] + 1
        counts = rows[:, :K + 1]
        empty, A = prep.derived["empty"], prep.derived["A"]
        res = SuiteResult()
        pair_rows, empty_rows, cells = [], [], []
        for j in range(K + 1):
            z = int(np.count_nonzero(counts[:, j] == 0))
            c = prop_cells(z, T, cfg, empty[j])
            cells.append((c[5], c[3], c[4]))
            empty_rows.append([p["n_first"] + j] + c)
        q = [1 - r[1] for r in empty_rows]
        fits = []
        for j in range(K):
            n = p["n_first"] + j
            joint = int(np.count_nonzero(counts[:, j] * counts[:, j + 1] >= 1))
            exact = (1 - empty[j]) * (1 - empty[j + 1])
            c = prop_cells(joint, T, cfg, exact)
            cells.append((c[5], c[3], c[4]))
            env = A[j] * A[j + 1]
            bound = 1.0 / float(f(np.array([2.0**n]))[0]) ** 2
            fits.append((c[0], env, exact))
            pair_rows.append([n] + c + [q[j] * q[j + 1], env, bound])
        # inverse-variance weighted fit of estimate / envelope
        w = np.array([env**2 / max(x * (1 - x), 1e-300) for _, env, x in fits])
        r = np.array([est / env for est, env, _ in fits])
        k_hat = float((w * r).sum() / w.sum())
        for row in pair_rows:
            row.append(k_hat * row[-2])
        res.derived = {"fitted_constant": k_hat}
        res.tables["adjacent_pairs"] = table(
            ["n"] + prop_columns("joint") + ["factorized", "envelope", "bound", "fitted_envelope"], pair_rows)
        res.tables["empty_blocks"] = table(["n"] + prop_columns("empty"), empty_rows)

        fact_bad = [row[0] for row in pair_rows if not row[4] <= row[7] <= row[5]]
        res.checks["independence_factorization"] = check(
            not fact_bad, "factorized estimate inside the joint acceptance interval"
            + (f"; fails at n = {fact_bad}" if fact_bad else ""))
        fit_bad = [row[0] for row in pair_rows if row[4] > row[-1]]
        res.checks["below_fitted_envelope"] = check(
            not fit_bad, f"acceptance lower bound <= {k_hat:.4g} * A_n A_(n+1)"
            + (f"; fails at n = {fit_bad}" if fit_bad else ""))
        env_bad = [row[0] for row in pair_rows if row[8] > row[9]]
        res.checks["envelope_below_bound"] = check(
            not env_bad, "A_n A_(n+1) <= 1 / f(2^n)^2" + (f"; fails at n = {env_bad}" if env_bad else ""))
        res.checks["oracle_calibration"] = calibration_check(cells)

        t0 = p["tail_from"] - p["n_first"]
        tail_any = int(np.count_nonzero((counts[:, t0:K] * counts[:, t0 + 1:K + 1] >= 1).any(axis=1)))
        res.tables["tail_cooccurrence"] = table(
            ["n_from", "n_to"] + prop_columns("any_adjacent"), [[p["tail_from"], p["n_last"]]
                                                               + prop_cells(tail_any, T, cfg)])
        tails = rows[:, K + 1]
        res.tables["tail_inf_ratio"] = table(QUANTILE_COLUMNS, [_quantiles(tails)])
        return res


# ---------------------------------------------------------------- gap growth

class GapGrowthProp2(Suite):
    name = "gap_growth_prop2"
    keys = ("decades", "w", "lags")

    def resolve(self, cfg, params):
        _check_keys(params, self.keys)
        decades = _int_list(params, "decades", minimum=2)
        if decades[-1] > cfg.N:
            raise ConfigError("decades must not exceed N")
        lags = _int_list(params, "lags", minimum=1) if "lags" in params else [1, 2, 3]
        return {"decades": decades, "w": _int(params, "w", 32, minimum=1), "lags": lags}

    def prepare(self, cfg):
        p = cfg.params
        top = p["decades"][-1]
        res = SuiteResult()
        s1 = series_sum(cfg.profile, 1, top)
        s2 = series_sum(cfg.profile, 2, top)
        res.derived = {"sum_p": s1.verdict.to_dict(), "sum_p2": s2.verdict.to_dict()}
        if s1.verdict.verdict != "Diverges":
            res.warnings.append(f"sum p_k looks {s1.verdict.verdict} up to {top}; the hypothesis wants divergence")
        if s2.verdict.verdict != "Converges":
            res.warnings.append(f"sum p_k^2 looks {s2.verdict.verdict} up to {top}; the hypothesis wants convergence")
        res.derived["pair_exact"] = [[expected_pair_coincidences(cfg.profile, l, N) for l in p["lags"]]
                                     for N in p["decades"]]
        return res

    def run_batch(self, cfg, seeds):
        p = cfg.params
        out = []
        for r in realizations(cfg, seeds, 0, p["decades"][-1]):
            row = []
            for N in p["decades"]:
                win = r[(r > N // 2) & (r <= N)]
                g = np.diff(win)
                row.append(float(g[-p["w"]:].min()) if g.size else math.nan)
            for N in p["decades"]:
                sub = r[r <= N]
                for l in p["lags"]:
                    pos = np.searchsorted(sub, sub + l)
                    ok = pos < sub.size
                    row.append(float(np.count_nonzero(sub[pos[ok]] == sub[ok] + l)))
            out.append(row)
        return np.array(out, dtype=np.float64)

    def finalize(self, cfg, prep, rows):
        p = cfg.params
        D, L = len(p["decades"]), len(p["lags"])
        res = SuiteResult()
        gap_rows, medians = [], []
        for j, N in enumerate(p["decades"]):
            q = _quantiles(rows[:, j])
            medians.append(q[3])
            gap_rows.append([N] + q)
        res.tables["tail_min_gap"] = table(["N"] + QUANTILE_COLUMNS, gap_rows)
        if any(m is None for m in medians):
            res.checks["median_gap_non_decreasing"] = check(False, "some decade had no gaps in any trial")
        else:
            res.checks["median_gap_non_decreasing"] = check(
                all(b >= a for a, b in zip(medians, medians[1:])), f"medians {medians}")
        pair_rows, cells = [], []
        for j, N in enumerate(p["decades"]):
            for i, l in enumerate(p["lags"]):
                m = estimate_mean(rows[:, D + j * L + i])
                x = prep.derived["pair_exact"][j][i]
                cells.append((m, x))
                pair_rows.append([N, l, m.mean, m.se, x, (m.mean - x) / m.se if m.se else None])
        res.tables["pair_coincidences"] = table(["N", "lag", "mean", "se", "exact", "z_score"], pair_rows)
        res.checks["pair_coincidences_match"] = mean_check(cells)
        return res


# ---------------------------------------------------------------- bounded-gap intersection

def non_increasing_on_grid(profile, N: int) -> bool:
    grid = np.unique(np.concatenate([np.arange(1, min(N, 10_000) + 1),
                                     np.geomspace(1, max(N, 2), 512).astype(np.int64)]))
    p = profile.probs(grid[grid <= N])
    return bool(np.all(np.diff(p) <= 0))


class BoundedGapProp3(Suite):
    name = "bounded_gap_prop3"
    keys = ("S", "decades")

    def resolve(self, cfg, params):
        _check_keys(params, self.keys)
        if "S" not in params:
            raise ConfigError("missing suite parameter 'S'")
        S = BoundedGapSet.from_spec(params["S"])
        decades = _int_list(params, "decades", minimum=1)
        if decades[-1] > cfg.N:
            raise ConfigError("decades must not exceed N")
        return {"S": S.to_spec(), "decades": decades}

    def prepare(self, cfg):
        p = cfg.params
        S = BoundedGapSet.from_spec(p["S"])
        res = SuiteResult()
        mono = non_increasing_on_grid(cfg.profile, p["decades"][-1])
        if not mono:
            res.warnings.append("profile is not non-increasing; the decay check is skipped")
        res.derived = {"non_increasing": mono, "gap_bound": S.gap_bound(p["decades"][-1]),
                       "miss": [miss_probability(cfg.profile, S, N) for N in p["decades"]]}
        return res

    def run_batch(self, cfg, seeds):
        p = cfg.params
        S = BoundedGapSet.from_spec(p["S"])
        out = []
        for r in realizations(cfg, seeds, 0, p["decades"][-1]):
            inside = r[S.contains(r)]
            out.append(float(inside[0]) if inside.size else math.inf)
        return np.array(out, dtype=np.float64).reshape(-1, 1)

    def finalize(self, cfg, prep, rows):
        p = cfg.params
        T = rows.shape[0]
        first = rows[:, 0]
        miss = prep.derived["miss"]
        res = SuiteResult(derived={"gap_bound": prep.derived["gap_bound"],
                                   "non_increasing": prep.derived["non_increasing"]})
        out, cells = [], []
        for N, m in zip(p["decades"], miss):
            misses = int(np.count_nonzero(first > N))
            c = prop_cells(misses, T, cfg, m)
            cells.append((c[5], c[3], c[4]))
            out.append([N] + c + [1 - c[0], 1 - m])
        res.tables["miss"] = table(["N"] + prop_columns("miss") + ["hit_estimate", "hit_exact"], out)
        res.checks["oracle_calibration"] = calibration_check(cells)
        if prep.derived["non_increasing"] and len(miss) > 1:
            res.checks["exact_miss_decays"] = check(
                all(b < a for a, b in zip(miss, miss[1:])), f"exact miss {miss[0]:.6g} -> {miss[-1]:.6g}")
        return res


# ---------------------------------------------------------------- progressions

class APPresenceProp4(Suite):
    name = "ap_presence_prop4"
    keys = ("l", "decades", "grow")

    def resolve(self, cfg, params):
        _check_keys(params, self.keys)
        l = _int(params, "l", minimum=1)
        decades = _int_list(params, "decades", minimum=l)
        if decades[-1] > cfg.N:
            raise ConfigError("decades must not exceed N")
        return {"l": l, "decades": decades, "grow": _num(params, "grow", GROW, lo=0)}

    def prepare(self, cfg):
        p = cfg.params
        res = SuiteResult()
        if cfg.profile.kind != "subexp":
            res.warnings.append(f"profile kind {cfg.profile.kind!r} is outside the subexp hypothesis")
        res.derived = {"k_max": [N // p["l"] - 1 for N in p["decades"]],
                       "exact": [expected_block_events(cfg.profile, p["l"], N // p["l"] - 1)
                                 for N in p["decades"]]}
        return res

    def run_batch(self, cfg, seeds):
        p = cfg.params
        l = p["l"]
        top = p["decades"][-1]
        out = []
        for r in realizations(cfg, seeds, 0, top):
            real = Realization(r, top)
            hits = np.asarray(ap_block_events(real, l, top // l - 1), dtype=np.int64)
            out.append([float(np.count_nonzero(hits <= N // l - 1)) for N in p["decades"]])
        return np.array(out, dtype=np.float64)

    def finalize(self, cfg, prep, rows):
        p = cfg.params
        res = SuiteResult(derived={"l": p["l"]})
        out, cells = [], []
        for j, N in enumerate(p["decades"]):
            m = estimate_mean(rows[:, j])
            x = prep.derived["exact"][j]
            cells.append((m, x))
            out.append([N, prep.derived["k_max"][j], m.mean, m.se, x])
        res.tables["block_events"] = table(["N", "k_max", "mean", "se", "exact"], out)
        res.checks["mean_matches_exact"] = mean_check(cells)
        res.checks["exact_grows"] = trend_grows(prep.derived["exact"], p["grow"])
        return res


def absence_length(alpha: float) -> int:
    """Smallest integer ``l`` with ``l > 1/alpha``."""
    return math.floor(1 / alpha) + 1


class APAbsenceProp5(Suite):
    name = "ap_absence_prop5"
    keys = ("l", "decades", "flatten", "exact_cap")

    def resolve(self, cfg, params):
        _check_keys(params, self.keys)
        prof = cfg.profile
        if prof.kind == "power_law" and 0 < prof.alpha <= 0.5:
            l = absence_length(prof.alpha)
            if "l" in params and params["l"] != l:
                raise ConfigError(f"l is fixed by alpha to {l}, got {params['l']}")
        else:
            l = _int(params, "l", minimum=2)
        cap = _int(params, "exact_cap", AP_EXACT_CAP, minimum=3)
        decades = _int_list(params, "decades", minimum=3)
        if decades[-1] > cfg.N:
            raise ConfigError("decades must not exceed N")
        if decades[-1] > cap:
            raise ConfigError(f"decades must not exceed the exact cap {cap}")
        return {"l": l, "decades": decades, "flatten": _num(params, "flatten", FLATTEN, lo=0),
                "exact_cap": cap}

    def prepare(self, cfg):
        p = cfg.params
        res = SuiteResult()
        prof = cfg.profile
        if not (prof.kind == "power_law" and 0 < prof.alpha <= 0.5):
            res.warnings.append("profile is outside the power_law alpha <= 1/2 hypothesis")
        res.derived = {"exact": [expected_ap_count(prof, p["l"], N, p["exact_cap"]) for N in p["decades"]]}
        return res

    def run_batch(self, cfg, seeds):
        p = cfg.params
        out = []
        for r in realizations(cfg, seeds, 0, p["decades"][-1]):
            row = []
            for N in p["decades"]:
                sub = r[r <= N]
                rep = find_aps(Realization(sub, N), p["l"] + 1, cap=0)
                row.append(float(rep.count))
            out.append(row)
        return np.array(out, dtype=np.float64)

    def finalize(self, cfg, prep, rows):
        p = cfg.params
        exact = prep.derived["exact"]
        res = SuiteResult(derived={"l": p["l"], "progression_length": p["l"] + 1})
        out, cells = [], []
        for j, N in enumerate(p["decades"]):
            m = estimate_mean(rows[:, j])
            cells.append((m, exact[j]))
            out.append([N, m.mean, m.se, exact[j]])
        res.tables["ap_counts"] = table(["N", "mean", "se", "exact"], out)
        res.checks["mean_matches_exact"] = mean_check(cells)
        inc = increments(exact)
        res.checks["exact_increments_flatten"] = terms_flatten(inc, p["flatten"])
        return res


# ---------------------------------------------------------------- custom events

EVENT_TYPES = ("block_count_at_least", "block_count_equals", "nonempty", "intersects")


class Custom(Suite):
    name = "custom"
    keys = ("event",)

    def resolve(self, cfg, params):
        _check_keys(params, self.keys)
        ev = params.get("event")
        if not isinstance(ev, dict) or ev.get("type") not in EVENT_TYPES:
            raise ConfigError(f"custom suite needs 'event' with type in {EVENT_TYPES}")
        t = ev["type"]
        if t.startswith("block_count"):
            _check_keys(ev, ("type", "a", "n", "j"))
            a = _num(ev, "a", 2.0, lo=1.0)
            n = _int(ev, "n", minimum=0)
            j = _int(ev, "j", minimum=0)
            if floor_pow(a, n + 1) > cfg.N:
                raise ConfigError("block exceeds N")
            return {"event": {"type": t, "a": a, "n": n, "j": j}}
        if t == "nonempty":
            _check_keys(ev, ("type", "lo", "hi"))
            lo, hi = _int(ev, "lo", 0, minimum=0), _int(ev, "hi", cfg.N, minimum=1)
            if not lo < hi <= cfg.N:
                raise ConfigError("need lo < hi <= N")
            return {"event": {"type": t, "lo": lo, "hi": hi}}
        _check_keys(ev, ("type", "S"))
        if "S" not in ev:
            raise ConfigError("intersects event needs 'S'")
        return {"event": {"type": t, "S": BoundedGapSet.from_spec(ev["S"]).to_spec()}}

    def _range(self, cfg):
        ev = cfg.params["event"]
        if ev["type"].startswith("block_count"):
            return floor_pow(ev["a"], ev["n"]), floor_pow(ev["a"], ev["n"] + 1)
        if ev["type"] == "nonempty":
            return ev["lo"], ev["hi"]
        return 0, cfg.N

    def prepare(self, cfg):
        ev = cfg.params["event"]
        exact = None
        if ev["type"].startswith("block_count"):
            try:
                law = block_count_distribution(cfg.profile, ev["a"], ev["n"], ev["j"] + 1)
                exact = law.at_least(ev["j"]) if ev["type"] == "block_count_at_least" else float(law.probs[ev["j"]])
            except BlockTooLargeError:
                pass
        elif ev["type"] == "nonempty":
            exact = 1 - block_empty_probability(cfg.profile, ev["lo"], ev["hi"])
        else:
            exact = 1 - miss_probability(cfg.profile, BoundedGapSet.from_spec(ev["S"]), cfg.N)
        return SuiteResult(derived={"exact": exact})

    def run_batch(self, cfg, seeds):
        ev = cfg.params["event"]
        lo, hi = self._range(cfg)
        out = []
        for r in realizations(cfg, seeds, lo, hi):
            if ev["type"] == "block_count_at_least":
                hit = r.size >= ev["j"]
            elif ev["type"] == "block_count_equals":
                hit = r.size == ev["j"]
            elif ev["type"] == "nonempty":
                hit = r.size > 0
            else:
                hit = bool(BoundedGapSet.from_spec(ev["S"]).contains(r).any())
            out.append(float(hit))
        return np.array(out, dtype=np.float64).reshape(-1, 1)

    def finalize(self, cfg, prep, rows):
        T = rows.shape[0]
        c = prop_cells(int(rows[:, 0].sum()), T, cfg, prep.derived["exact"])
        res = SuiteResult()
        res.tables["event"] = table(["event"] + prop_columns("frequency"), [[cfg.params["event"]["type"]] + c])
        res.checks["oracle_calibration"] = calibration_check([(c[5], c[3], c[4])])
        return res


SUITES = {s.name: s for s in (LacunaryThm1(), LimsupLemma(), GapGrowthProp2(), BoundedGapProp3(),
                              APPresenceProp4(), APAbsenceProp5(), Custom())}
