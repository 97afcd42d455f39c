import copy
import json
import math
from pathlib import Path

import numpy as np
import pytest

from randsets.errors import ConfigError
from randsets.montecarlo import (ExperimentConfig, estimate_event_probability, estimate_mean, run_experiment)
from randsets.montecarlo.suites import calibration_check, realizations
from randsets.rng import RngStream, derive_seeds
from randsets.sampler import sample_naive

DOCS = Path(__file__).resolve().parents[1] / "docs" / "examples"
LOG = {"kind": "log_shift"}


def cfg_doc(suite, profile, N, trials, params, **kw):
    return {"schema_version": 1, "suite": suite, "profile": profile, "N": N, "trials": trials,
            "params": params, **kw}


def run(doc, jobs=1):
    return run_experiment(ExperimentConfig.from_dict(doc), jobs)


def rows(report, name):
    tab = report.tables[name]
    return [dict(zip(tab["columns"], r)) for r in tab["rows"]]


# ---------------------------------------------------------------- intervals

def wilson_oracle(k, n, z):
    # statsmodels' implementation as the independent oracle
    from statsmodels.stats.proportion import proportion_confint
    return proportion_confint(k, n, alpha=2 * (1 - 0.5 * (1 + math.erf(z / math.sqrt(2)))), method="wilson")


def test_wilson_edge_cases():
    ci = estimate_event_probability(0, 100, 1.96)
    assert ci.point == 0.0 and ci.lower == 0.0 and ci.upper > 0
    ci = estimate_event_probability(100, 100, 1.96)
    assert ci.point == 1.0 and ci.upper == 1.0 and ci.lower < 1


def test_wilson_half():
    ci = estimate_event_probability(500, 1000, 1.96)
    assert ci.lower + ci.upper == pytest.approx(1.0, abs=1e-12)
    assert 0.46 < ci.lower < ci.upper < 0.54
    lo, hi = wilson_oracle(500, 1000, 1.96)
    assert (ci.lower, ci.upper) == pytest.approx((lo, hi), abs=1e-12)


@pytest.mark.parametrize("k,n", [(1, 10), (7, 50), (123, 1000), (999, 1000), (3, 100_000)])
@pytest.mark.parametrize("z", [1.96, 3.29])
def test_wilson_matches_statsmodels(k, n, z):
    ci = estimate_event_probability(k, n, z)
    lo, hi = wilson_oracle(k, n, z)
    assert (ci.lower, ci.upper) == pytest.approx((lo, hi), abs=1e-12)
    assert 0 <= ci.lower <= ci.point <= ci.upper <= 1


def test_wilson_monotone():
    a = estimate_event_probability(30, 100, 1.96)
    b = estimate_event_probability(30, 100, 3.29)
    c = estimate_event_probability(300, 1000, 1.96)
    assert b.lower < a.lower and b.upper > a.upper
    assert c.upper - c.lower < a.upper - a.lower


def test_wilson_rejects_bad_counts():
    with pytest.raises(ConfigError):
        estimate_event_probability(5, 4)
    with pytest.raises(ConfigError):
        estimate_event_probability(0, 0)


def test_mean_estimate():
    m = estimate_mean([1, 2, 3, 4])
    assert m.mean == 2.5 and m.se == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2)
    assert m.within(2.5 + 3.9 * m.se) and not m.within(2.5 + 4.1 * m.se)
    z = estimate_mean([4, 4, 4])
    assert z.within(4) and not z.within(4.001)


def test_calibration_rule():
    cells = [(0.5, 0.4, 0.6)] * 99 + [(0.9, 0.4, 0.6)]
    assert calibration_check(cells)["passed"]
    assert not calibration_check(cells + [(0.9, 0.4, 0.6)])["passed"]


# ---------------------------------------------------------------- configs

def test_config_round_trip_fills_defaults():
    doc = cfg_doc("BoundedGapProp3", {"kind": "constant", "p": 0.5}, 10, 5,
                  {"S": {"kind": "ap", "start": 2, "step": 2}, "decades": [10]})
    cfg = ExperimentConfig.from_dict(doc)
    out = cfg.to_dict()
    assert out["suite"] == "bounded_gap_prop3" and out["sampler"] == "skip"
    assert out["z"] == 1.96 and out["acceptance_z"] == 3.29
    assert ExperimentConfig.from_dict(out) == cfg


@pytest.mark.parametrize("mutate", [
    lambda d: d.pop("suite"),
    lambda d: d.update(trials=0),
    lambda d: d.update(suite="Nope"),
    lambda d: d.update(extra=1),
    lambda d: d.update(sampler="fancy"),
    lambda d: d["params"].pop("decades"),
    lambda d: d["params"].update(decades=[100, 10]),
    lambda d: d["params"].update(decades=[10, 1000]),
    lambda d: d["params"].pop("S"),
    lambda d: d["params"].update(bogus=True),
    lambda d: d.update(profile={"kind": "constant", "p": 2}),
])
def test_invalid_configs(mutate):
    doc = cfg_doc("BoundedGapProp3", {"kind": "constant", "p": 0.5}, 100, 5,
                  {"S": {"kind": "ap", "start": 2, "step": 2}, "decades": [10]})
    mutate(doc)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(doc)


def test_lacunary_rejects_constant_f():
    doc = cfg_doc("LacunaryThm1", {"kind": "admissible_power", "alpha": 1, "f": {"kind": "constant", "c": 1}},
                  2**12, 10, {"n_first": 2, "n_last": 8})
    with pytest.raises(ConfigError, match="not admissible"):
        ExperimentConfig.from_dict(doc)


def test_lacunary_requires_alpha_one_and_base_two():
    base = cfg_doc("LacunaryThm1", {"kind": "admissible_power", "alpha": 0.5, "f": LOG}, 2**12, 10,
                   {"n_first": 2, "n_last": 8})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(base)
    base["profile"]["alpha"] = 1
    base["params"]["a"] = 3
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(base)


def test_limsup_echoes_critical_count():
    for alpha, C in [(1, 1), (0.5, 2), (0.4, 2)]:
        cfg = ExperimentConfig.from_dict(cfg_doc(
            "LimsupLemma", {"kind": "admissible_power", "alpha": alpha, "f": LOG}, 2**10, 1,
            {"n_first": 3, "n_last": 8}))
        assert cfg.params["C"] == C


def test_absence_length_from_alpha():
    cfg = ExperimentConfig.from_dict(cfg_doc("APAbsenceProp5", {"kind": "power_law", "C": 1, "alpha": 0.5},
                                             1000, 1, {"decades": [10, 100, 1000]}))
    assert cfg.params["l"] == 3
    cfg = ExperimentConfig.from_dict(cfg_doc("APAbsenceProp5", {"kind": "power_law", "C": 1, "alpha": 0.3},
                                             1000, 1, {"decades": [10, 100, 1000]}))
    assert cfg.params["l"] == 4
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(cfg_doc("APAbsenceProp5", {"kind": "power_law", "C": 1, "alpha": 0.5},
                                           1000, 1, {"decades": [10, 100, 1000], "l": 2}))


# ---------------------------------------------------------------- runs

def test_certain_block_frequency_is_one():
    rep = run(cfg_doc("Custom", {"kind": "constant", "p": 1.0}, 8, 10,
                      {"event": {"type": "block_count_at_least", "a": 2, "n": 1, "j": 1}}))
    assert rows(rep, "event")[0]["frequency_estimate"] == 1.0 and rep.passed


def test_impossible_event_frequency_is_zero():
    rep = run(cfg_doc("Custom", {"kind": "constant", "p": 0.0}, 100, 50, {"event": {"type": "nonempty"}}))
    r = rows(rep, "event")[0]
    assert r["frequency_estimate"] == 0.0 and r["frequency_exact"] == 0.0


def test_bounded_gap_worked_example():
    rep = run(cfg_doc("BoundedGapProp3", {"kind": "power_law", "C": 1, "alpha": 1}, 10, 100_000,
                      {"S": {"kind": "ap", "start": 2, "step": 2}, "decades": [10]}, sampler="naive"))
    r = rows(rep, "miss")[0]
    assert r["miss_exact"] == pytest.approx(0.24609375, rel=1e-14)
    ci = estimate_event_probability(round(r["miss_estimate"] * 100_000), 100_000, 2.576)
    assert ci.contains(0.24609375)
    assert rep.passed


def test_bounded_gap_remark_never_hits():
    doc = json.loads((DOCS / "bounded_gap_remark.json").read_text())
    doc["trials"] = 200
    rep = run(doc)
    assert all(r["hit_estimate"] == 0.0 and r["hit_exact"] == 0.0 for r in rows(rep, "miss"))
    assert any("non-increasing" in w for w in rep.warnings)
    assert "exact_miss_decays" not in rep.checks


def test_full_set_hit_equals_nonempty():
    prof = {"kind": "power_law", "C": 0.5, "alpha": 1}
    rep = run(cfg_doc("BoundedGapProp3", prof, 50, 2000,
                      {"S": {"kind": "ap", "start": 1, "step": 1}, "decades": [5, 50]}))
    p = [min(1, 0.5 / k) for k in range(1, 51)]
    for r, N in zip(rows(rep, "miss"), (5, 50)):
        assert r["hit_exact"] == pytest.approx(1 - math.prod(1 - x for x in p[:N]), rel=1e-12)


def test_gap_growth_warns_on_constant_profile():
    rep = run(cfg_doc("GapGrowthProp2", {"kind": "constant", "p": 0.2}, 1000, 5, {"decades": [100, 1000]}))
    assert any("p_k^2" in w for w in rep.warnings)


def test_presence_constant_one():
    rep = run(cfg_doc("APPresenceProp4", {"kind": "constant", "p": 1.0}, 12, 5, {"l": 3, "decades": [12]}))
    r = rows(rep, "block_events")[0]
    assert r["exact"] == 4 and r["mean"] == 4
    assert rep.checks["mean_matches_exact"]["passed"]


def test_absence_constant_zero():
    rep = run(cfg_doc("APAbsenceProp5", {"kind": "constant", "p": 0.0}, 1000, 5,
                      {"l": 3, "decades": [10, 100, 1000]}))
    assert all(r["mean"] == 0 and r["exact"] == 0 for r in rows(rep, "ap_counts"))


def test_limsup_constant_zero():
    rep = run(cfg_doc("LimsupLemma", {"kind": "constant", "p": 0.0}, 2**10, 20,
                      {"n_first": 2, "n_last": 8, "C": 1}))
    assert all(r["critical_estimate"] == 0 and r["critical_exact"] == 0 for r in rows(rep, "blocks"))


def test_limsup_exact_excess_decreasing():
    rep = run(cfg_doc("LimsupLemma", {"kind": "admissible_power", "alpha": 0.5, "f": LOG}, 2**15, 200,
                      {"n_first": 6, "n_last": 14}))
    ex = [r["excess_exact"] for r in rows(rep, "blocks")]
    assert all(b < a for a, b in zip(ex, ex[1:]))
    assert rep.checks["exact_excess_strictly_decreasing"]["passed"]
    assert rep.checks["oracle_calibration"]["passed"]


def test_lacunary_tables():
    rep = run(cfg_doc("LacunaryThm1", {"kind": "admissible_power", "alpha": 1, "f": LOG}, 2**14, 2000,
                      {"n_first": 4, "n_last": 12}))
    pairs = rows(rep, "adjacent_pairs")
    assert [r["n"] for r in pairs] == list(range(4, 13))
    assert all(r["envelope"] <= r["bound"] for r in pairs)
    assert rep.derived["fitted_constant"] > 0
    assert rep.checks["independence_factorization"]["passed"]


def test_realizations_naive_batch_equals_per_trial():
    cfg = ExperimentConfig.from_dict(cfg_doc("Custom", {"kind": "power_law", "C": 1, "alpha": 0.5}, 5000, 1,
                                             {"event": {"type": "nonempty"}}, sampler="naive"))
    seeds = derive_seeds(9, 0, 17)
    got = realizations(cfg, seeds, 100, 5000)
    for s, idx in zip(seeds, got):
        full = sample_naive(cfg.profile, 5000, RngStream(int(s))).indices
        assert np.array_equal(idx, full[full > 100])


def small_battery():
    out = []
    for path in sorted(DOCS.glob("*.json")):
        doc = json.loads(path.read_text())
        doc["trials"] = min(doc["trials"], 300)
        if doc["suite"] == "GapGrowthProp2":
            doc["N"] = 2**20
            doc["params"]["decades"] = [2**14, 2**16, 2**18, 2**20]
        out.append((path.stem, doc))
    return out


@pytest.mark.parametrize("name,doc", small_battery(), ids=[n for n, _ in small_battery()])
def test_determinism_across_workers(name, doc):
    doc = copy.deepcopy(doc)
    doc["trials"] = min(doc["trials"], 120)
    doc["batch_size"] = 32
    a = run(doc, jobs=1)
    b = run(doc, jobs=3)
    assert a.body_json() == b.body_json()


def test_seed_changes_estimates_not_oracles():
    doc = cfg_doc("LimsupLemma", {"kind": "admissible_power", "alpha": 0.5, "f": LOG}, 2**12, 300,
                  {"n_first": 4, "n_last": 11})
    a = run(doc)
    b = run({**doc, "master_seed": 12345})
    ra, rb = rows(a, "blocks"), rows(b, "blocks")
    assert [r["excess_exact"] for r in ra] == [r["excess_exact"] for r in rb]
    assert [r["critical_estimate"] for r in ra] != [r["critical_estimate"] for r in rb]


def test_oracle_calibration_over_battery():
    cells = []
    for _, doc in small_battery():
        rep = run(doc)
        for tab in rep.tables.values():
            cols = tab["columns"]
            for prefix in {c[:-len("_exact")] for c in cols if c.endswith("_exact") and f"{c[:-6]}_acc_lower" in cols}:
                i_x, i_lo, i_hi = (cols.index(f"{prefix}_{s}") for s in ("exact", "acc_lower", "acc_upper"))
                cells += [(r[i_x], r[i_lo], r[i_hi]) for r in tab["rows"] if r[i_x] is not None]
    inside = sum(lo <= x <= hi for x, lo, hi in cells)
    assert len(cells) > 40
    assert inside >= 0.99 * len(cells)


def test_report_json_excludes_timing_in_body(tmp_path):
    rep = run(cfg_doc("Custom", {"kind": "constant", "p": 0.5}, 8, 10, {"event": {"type": "nonempty"}}))
    body = json.loads(rep.body_json())
    assert "timing" not in body and body["schema_version"] == 1
    assert body["config"]["trials"] == 10
    paths = rep.write(tmp_path, "both")
    assert {Path(p).name for p in paths} == {"report.json", "event.csv"}
    text = (tmp_path / "event.csv").read_text()
    assert text.startswith("event,frequency_estimate,") and "\r" not in text
    assert "timing" in json.loads((tmp_path / "report.json").read_text())
