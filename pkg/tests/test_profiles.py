import json
import math

import numpy as np
import pytest

from randsets.errors import ConfigError
from randsets.profiles import AdmissibleFunction, ProbabilityProfile, load_profile, log_survival_at, prob_at

F_LOG = {"kind": "log_shift"}

ALL_PROFILES = [
    {"kind": "admissible_power", "alpha": 1.0, "f": F_LOG},
    {"kind": "admissible_power", "alpha": 0.5, "f": {"kind": "log_power", "beta": 2.0}},
    {"kind": "admissible_power", "alpha": 0.3, "f": {"kind": "iterated_log"}},
    {"kind": "admissible_power", "alpha": 1.0, "f": {"kind": "table", "breakpoints": [1, 10, 100],
                                                     "values": [1, 2, 5]}},
    {"kind": "subexp", "c": 0.5, "epsilon": 0.5},
    {"kind": "power_law", "C": 2.0, "alpha": 0.6},
    {"kind": "constant", "p": 0.3},
    {"kind": "table", "p": [1.0, 0.5, 0.0, 0.25]},
    {"kind": "masked", "base": {"kind": "power_law", "C": 1, "alpha": 1},
     "mask": {"kind": "ap", "start": 1, "step": 2}},
]


def P(spec):
    return ProbabilityProfile.from_spec(spec)


def test_prob_at_examples():
    assert prob_at(P({"kind": "constant", "p": 0.5}), 7) == 0.5
    assert prob_at(P({"kind": "admissible_power", "alpha": 1, "f": {"kind": "constant", "c": 1}}), 4) == 0.25
    assert prob_at(P({"kind": "power_law", "C": 1, "alpha": 0.5}), 4) == 0.5


def test_prob_at_rejects_zero():
    with pytest.raises(ConfigError):
        prob_at(P({"kind": "constant", "p": 0.5}), 0)


def test_log_survival_examples():
    assert log_survival_at(P({"kind": "constant", "p": 0.5}), 3) == pytest.approx(-0.693147, abs=1e-6)
    assert log_survival_at(P({"kind": "constant", "p": 1.0}), 1) == -math.inf
    assert log_survival_at(P({"kind": "constant", "p": 0.0}), 9) == 0.0


@pytest.mark.parametrize("spec", ALL_PROFILES, ids=lambda s: s["kind"])
def test_probabilities_in_range_and_survival_identity(spec):
    prof = P(spec)
    ks = np.unique(np.geomspace(1, 1e7, 400).astype(np.int64))
    p = prof.probs(ks)
    assert np.all((p >= 0) & (p <= 1))
    ell = prof.log_survival(ks)
    ok = p < 1
    assert np.allclose(np.exp(ell[ok]) + p[ok], 1.0, atol=1e-12, rtol=0)
    assert np.all(np.isneginf(ell[~ok]))


@pytest.mark.parametrize("spec", ALL_PROFILES, ids=lambda s: s["kind"])
def test_spec_round_trip_and_digest(spec):
    prof = P(spec)
    again = P(json.loads(json.dumps(prof.to_spec())))
    assert again == prof and again.digest == prof.digest
    ks = np.arange(1, 500)
    assert np.array_equal(again.probs(ks), prof.probs(ks))


def test_digest_changes_with_parameters():
    assert P({"kind": "constant", "p": 0.3}).digest != P({"kind": "constant", "p": 0.31}).digest


@pytest.mark.parametrize("f", [F_LOG, {"kind": "log_power", "beta": 1.5}, {"kind": "iterated_log"},
                               {"kind": "constant", "c": 3}])
@pytest.mark.parametrize("alpha", [0.25, 0.5, 1.0])
def test_admissible_power_is_non_increasing(f, alpha):
    prof = P({"kind": "admissible_power", "alpha": alpha, "f": f})
    p = prof.probs(np.arange(1, 200_001))
    assert np.all(np.diff(p) <= 0)


def test_subexp_first_index_clamped():
    prof = P({"kind": "subexp", "c": 0.5, "epsilon": 0.5})
    assert prob_at(prof, 1) == 0.5
    assert prob_at(P({"kind": "subexp", "c": 0.5, "epsilon": 0.5, "p1": 0.9}), 1) == 0.9
    assert prob_at(prof, 100) == pytest.approx(math.exp(-0.5 * math.sqrt(math.log(100))))


def test_table_is_zero_past_end():
    prof = P({"kind": "table", "p": [0.1, 0.2]})
    assert prof.probs(np.array([1, 2, 3, 1000])).tolist() == [0.1, 0.2, 0.0, 0.0]


def test_masked_profile_zero_off_mask():
    prof = P(ALL_PROFILES[-1])
    assert prof.probs(np.arange(1, 7)).tolist() == [1.0, 0.0, 1 / 3, 0.0, 0.2, 0.0]


def test_power_law_clipped_at_one():
    assert prob_at(P({"kind": "power_law", "C": 5, "alpha": 1}), 2) == 1.0


@pytest.mark.parametrize("spec", [
    {"kind": "constant", "p": 1.5},
    {"kind": "admissible_power", "alpha": 1.5, "f": F_LOG},
    {"kind": "admissible_power", "alpha": 0.0, "f": F_LOG},
    {"kind": "admissible_power", "alpha": 0.5},
    {"kind": "subexp", "c": -1, "epsilon": 0.5},
    {"kind": "subexp", "c": 1, "epsilon": 1.0},
    {"kind": "power_law", "C": 0, "alpha": 1},
    {"kind": "table", "p": [0.5, 2]},
    {"kind": "nonsense"},
    {"kind": "masked", "base": {"kind": "constant", "p": 0.5}},
])
def test_invalid_profiles_rejected(spec):
    with pytest.raises(ConfigError):
        P(spec)


@pytest.mark.parametrize("spec", [
    {"kind": "constant", "c": 0.5},
    {"kind": "table", "breakpoints": [1, 10], "values": [1, 0.5]},
    {"kind": "table", "breakpoints": [1, 10], "values": [3, 2]},
    {"kind": "table", "breakpoints": [10, 1], "values": [1, 2]},
    {"kind": "log_power", "beta": 0},
    {"kind": "wavy"},
])
def test_invalid_functions_rejected(spec):
    with pytest.raises(ConfigError):
        AdmissibleFunction.from_spec(spec)


def test_function_values():
    x = np.array([1.0, 10.0, 1e6])
    assert np.allclose(AdmissibleFunction.from_spec(F_LOG)(x), np.log(math.e + x))
    assert np.allclose(AdmissibleFunction.from_spec({"kind": "log_power", "beta": 2})(x), np.log(math.e + x) ** 2)
    assert np.allclose(AdmissibleFunction.from_spec({"kind": "iterated_log"})(x),
                       np.log(math.e + np.log(math.e + x)))
    tab = AdmissibleFunction.from_spec({"kind": "table", "breakpoints": [1, 10], "values": [1, 4]})
    assert tab(np.array([1.0, 9.99, 10.0, 1e9])).tolist() == [1, 1, 4, 4]


def test_critical_count():
    f = F_LOG
    assert P({"kind": "admissible_power", "alpha": 1, "f": f}).critical_count() == 1
    assert P({"kind": "admissible_power", "alpha": 0.5, "f": f}).critical_count() == 2
    assert P({"kind": "admissible_power", "alpha": 0.4, "f": f}).critical_count() == 2
    assert P({"kind": "admissible_power", "alpha": 0.1, "f": f}).critical_count() == 10


def test_load_profile_sources(tmp_path):
    spec = {"kind": "constant", "p": 0.25}
    path = tmp_path / "p.json"
    path.write_text(json.dumps(spec))
    assert load_profile(spec) == load_profile(json.dumps(spec)) == load_profile(str(path))
    with pytest.raises(ConfigError):
        load_profile(str(tmp_path / "missing.json"))
