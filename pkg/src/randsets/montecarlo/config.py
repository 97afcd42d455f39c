"""Experiment configuration documents."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from importlib import resources

import jsonschema

from ..errors import ConfigError
from ..profiles import ProbabilityProfile
from ..rng import MASK64
from ..sampler import DEFAULT_CHUNK
from .stats import Z_ACCEPT, Z_DEFAULT

SCHEMA_VERSION = 1

SUITE_NAMES = {
    "LacunaryThm1": "lacunary_thm1",
    "LimsupLemma": "limsup_lemma",
    "GapGrowthProp2": "gap_growth_prop2",
    "BoundedGapProp3": "bounded_gap_prop3",
    "APPresenceProp4": "ap_presence_prop4",
    "APAbsenceProp5": "ap_absence_prop5",
    "Custom": "custom",
}


def _schema() -> dict:
    text = resources.files("randsets").joinpath("schemas/experiment_config.schema.json").read_text()
    return json.loads(text)


@dataclass(frozen=True)
class ExperimentConfig:
    suite: str
    profile: ProbabilityProfile
    N: int
    trials: int
    master_seed: int = 0
    sampler: str = "skip"
    params: dict = field(default_factory=dict)
    z: float = Z_DEFAULT
    acceptance_z: float = Z_ACCEPT
    chunk_size: int = DEFAULT_CHUNK
    batch_size: int = 256

    def __post_init__(self):
        from .suites import SUITES

        if self.suite not in SUITES:
            raise ConfigError(f"unknown suite {self.suite!r}; choose from {sorted(SUITES)}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.N < 1:
            raise ConfigError("N must be >= 1")
        if self.sampler not in ("naive", "skip"):
            raise ConfigError(f"unknown sampler {self.sampler!r}")
        if not 0 <= self.master_seed <= MASK64:
            raise ConfigError("master_seed must be an unsigned 64-bit integer")
        if self.batch_size < 1 or self.chunk_size < 1:
            raise ConfigError("batch_size and chunk_size must be positive")
        resolved = SUITES[self.suite].resolve(self, dict(self.params))
        object.__setattr__(self, "params", resolved)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        try:
            jsonschema.validate(doc, _schema())
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"config invalid at {where}: {exc.message}") from exc
        suite = SUITE_NAMES.get(doc["suite"], doc["suite"])
        return cls(
            suite=suite,
            profile=ProbabilityProfile.from_spec(doc["profile"]),
            N=int(doc["N"]),
            trials=int(doc["trials"]),
            master_seed=int(doc.get("master_seed", 0)),
            sampler=doc.get("sampler", "skip"),
            params=copy.deepcopy(doc.get("params", {})),
            z=float(doc.get("z", Z_DEFAULT)),
            acceptance_z=float(doc.get("acceptance_z", Z_ACCEPT)),
            chunk_size=int(doc.get("chunk_size", DEFAULT_CHUNK)),
            batch_size=int(doc.get("batch_size", 256)),
        )

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        """Fully resolved config, defaults filled in."""
        return {
            "schema_version": SCHEMA_VERSION,
            "suite": self.suite,
            "profile": self.profile.to_spec(),
            "N": self.N,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "sampler": self.sampler,
            "params": copy.deepcopy(self.params),
            "z": self.z,
            "acceptance_z": self.acceptance_z,
            "chunk_size": self.chunk_size,
            "batch_size": self.batch_size,
        }
