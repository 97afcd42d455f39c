"""Probability profiles ``(p_k)`` and the functions ``f`` that shape them.

Every profile is a frozen dataclass built from a JSON-like spec.  Evaluation
is vectorised: :meth:`ProbabilityProfile.probs` takes an integer array of
indices, and the scalar helpers :func:`prob_at` / :func:`log_survival_at`
route through the same code so that scalar and array results agree bit for
bit (the skip sampler and its oracle rely on that).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor

import numpy as np

from .errors import ConfigError
from .sets import BoundedGapSet

SCHEMA_VERSION = 1

FUNCTION_KINDS = ("constant", "log_shift", "log_power", "iterated_log", "power", "table")
PROFILE_KINDS = ("admissible_power", "subexp", "power_law", "constant", "table", "masked")


def _as_float(spec, key, default=None):
    val = spec.get(key, default)
    if val is None:
        raise ConfigError(f"missing parameter {key!r} in {spec!r}")
    try:
        return float(val)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"parameter {key!r} must be a number, got {val!r}") from exc


@dataclass(frozen=True)
class AdmissibleFunction:
    """Non-decreasing ``f: [1, inf) -> [1, inf)`` of one of the enumerated kinds.

    ``constant``      f(x) = c, c >= 1
    ``log_shift``     f(x) = log(e + x)
    ``log_power``     f(x) = log(e + x) ** beta, beta > 0
    ``iterated_log``  f(x) = log(e + log(e + x))
    ``power``         f(x) = x ** beta, beta >= 0
    ``table``         f(x) = values[i] for breakpoints[i] <= x < breakpoints[i+1]

    Whether ``f`` is actually admissible (the two integral conditions) is a
    separate numerical question answered by
    :func:`randsets.convergence.check_admissibility`.
    """

    kind: str
    c: float = 1.0
    beta: float = 1.0
    breakpoints: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in FUNCTION_KINDS:
            raise ConfigError(f"unknown function kind {self.kind!r}")
        if self.kind == "constant" and not self.c >= 1:
            raise ConfigError(f"constant f must be >= 1, got {self.c}")
        if self.kind == "log_power" and not self.beta > 0:
            raise ConfigError("log_power needs beta > 0")
        if self.kind == "power" and not self.beta >= 0:
            raise ConfigError("power needs beta >= 0")
        if self.kind == "table":
            bps = tuple(float(b) for b in self.breakpoints)
            vals = tuple(float(v) for v in self.values)
            if not bps or len(bps) != len(vals):
                raise ConfigError("table needs equally long, non-empty breakpoints and values")
            if bps[0] > 1:
                raise ConfigError("first table breakpoint must be <= 1")
            if any(b <= a for a, b in zip(bps, bps[1:])):
                raise ConfigError("table breakpoints must be strictly increasing")
            if any(not v >= 1 for v in vals):
                raise ConfigError("table values must be >= 1")
            if any(b < a for a, b in zip(vals, vals[1:])):
                raise ConfigError("table values must be non-decreasing")
            object.__setattr__(self, "breakpoints", bps)
            object.__setattr__(self, "values", vals)
        grid = np.geomspace(1.0, 1e12, 97)
        self(grid)  # raises if f < 1 or decreasing anywhere on the grid

    @classmethod
    def from_spec(cls, spec) -> "AdmissibleFunction":
        if not isinstance(spec, dict) or "kind" not in spec:
            raise ConfigError(f"function spec must be an object with 'kind': {spec!r}")
        kind = spec["kind"]
        if kind == "constant":
            return cls(kind, c=_as_float(spec, "c", 1.0))
        if kind in ("log_power", "power"):
            return cls(kind, beta=_as_float(spec, "beta"))
        if kind in ("log_shift", "iterated_log"):
            return cls(kind)
        if kind == "table":
            try:
                return cls(kind, breakpoints=tuple(spec["breakpoints"]), values=tuple(spec["values"]))
            except KeyError as exc:
                raise ConfigError(f"table function needs {exc}") from exc
        raise ConfigError(f"unknown function kind {kind!r}")

    def to_spec(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "c": self.c}
        if self.kind in ("log_power", "power"):
            return {"kind": self.kind, "beta": self.beta}
        if self.kind == "table":
            return {"kind": "table", "breakpoints": list(self.breakpoints), "values": list(self.values)}
        return {"kind": self.kind}

    def breaks(self) -> tuple:
        """Points where ``f`` may be discontinuous (quadrature panel edges)."""
        return self.breakpoints if self.kind == "table" else ()

    def __call__(self, x):
        xa = np.asarray(x, dtype=np.float64)
        if self.kind == "constant":
            out = np.full(xa.shape, self.c)
        elif self.kind == "log_shift":
            out = np.log(np.e + xa)
        elif self.kind == "log_power":
            out = np.log(np.e + xa) ** self.beta
        elif self.kind == "iterated_log":
            out = np.log(np.e + np.log(np.e + xa))
        elif self.kind == "power":
            out = xa ** self.beta
        else:
            idx = np.searchsorted(np.asarray(self.breakpoints), xa, side="right") - 1
            out = np.asarray(self.values)[np.clip(idx, 0, None)]
        if np.any(out < 1):
            raise ConfigError(f"f evaluated below 1 (min {out.min():g}); not a valid admissible function")
        if out.ndim == 1 and out.size > 1 and np.all(np.diff(xa) >= 0) and np.any(np.diff(out) < 0):
            raise ConfigError("f is decreasing somewhere on the evaluated grid")
        return out if np.ndim(x) else float(out)


@dataclass(frozen=True)
class ProbabilityProfile:
    """The law of the independent Bernoulli sequence ``X_k``.

    Kinds and their parameters:

    * ``admissible_power``: ``p_k = 1 / (k f(k)**alpha)``, ``alpha`` in (0, 1]
    * ``subexp``: ``p_k = exp(-c (log k)**epsilon)`` with ``p_1 = p1`` (default 0.5)
    * ``power_law``: ``p_k = min(1, C k**-alpha)``
    * ``constant``: ``p_k = p``
    * ``table``: ``p_k = table[k-1]``, 0 past the end
    * ``masked``: ``base`` profile times the indicator of ``mask``
    """

    kind: str
    alpha: float = 1.0
    c: float = 1.0
    epsilon: float = 0.5
    C: float = 1.0
    p: float = 0.0
    p1: float = 0.5
    f: AdmissibleFunction | None = None
    table: tuple = ()
    base: "ProbabilityProfile | None" = None
    mask: BoundedGapSet | None = None
    _digest: str = field(default="", init=False, repr=False, compare=False)

    def __post_init__(self):
        k = self.kind
        if k not in PROFILE_KINDS:
            raise ConfigError(f"unknown profile kind {k!r}")
        if k == "admissible_power":
            if self.f is None:
                raise ConfigError("admissible_power needs f")
            if not 0 < self.alpha <= 1:
                raise ConfigError(f"admissible_power needs alpha in (0, 1], got {self.alpha}")
        elif k == "subexp":
            if not self.c > 0:
                raise ConfigError("subexp needs c > 0")
            if not 0 < self.epsilon < 1:
                raise ConfigError("subexp needs epsilon in (0, 1)")
            if not 0 < self.p1 <= 1:
                raise ConfigError("subexp needs p1 in (0, 1]")
        elif k == "power_law":
            if not (self.C > 0 and self.alpha > 0):
                raise ConfigError("power_law needs C > 0 and alpha > 0")
        elif k == "constant":
            if not 0 <= self.p <= 1:
                raise ConfigError(f"constant probability must lie in [0, 1], got {self.p}")
        elif k == "table":
            tab = tuple(float(v) for v in self.table)
            if any(not 0 <= v <= 1 for v in tab):
                raise ConfigError("table probabilities must lie in [0, 1]")
            object.__setattr__(self, "table", tab)
        elif k == "masked":
            if self.base is None or self.mask is None:
                raise ConfigError("masked profile needs base and mask")
        blob = json.dumps(self.to_spec(), sort_keys=True, separators=(",", ":"))
        object.__setattr__(self, "_digest", hashlib.sha256(blob.encode()).hexdigest()[:16])

    @property
    def digest(self) -> str:
        """Stable hash of the canonical spec."""
        return self._digest

    @classmethod
    def from_spec(cls, spec) -> "ProbabilityProfile":
        if not isinstance(spec, dict) or "kind" not in spec:
            raise ConfigError(f"profile spec must be an object with 'kind': {spec!r}")
        kind = spec["kind"]
        if kind == "admissible_power":
            if "f" not in spec:
                raise ConfigError("admissible_power needs 'f'")
            return cls(kind, alpha=_as_float(spec, "alpha", 1.0), f=AdmissibleFunction.from_spec(spec["f"]))
        if kind == "subexp":
            return cls(kind, c=_as_float(spec, "c"), epsilon=_as_float(spec, "epsilon"),
                       p1=_as_float(spec, "p1", 0.5))
        if kind == "power_law":
            return cls(kind, C=_as_float(spec, "C", 1.0), alpha=_as_float(spec, "alpha"))
        if kind == "constant":
            return cls(kind, p=_as_float(spec, "p"))
        if kind == "table":
            if "p" not in spec or not isinstance(spec["p"], list):
                raise ConfigError("table profile needs a list 'p'")
            return cls(kind, table=tuple(spec["p"]))
        if kind == "masked":
            if "base" not in spec or "mask" not in spec:
                raise ConfigError("masked profile needs 'base' and 'mask'")
            return cls(kind, base=cls.from_spec(spec["base"]), mask=BoundedGapSet.from_spec(spec["mask"]))
        raise ConfigError(f"unknown profile kind {kind!r}")

    def to_spec(self) -> dict:
        k = self.kind
        if k == "admissible_power":
            return {"kind": k, "alpha": self.alpha, "f": self.f.to_spec()}
        if k == "subexp":
            return {"kind": k, "c": self.c, "epsilon": self.epsilon, "p1": self.p1}
        if k == "power_law":
            return {"kind": k, "C": self.C, "alpha": self.alpha}
        if k == "constant":
            return {"kind": k, "p": self.p}
        if k == "table":
            return {"kind": k, "p": list(self.table)}
        return {"kind": k, "base": self.base.to_spec(), "mask": self.mask.to_spec()}

    def probs(self, ks) -> np.ndarray:
        """``p_k`` for an integer array of indices (all ``>= 1``)."""
        ks = np.asarray(ks, dtype=np.int64)
        if ks.size and ks.min() < 1:
            raise ConfigError("profile indices start at 1")
        x = ks.astype(np.float64)
        k = self.kind
        if k == "admissible_power":
            out = 1.0 / (x * self.f(x) ** self.alpha)
        elif k == "subexp":
            out = np.exp(-self.c * np.log(x) ** self.epsilon)
            out = np.where(ks == 1, self.p1, out)
        elif k == "power_law":
            out = np.minimum(1.0, self.C * x ** -self.alpha)
        elif k == "constant":
            out = np.full(ks.shape, self.p)
        elif k == "table":
            tab = np.asarray(self.table + (0.0,), dtype=np.float64)
            out = tab[np.minimum(ks - 1, len(self.table))]
        else:
            out = np.where(self.mask.contains(ks), self.base.probs(ks), 0.0)
        return np.clip(out, 0.0, 1.0)

    def log_survival(self, ks) -> np.ndarray:
        """``log(1 - p_k)``; ``-inf`` where ``p_k == 1``."""
        with np.errstate(divide="ignore"):
            return np.log1p(-self.probs(ks))

    def critical_count(self) -> int:
        """``floor(1/alpha)`` for admissible-power profiles."""
        if self.kind != "admissible_power":
            raise ConfigError("critical count is defined for admissible_power profiles only")
        return floor(1 / Fraction(repr(self.alpha)))


def prob_at(profile: ProbabilityProfile, k: int) -> float:
    if k < 1:
        raise ConfigError(f"index must be >= 1, got {k}")
    return float(profile.probs(np.array([k]))[0])


def log_survival_at(profile: ProbabilityProfile, k: int) -> float:
    if k < 1:
        raise ConfigError(f"index must be >= 1, got {k}")
    return float(profile.log_survival(np.array([k]))[0])


def load_profile(source) -> ProbabilityProfile:
    """Profile from a dict, a JSON string, or a path to a JSON file."""
    if isinstance(source, ProbabilityProfile):
        return source
    if isinstance(source, dict):
        return ProbabilityProfile.from_spec(source)
    text = str(source)
    if not text.lstrip().startswith("{"):
        try:
            with open(text) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read profile file {source!r}: {exc}") from exc
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"profile is not valid JSON: {exc}") from exc
    return ProbabilityProfile.from_spec(spec)
