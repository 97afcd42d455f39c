"""Bounded-gap subsets of the positive integers."""

from __future__ import annotations

from dataclasses import dataclass
from math import lcm

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class BoundedGapSet:
    """A set ``S`` of positive integers with finite ``Gap(S)``.

    ``kind`` is one of ``"ap"`` (``start + j*step``), ``"explicit"`` (a finite
    sorted list, used for tests and hand-made examples) or ``"union"`` (a union
    of arithmetic progressions given as ``((start, step), ...)``).
    """

    kind: str
    start: int = 1
    step: int = 1
    values: tuple = ()
    aps: tuple = ()

    def __post_init__(self):
        if self.kind == "ap":
            if self.start < 1 or self.step < 1:
                raise ConfigError("arithmetic progression needs start >= 1 and step >= 1")
        elif self.kind == "explicit":
            vals = tuple(int(v) for v in self.values)
            if any(v < 1 for v in vals) or any(b <= a for a, b in zip(vals, vals[1:])):
                raise ConfigError("explicit set must be strictly increasing positive integers")
            object.__setattr__(self, "values", vals)
        elif self.kind == "union":
            aps = tuple((int(s), int(d)) for s, d in self.aps)
            if not aps or any(s < 1 or d < 1 for s, d in aps):
                raise ConfigError("union needs at least one (start >= 1, step >= 1) pair")
            object.__setattr__(self, "aps", aps)
        else:
            raise ConfigError(f"unknown bounded-gap set kind {self.kind!r}")

    @classmethod
    def evens(cls) -> "BoundedGapSet":
        return cls("ap", start=2, step=2)

    @classmethod
    def from_spec(cls, spec: dict) -> "BoundedGapSet":
        if not isinstance(spec, dict) or "kind" not in spec:
            raise ConfigError(f"bounded-gap set spec must be an object with 'kind': {spec!r}")
        kind = spec["kind"]
        try:
            if kind == "ap":
                return cls("ap", start=int(spec.get("start", 1)), step=int(spec["step"]))
            if kind == "explicit":
                return cls("explicit", values=tuple(spec["values"]))
            if kind == "union":
                return cls("union", aps=tuple(tuple(p) for p in spec["aps"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad bounded-gap set spec {spec!r}: {exc}") from exc
        raise ConfigError(f"unknown bounded-gap set kind {kind!r}")

    def to_spec(self) -> dict:
        if self.kind == "ap":
            return {"kind": "ap", "start": self.start, "step": self.step}
        if self.kind == "explicit":
            return {"kind": "explicit", "values": list(self.values)}
        return {"kind": "union", "aps": [list(p) for p in self.aps]}

    def contains(self, ks) -> np.ndarray:
        ks = np.asarray(ks, dtype=np.int64)
        if self.kind == "ap":
            return (ks >= self.start) & ((ks - self.start) % self.step == 0)
        if self.kind == "explicit":
            vals = np.asarray(self.values, dtype=np.int64)
            return np.isin(ks, vals)
        out = np.zeros(ks.shape, dtype=bool)
        for s, d in self.aps:
            out |= (ks >= s) & ((ks - s) % d == 0)
        return out

    def materialize(self, upto: int, lo: int = 0) -> np.ndarray:
        """Sorted elements of ``S`` in ``(lo, upto]``."""
        if self.kind == "ap":
            first = self.start
            if lo >= first:
                first += ((lo - first) // self.step + 1) * self.step
            return np.arange(first, upto + 1, self.step, dtype=np.int64)
        if self.kind == "explicit":
            vals = np.asarray(self.values, dtype=np.int64)
            return vals[(vals > lo) & (vals <= upto)]
        parts = [BoundedGapSet("ap", start=s, step=d).materialize(upto, lo) for s, d in self.aps]
        return np.unique(np.concatenate(parts))

    def gap_bound(self, upto: int | None = None) -> int:
        """Largest successive difference; over ``[1, upto]`` for finite kinds."""
        if self.kind == "ap":
            return self.step
        if self.kind == "union" and upto is None:
            period = lcm(*(d for _, d in self.aps))
            upto = max(s for s, _ in self.aps) + 2 * period
        elems = self.materialize(upto if upto is not None else max(self.values, default=0))
        if len(elems) < 2:
            return 0
        return int(np.diff(elems).max())
