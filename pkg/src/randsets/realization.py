"""Sampled sets ``E_X ∩ (start, N]`` and their on-disk formats.

Text format: one JSON header line, then one decimal index per line.
Binary format: the same JSON header line (with ``"encoding": "binary"``)
followed by unsigned 64-bit little-endian deltas, the first taken from 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

SCHEMA_VERSION = 1
SAMPLER_KINDS = ("naive", "skip")


@dataclass(frozen=True)
class Realization:
    indices: np.ndarray
    range_end: int
    profile_digest: str = ""
    seed: int = 0
    sampler_kind: str = "naive"
    range_start: int = 0
    profile_spec: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        idx = np.array(self.indices, dtype=np.int64).reshape(-1)
        if idx.size:
            if np.any(np.diff(idx) <= 0):
                raise ConfigError("realization indices must be strictly increasing")
            if idx[0] <= self.range_start or idx[-1] > self.range_end:
                raise ConfigError("realization indices fall outside (range_start, range_end]")
        if self.sampler_kind not in SAMPLER_KINDS:
            raise ConfigError(f"unknown sampler kind {self.sampler_kind!r}")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return int(self.indices.size)

    def __eq__(self, other):
        if not isinstance(other, Realization):
            return NotImplemented
        return (np.array_equal(self.indices, other.indices) and self.range_end == other.range_end
                and self.range_start == other.range_start and self.seed == other.seed
                and self.sampler_kind == other.sampler_kind
                and self.profile_digest == other.profile_digest)

    __hash__ = None

    @classmethod
    def from_indices(cls, indices, range_end=None, **kw) -> "Realization":
        idx = np.asarray(sorted(indices), dtype=np.int64)
        if range_end is None:
            range_end = int(idx[-1]) if idx.size else 1
        return cls(idx, range_end, **kw)

    def header(self, encoding: str = "text") -> dict:
        head = {
            "schema_version": SCHEMA_VERSION,
            "profile_digest": self.profile_digest,
            "seed": self.seed,
            "range_start": self.range_start,
            "range_end": self.range_end,
            "sampler_kind": self.sampler_kind,
            "count": len(self),
            "encoding": encoding,
        }
        if self.profile_spec is not None:
            head["profile"] = self.profile_spec
        return head

    def to_bytes(self, encoding: str = "text") -> bytes:
        head = json.dumps(self.header(encoding), sort_keys=True).encode() + b"\n"
        if encoding == "text":
            return head + b"".join(b"%d\n" % i for i in self.indices.tolist())
        if encoding == "binary":
            deltas = np.diff(self.indices, prepend=0).astype("<u8")
            return head + deltas.tobytes()
        raise ConfigError(f"unknown encoding {encoding!r}")

    def write(self, path, encoding: str = "text") -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes(encoding))

    @classmethod
    def from_bytes(cls, data: bytes) -> "Realization":
        head_line, sep, body = data.partition(b"\n")
        try:
            head = json.loads(head_line)
            encoding = head.get("encoding", "text")
            count = int(head["count"])
            if encoding == "text":
                idx = np.array([int(x) for x in body.split()], dtype=np.int64)
            elif encoding == "binary":
                if len(body) != 8 * count:
                    raise ConfigError("binary body length does not match count")
                idx = np.cumsum(np.frombuffer(body, dtype="<u8").astype(np.int64))
            else:
                raise ConfigError(f"unknown encoding {encoding!r}")
            if idx.size != count:
                raise ConfigError(f"header count {count} but {idx.size} indices")
            return cls(idx, int(head["range_end"]), profile_digest=head.get("profile_digest", ""),
                       seed=int(head.get("seed", 0)), sampler_kind=head.get("sampler_kind", "naive"),
                       range_start=int(head.get("range_start", 0)), profile_spec=head.get("profile"))
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"malformed realization file: {exc}") from exc

    @classmethod
    def read(cls, path) -> "Realization":
        try:
            with open(path, "rb") as fh:
                data = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
        return cls.from_bytes(data)
