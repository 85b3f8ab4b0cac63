"""Flip metrics over per-sample correctness bitmaps.

A correctness vector records, for one model on a fixed evaluation set,
whether each sample was predicted correctly.  Negative flip rate (NFR)
between a pair is the fraction of samples the first model gets right and the
second gets wrong; it is directional.  All metric arithmetic happens in
exact integer counts and divides once at the end, so the accounting identity

    top1(target) - top1(ref) == pfr(ref, target) - nfr(ref, target)

holds exactly at the count level.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ConfigError, DataMismatchError

_MAGIC = b"CORRVEC1"


@dataclass(frozen=True, eq=False)
class CorrectnessVector:
    """Immutable per-sample correctness bitmap."""

    bits: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.bits, dtype=bool).copy()
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("correctness vector must be a non-empty 1-d bitmap")
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)

    @property
    def n(self) -> int:
        return int(self.bits.size)

    @property
    def num_correct(self) -> int:
        return int(np.count_nonzero(self.bits))

    def same_as(self, other: "CorrectnessVector") -> bool:
        return self.n == other.n and bool(np.array_equal(self.bits, other.bits))

    def packed(self) -> bytes:
        return np.packbits(self.bits, bitorder="little").tobytes()

    @classmethod
    def from_packed(cls, data: bytes, n: int) -> "CorrectnessVector":
        bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), count=n, bitorder="little")
        return cls(bits.astype(bool))


def _check_lengths(ref: CorrectnessVector, target: CorrectnessVector) -> None:
    if ref.n != target.n:
        raise DataMismatchError(f"vector lengths differ: {ref.n} vs {target.n}")


def top1(v: CorrectnessVector) -> float:
    return v.num_correct / v.n


def negative_flip_count(ref: CorrectnessVector, target: CorrectnessVector) -> int:
    _check_lengths(ref, target)
    return int(np.count_nonzero(ref.bits & ~target.bits))


def positive_flip_count(ref: CorrectnessVector, target: CorrectnessVector) -> int:
    _check_lengths(ref, target)
    return int(np.count_nonzero(~ref.bits & target.bits))


def nfr(ref: CorrectnessVector, target: CorrectnessVector) -> float:
    """Fraction of samples `ref` predicts correctly and `target` does not."""
    return negative_flip_count(ref, target) / ref.n


def pfr(ref: CorrectnessVector, target: CorrectnessVector) -> float:
    """Dual of nfr: fraction `target` newly gets right."""
    return positive_flip_count(ref, target) / ref.n


def pair_nfr(a: CorrectnessVector, b: CorrectnessVector) -> float:
    """Directional NFR of an unordered pair.

    The lower-Top-1 model plays the role of the baseline; on an exact tie the
    first argument does.
    """
    _check_lengths(a, b)
    if a.num_correct <= b.num_correct:
        return nfr(a, b)
    return nfr(b, a)


@dataclass(frozen=True)
class RewardConfig:
    """Scalarized search reward: acc_weight * Top-1 - nfr_weight * NFR."""

    acc_weight: float
    nfr_weight: float

    def __post_init__(self):
        if self.acc_weight < 0 or self.nfr_weight < 0:
            raise ConfigError("reward weights must be >= 0")
        if self.acc_weight == 0 and self.nfr_weight == 0:
            raise ConfigError("reward weights must not both be 0")

    PRESETS = {"r0": (1.0, 0.0), "r1": (0.0, 1.0), "r2": (1.0, 1.0)}

    @classmethod
    def preset(cls, name: str) -> "RewardConfig":
        try:
            acc, nf = cls.PRESETS[name.lower()]
        except KeyError:
            raise ConfigError(f"unknown reward preset {name!r}") from None
        return cls(acc, nf)

    @classmethod
    def parse(cls, text: str) -> "RewardConfig":
        """Accept a preset name ('r0'|'r1'|'r2') or 'acc_weight,nfr_weight'."""
        if text.lower() in cls.PRESETS:
            return cls.preset(text)
        parts = text.split(",")
        if len(parts) != 2:
            raise ConfigError(f"reward must be r0|r1|r2 or 'w1,w2', got {text!r}")
        try:
            return cls(float(parts[0]), float(parts[1]))
        except ValueError:
            raise ConfigError(f"reward weights {text!r} are not numbers") from None

    def name(self) -> str:
        for name, weights in self.PRESETS.items():
            if (self.acc_weight, self.nfr_weight) == weights:
                return name
        return f"{self.acc_weight!r},{self.nfr_weight!r}"


def reward(top1_value: float, nfr_value: float, cfg: RewardConfig) -> float:
    return cfg.acc_weight * top1_value - cfg.nfr_weight * nfr_value


@dataclass(frozen=True)
class NfrMatrix:
    """Pairwise directional NFRs (lower-Top-1 convention) with Top-1 diagonal."""

    labels: tuple[str, ...]
    top1s: tuple[float, ...]
    values: np.ndarray  # symmetric; [i][i] == top1s[i]

    def to_csv_rows(self) -> list[list[str]]:
        rows = [["model"] + list(self.labels)]
        for i, label in enumerate(self.labels):
            rows.append([label] + [repr(float(v)) for v in self.values[i]])
        return rows


def nfr_matrix(models: Sequence[CorrectnessVector], labels: Optional[Sequence[str]] = None) -> NfrMatrix:
    if len(models) < 2:
        raise DataMismatchError("an NFR matrix needs at least two models")
    n = models[0].n
    for m in models[1:]:
        if m.n != n:
            raise DataMismatchError(f"vector lengths differ: {n} vs {m.n}")
    if labels is None:
        labels = tuple(f"m{i}" for i in range(len(models)))
    values = np.zeros((len(models), len(models)), dtype=float)
    for i, m in enumerate(models):
        values[i, i] = top1(m)
    for i in range(len(models)):
        for j in range(i + 1, len(models)):
            v = pair_nfr(models[i], models[j])
            values[i, j] = v
            values[j, i] = v
    return NfrMatrix(labels=tuple(labels), top1s=tuple(top1(m) for m in models), values=values)


def relative_change(m1: float, m2: float) -> float:
    """(m1 - m2) / m2; the sign reads as m1's change relative to m2."""
    if m2 == 0:
        raise ZeroDivisionError("relative change is undefined for a zero baseline")
    return (m1 - m2) / m2


# ---------------------------------------------------------------------------
# Prediction/correctness files
# ---------------------------------------------------------------------------
#
# Binary layout (little-endian):
#   magic   8 bytes  b"CORRVEC1"
#   n       uint32   samples per model
#   count   uint32   number of models
#   per model:
#     key_len uint16
#     key     key_len bytes, UTF-8
#     bitmap  ceil(n / 8) bytes, LSB-first
#
# The CSV alternative holds one model: a "sample_id,correct" header, rows
# ordered 0..n-1, and an optional leading "# key=<label>" comment.


def write_prediction_file(path: str | Path, n: int, entries: Iterable[tuple[str, CorrectnessVector]]) -> None:
    entries = list(entries)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", n, len(entries)))
        for key, vec in entries:
            if vec.n != n:
                raise DataMismatchError(f"model {key!r} has {vec.n} samples, expected {n}")
            raw = key.encode()
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            fh.write(vec.packed())


def read_prediction_file(path: str | Path) -> tuple[int, list[tuple[str, CorrectnessVector]]]:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:8] != _MAGIC:
        raise ConfigError(f"{path}: not a correctness file (bad magic)")
    n, count = struct.unpack_from("<II", data, 8)
    if n == 0:
        raise ConfigError(f"{path}: dataset size must be positive")
    pos = 16
    nbytes = (n + 7) // 8
    entries: list[tuple[str, CorrectnessVector]] = []
    for _ in range(count):
        (key_len,) = struct.unpack_from("<H", data, pos)
        pos += 2
        key = data[pos : pos + key_len].decode()
        pos += key_len
        vec = CorrectnessVector.from_packed(data[pos : pos + nbytes], n)
        pos += nbytes
        entries.append((key, vec))
    return n, entries


def read_correctness_csv(path: str | Path) -> tuple[str, CorrectnessVector]:
    """Load one model's 'sample_id,correct' rows; key from '# key=' or the stem."""
    key = Path(path).stem
    rows: list[tuple[int, int]] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if body.startswith("key="):
                    key = body[4:]
                continue
            first, second = line.split(",", 1)
            if first == "sample_id":
                continue
            rows.append((int(first), int(second)))
    if not rows:
        raise ConfigError(f"{path}: no correctness rows found")
    rows.sort()
    ids = [i for i, _ in rows]
    if ids != list(range(len(rows))):
        raise ConfigError(f"{path}: sample ids must cover 0..n-1 exactly")
    if any(c not in (0, 1) for _, c in rows):
        raise ConfigError(f"{path}: correct column must be 0 or 1")
    return key, CorrectnessVector(np.array([c for _, c in rows], dtype=bool))


def load_predictions(path: str | Path) -> tuple[int, list[tuple[str, CorrectnessVector]]]:
    """Sniff binary vs CSV correctness files by magic."""
    with open(path, "rb") as fh:
        head = fh.read(8)
    if head == _MAGIC:
        return read_prediction_file(path)
    key, vec = read_correctness_csv(path)
    return vec.n, [(key, vec)]
