"""Architecture evaluators: a deterministic synthetic supernet and a
file-backed prediction table.

The synthetic model assigns each dataset sample a difficulty d_i in [0, 1)
and scores an architecture by a per-sample margin

    margin_i(a) = capacity_gain * cap(a) - d_i
                  + noise_scale * S_i(a) / sqrt(|units(a)|)

where `units(a)` is the architecture's weight-unit set (one unit per
kernel ring x input-channel block x output-channel block of each active
slot), S_i(a) is the sum of that unit set's per-sample deviates, and cap(a)
is the block-quantized weight volume of `a` divided by the space maximum.
A sample is correct iff its margin is positive.

Because every term is a pure function of (model fields, unit set), two
architectures owning identical unit sets receive identical bitmaps, and
architectures sharing many units receive positively correlated ones -- the
mechanism by which heavier weight sharing yields fewer negative flips here.

Determinism guarantees: per-unit deviates are uniform over
[-2^31, 2^31) / 2^31 * sqrt(3) (zero mean, unit variance) drawn from the
documented counter hash, and they are accumulated in exact int64 arithmetic
before any float conversion, so results are bit-identical under any
evaluation order, batching, or thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DataMismatchError, EvaluatorMissError
from .hashing import derive, derive_array, mix64, u01_array
from .metrics import CorrectnessVector
from .space import Architecture, SearchSpaceDef, digest, input_channels

_SQRT3 = math.sqrt(3.0)
_INV31 = 2.0**-31


def _rings(kernel: int) -> int:
    """Ring r covers kernel size 2r+1, so a kxk kernel owns (k+1)/2 rings."""
    return (kernel + 1) // 2


def _blocks(channels: int, block: int) -> int:
    return -(-channels // block)


@dataclass(frozen=True)
class SyntheticSupernetModel:
    """Seeded generative model mapping (architecture, sample) -> correctness."""

    space: SearchSpaceDef
    seed: int
    n_samples: int = 10_000
    capacity_gain: float = 1.0
    noise_scale: float = 0.3
    channel_block: int = 8
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.capacity_gain < 0 or self.noise_scale < 0:
            raise ValueError("capacity_gain and noise_scale must be >= 0")
        if self.channel_block < 1:
            raise ValueError("channel_block must be >= 1")

    # -- weight units --------------------------------------------------------

    def _slot_cin_max(self, s: int, j: int) -> int:
        if j > 0:
            return self.space.stages[s].width_choices[-1]
        if s == 0:
            return self.space.stem_channels
        return self.space.stages[s - 1].width_choices[-1]

    def slot_unit_dims(self, s: int, j: int, kernel: int, width: int, c_in: int) -> tuple[int, int, int]:
        return _rings(kernel), _blocks(c_in, self.channel_block), _blocks(width, self.channel_block)

    def unit_count(self, a: Architecture) -> int:
        total = 0
        for s in range(self.space.n_stages):
            for j in range(a.depths[s]):
                r, bi, bo = self.slot_unit_dims(
                    s, j, a.kernels[s][j], a.widths[s][j], input_channels(self.space, a, s, j)
                )
                total += r * bi * bo
        return total

    def unit_ids(self, a: Architecture) -> list[tuple[int, int, int, int, int]]:
        """Enumerated unit coordinates (stage, slot, ring, in_block, out_block)."""
        ids = []
        for s in range(self.space.n_stages):
            for j in range(a.depths[s]):
                r, bi, bo = self.slot_unit_dims(
                    s, j, a.kernels[s][j], a.widths[s][j], input_channels(self.space, a, s, j)
                )
                for ring in range(r):
                    for ib in range(bi):
                        for ob in range(bo):
                            ids.append((s, j, ring, ib, ob))
        return ids

    def quantized_volume(self, a: Architecture) -> int:
        """Weight volume with channels rounded up to whole blocks.

        A pure function of the unit set; equals weight_count exactly when the
        stem and all width choices are multiples of the block size.
        """
        b = self.channel_block
        total = 0
        for s in range(self.space.n_stages):
            for j in range(a.depths[s]):
                k = a.kernels[s][j]
                cin = input_channels(self.space, a, s, j)
                total += k * k * (_blocks(cin, b) * b) * (_blocks(a.widths[s][j], b) * b)
        return total

    def capacity(self, a: Architecture) -> float:
        key = "cap_max"
        if key not in self._cache:
            self._cache[key] = self.quantized_volume(self.space.max_architecture())
        return self.quantized_volume(a) / self._cache[key]

    # -- seeded sample quantities ---------------------------------------------

    def difficulties(self) -> np.ndarray:
        if "difficulty" not in self._cache:
            key = derive(mix64(self.seed), "difficulty")
            self._cache["difficulty"] = u01_array(derive_array(key, self.n_samples))
        return self._cache["difficulty"]

    def _slot_noise(self, s: int, j: int, kernel: int, width: int, c_in: int) -> np.ndarray:
        """int64 per-sample sum of unit deviates for one slot configuration.

        Unit (s, j, ring, ib, ob) owns the deviate stream
        derive(mix64(seed), "unit-noise", s, j, ring, ib, ob); sample i takes
        (stream[i] >> 32) - 2^31.
        """
        cfg = (s, j, kernel, width, c_in)
        cached = self._cache.get(cfg)
        if cached is not None:
            return cached
        r, bi, bo = self.slot_unit_dims(s, j, kernel, width, c_in)
        acc = np.zeros(self.n_samples, dtype=np.int64)
        base = mix64(self.seed)
        for ring in range(r):
            for ib in range(bi):
                for ob in range(bo):
                    key = derive(base, "unit-noise", s, j, ring, ib, ob)
                    acc += (derive_array(key, self.n_samples) >> np.uint64(32)).astype(np.int64) - 2**31
        self._cache[cfg] = acc
        return acc

    def _noise_sum(self, a: Architecture) -> np.ndarray:
        acc = np.zeros(self.n_samples, dtype=np.int64)
        for s in range(self.space.n_stages):
            for j in range(a.depths[s]):
                acc = acc + self._slot_noise(
                    s, j, a.kernels[s][j], a.widths[s][j], input_channels(self.space, a, s, j)
                )
        return acc

    # -- evaluation -----------------------------------------------------------

    def margins(self, a: Architecture) -> np.ndarray:
        cap = self.capacity(a)
        units = self.unit_count(a)
        noise = self._noise_sum(a).astype(np.float64) * (_SQRT3 * _INV31) / math.sqrt(units)
        return self.capacity_gain * cap - self.difficulties() + self.noise_scale * noise

    def margin(self, a: Architecture, i: int) -> float:
        if not 0 <= i < self.n_samples:
            raise IndexError(f"sample index {i} out of range [0, {self.n_samples})")
        return float(self.margins(a)[i])

    def evaluate(self, a: Architecture) -> CorrectnessVector:
        return CorrectnessVector(self.margins(a) > 0.0)

    def evaluate_many(self, archs: Sequence[Architecture]) -> list[CorrectnessVector]:
        return [self.evaluate(a) for a in archs]

    def params_json(self) -> dict:
        return {
            "kind": "synthetic",
            "seed": self.seed,
            "n_samples": self.n_samples,
            "capacity_gain": self.capacity_gain,
            "noise_scale": self.noise_scale,
            "channel_block": self.channel_block,
        }


@dataclass
class PredictionTable:
    """Digest-keyed correctness vectors produced by an external trainer."""

    n_samples: int
    vectors: dict[str, CorrectnessVector] = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def add(self, key: str, vec: CorrectnessVector) -> None:
        if vec.n != self.n_samples:
            raise DataMismatchError(
                f"vector for {key} has {vec.n} samples, table holds {self.n_samples}"
            )
        if key in self.vectors:
            raise DataMismatchError(f"duplicate digest {key} in prediction table")
        self.vectors[key] = vec

    @classmethod
    def from_entries(cls, n: int, entries: Iterable[tuple[str, CorrectnessVector]],
                     provenance: Optional[dict] = None) -> "PredictionTable":
        table = cls(n_samples=n, provenance=provenance or {})
        for key, vec in entries:
            table.add(key, vec)
        return table

    def lookup(self, key: str) -> CorrectnessVector:
        try:
            return self.vectors[key]
        except KeyError:
            raise EvaluatorMissError(f"prediction table has no entry for digest {key}") from None

    def evaluate(self, a: Architecture) -> CorrectnessVector:
        return self.lookup(digest(a))

    def evaluate_many(self, archs: Sequence[Architecture]) -> list[CorrectnessVector]:
        return [self.evaluate(a) for a in archs]


def table_evaluate(table: PredictionTable, a: Architecture) -> CorrectnessVector:
    return table.evaluate(a)
