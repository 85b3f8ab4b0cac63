"""Analytic compute cost and table-based latency for architectures.

Flops are reported in Mflops where one "flop" is one multiply-accumulate
(MAC), matching the convention compute budgets for elastic supernet spaces
are usually quoted in.  Double the numbers if you count multiplies and adds
separately.

Latency comes from an exact-match lookup table keyed by the operator
signature (stage, slot, kernel, width, c_in, output spatial size) plus a
fixed overhead term.  Missing signatures are hard errors, never estimates,
so searches stay reproducible.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Literal, Optional

from .errors import ConfigError, EvaluatorMissError
from .space import Architecture, SearchSpaceDef, input_channels

Signature = tuple[int, int, int, int, int, int]  # (stage, slot, kernel, width, c_in, hw)


def stage_spatial(space: SearchSpaceDef) -> tuple[int, ...]:
    """Output spatial size (height == width) of each stage.

    A stage's first layer applies its stride with ceil semantics; the rest
    keep the resolution.
    """
    sizes = []
    h = space.input_resolution
    for st in space.stages:
        h = -(-h // st.stride)
        sizes.append(h)
    return tuple(sizes)


def flops_macs(space: SearchSpaceDef, a: Architecture) -> int:
    """Exact MAC count: sum of k^2 * c_in * c_out * H_out * W_out."""
    spatial = stage_spatial(space)
    total = 0
    for s in range(space.n_stages):
        hw = spatial[s] * spatial[s]
        for j in range(a.depths[s]):
            k = a.kernels[s][j]
            total += k * k * input_channels(space, a, s, j) * a.widths[s][j] * hw
    return total


def flops(space: SearchSpaceDef, a: Architecture) -> float:
    """MACs in units of 10^6."""
    return flops_macs(space, a) / 1e6


def _signatures(space: SearchSpaceDef) -> list[Signature]:
    """Every operator signature any architecture in the space can produce."""
    spatial = stage_spatial(space)
    sigs: list[Signature] = []
    for s, st in enumerate(space.stages):
        for j in range(st.max_depth):
            if j > 0:
                cin_options = st.width_choices
            elif s == 0:
                cin_options = (space.stem_channels,)
            else:
                cin_options = space.stages[s - 1].width_choices
            for k in st.kernel_choices:
                for w in st.width_choices:
                    for cin in cin_options:
                        sigs.append((s, j, k, w, cin, spatial[s]))
    return sigs


@dataclass(frozen=True)
class LatencyLUT:
    """Per-operator latency table in milliseconds plus a fixed overhead."""

    overhead_ms: float
    entries: dict[Signature, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.overhead_ms < 0:
            raise ConfigError("LUT overhead must be >= 0")
        if any(ms < 0 for ms in self.entries.values()):
            raise ConfigError("LUT latencies must be >= 0")

    def lookup(self, sig: Signature) -> float:
        try:
            return self.entries[sig]
        except KeyError:
            raise EvaluatorMissError(
                "latency table has no entry for signature "
                f"(stage={sig[0]}, slot={sig[1]}, kernel={sig[2]}, width={sig[3]}, "
                f"c_in={sig[4]}, hw={sig[5]})"
            ) from None

    def validate_against(self, space: SearchSpaceDef) -> None:
        """Eagerly require every space-derivable signature; warn when the
        table is not monotone in kernel, width, or c_in."""
        missing = [sig for sig in _signatures(space) if sig not in self.entries]
        if missing:
            raise EvaluatorMissError(
                f"latency table is missing {len(missing)} signature(s); first: "
                f"{missing[0]}"
            )
        self._warn_if_not_monotone(space)

    def _warn_if_not_monotone(self, space: SearchSpaceDef) -> None:
        sigs = set(_signatures(space))
        for (s, j, k, w, cin, hw) in sigs:
            ms = self.entries[(s, j, k, w, cin, hw)]
            for axis, bumped in (
                ("kernel", (s, j, k + 2, w, cin, hw)),
                ("width", None),
                ("c_in", None),
            ):
                if axis == "kernel":
                    nxt = bumped
                elif axis == "width":
                    bigger = [x for x in space.stages[s].width_choices if x > w]
                    nxt = (s, j, k, bigger[0], cin, hw) if bigger else None
                else:
                    if j > 0:
                        pool = space.stages[s].width_choices
                    elif s > 0:
                        pool = space.stages[s - 1].width_choices
                    else:
                        pool = ()
                    bigger = [x for x in pool if x > cin]
                    nxt = (s, j, k, w, bigger[0], hw) if bigger else None
                if nxt in sigs and self.entries[nxt] < ms:
                    warnings.warn(
                        f"latency table is not monotone in {axis} at {nxt}; "
                        "cost ordering under containment is not guaranteed",
                        stacklevel=2,
                    )
                    return

    def to_json(self) -> dict:
        return {
            "overhead_ms": self.overhead_ms,
            "entries": [
                {"stage": s, "slot": j, "kernel": k, "width": w, "c_in": c, "hw": h, "ms": ms}
                for (s, j, k, w, c, h), ms in sorted(self.entries.items())
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "LatencyLUT":
        try:
            entries = {
                (e["stage"], e["slot"], e["kernel"], e["width"], e["c_in"], e["hw"]): float(e["ms"])
                for e in obj["entries"]
            }
            return cls(overhead_ms=float(obj["overhead_ms"]), entries=entries)
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed latency table: {exc}") from exc


def latency(space: SearchSpaceDef, a: Architecture, lut: LatencyLUT) -> float:
    """Overhead plus the summed per-slot table entries, in milliseconds."""
    spatial = stage_spatial(space)
    total = lut.overhead_ms
    for s in range(space.n_stages):
        for j in range(a.depths[s]):
            sig = (s, j, a.kernels[s][j], a.widths[s][j],
                   input_channels(space, a, s, j), spatial[s])
            total += lut.lookup(sig)
    return total


@dataclass(frozen=True)
class CostConstraint:
    """Hard budget C(a) < threshold on flops (Mflops) or latency (ms)."""

    kind: Literal["flops", "latency"]
    threshold: float
    lut: Optional[LatencyLUT] = None

    def __post_init__(self):
        if self.kind not in ("flops", "latency"):
            raise ConfigError(f"unknown constraint kind {self.kind!r}")
        if not math.isfinite(self.threshold) or self.threshold <= 0:
            raise ConfigError("constraint threshold must be finite and > 0")
        if (self.lut is not None) != (self.kind == "latency"):
            raise ConfigError("a latency table is required iff kind == 'latency'")

    def cost(self, space: SearchSpaceDef, a: Architecture) -> float:
        if self.kind == "flops":
            return flops(space, a)
        return latency(space, a, self.lut)

    def with_threshold(self, threshold: float) -> "CostConstraint":
        return CostConstraint(kind=self.kind, threshold=threshold, lut=self.lut)


def satisfies(space: SearchSpaceDef, a: Architecture, constraint: CostConstraint) -> bool:
    """Strict inequality: cost(a) < threshold."""
    return constraint.cost(space, a) < constraint.threshold


def parse_constraint_spec(text: str) -> tuple[str, float, Optional[str]]:
    """Parse 'flops:300' or 'latency:30@lut.json' into (kind, threshold, lut_path)."""
    try:
        kind, rest = text.split(":", 1)
    except ValueError:
        raise ConfigError(f"constraint must look like 'flops:300', got {text!r}") from None
    if kind == "flops":
        return "flops", _parse_threshold(rest), None
    if kind == "latency":
        if "@" not in rest:
            raise ConfigError("latency constraint needs a table: 'latency:30@lut.json'")
        value, path = rest.split("@", 1)
        return "latency", _parse_threshold(value), path
    raise ConfigError(f"unknown constraint kind {kind!r}")


def _parse_threshold(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"constraint threshold {text!r} is not a number") from None
    if not math.isfinite(value) or value <= 0:
        raise ConfigError("constraint threshold must be finite and > 0")
    return value


def load_lut(path: str, space: Optional[SearchSpaceDef] = None) -> LatencyLUT:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    lut = LatencyLUT.from_json(obj)
    if space is not None:
        lut.validate_against(space)
    return lut
