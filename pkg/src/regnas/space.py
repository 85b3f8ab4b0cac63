"""Elastic architecture space and the weight-containment partial order.

An architecture picks a depth for every stage plus a (kernel, width) pair for
every active layer slot.  Weights nest the OFA way: smaller kernels live in
the center of larger ones, narrower channel counts are the leading slice of
wider ones, and shallower stages are the leading layers of deeper ones.

Under that convention `contains(ref, target)` is exact weight-set inclusion:

  * every stage of `target` is at least as deep as in `ref`;
  * on every slot active in `ref`, target kernel >= ref kernel and
    target width >= ref width;
  * for every stage that feeds a next stage, target's stage output width
    (width of its last active slot) >= ref's.

The last clause matters when `target` deepens a stage: the appended layer
becomes the stage output and must not narrow the next stage's input slice
below what `ref` consumed there.  Constrained operators enforce it by
truncating the trailing slot's width choices, so closure holds by
construction in both directions ("grow": result contains ref; "shrink":
result is contained by ref).
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from typing import Iterator, Literal, Optional, Sequence

from .errors import SpaceMismatchError, SpaceTooLargeError
from .hashing import SplitRng

SATURATION_LIMIT = 2**63 - 1

Direction = Literal["grow", "shrink"]


@dataclass(frozen=True)
class StageDef:
    """Per-stage choice lists; all lists strictly ascending, kernels odd."""

    depth_choices: tuple[int, ...]
    kernel_choices: tuple[int, ...]
    width_choices: tuple[int, ...]
    stride: int = 1
    max_depth: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "depth_choices", tuple(self.depth_choices))
        object.__setattr__(self, "kernel_choices", tuple(self.kernel_choices))
        object.__setattr__(self, "width_choices", tuple(self.width_choices))
        if self.max_depth is None and self.depth_choices:
            object.__setattr__(self, "max_depth", max(self.depth_choices))


@dataclass(frozen=True)
class SearchSpaceDef:
    stages: tuple[StageDef, ...]
    input_resolution: int
    stem_channels: int
    num_classes: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))

    @property
    def n_stages(self) -> int:
        return len(self.stages)

    def encoding_length(self) -> int:
        return sum(1 + 2 * st.max_depth for st in self.stages)

    def max_architecture(self) -> "Architecture":
        return Architecture(
            depths=tuple(st.max_depth for st in self.stages),
            kernels=tuple((st.kernel_choices[-1],) * st.max_depth for st in self.stages),
            widths=tuple((st.width_choices[-1],) * st.max_depth for st in self.stages),
        )

    def min_architecture(self) -> "Architecture":
        return Architecture(
            depths=tuple(st.depth_choices[0] for st in self.stages),
            kernels=tuple((st.kernel_choices[0],) * st.depth_choices[0] for st in self.stages),
            widths=tuple((st.width_choices[0],) * st.depth_choices[0] for st in self.stages),
        )

    def to_json(self) -> dict:
        return {
            "input_resolution": self.input_resolution,
            "stem_channels": self.stem_channels,
            "num_classes": self.num_classes,
            "stages": [
                {
                    "depth_choices": list(st.depth_choices),
                    "kernel_choices": list(st.kernel_choices),
                    "width_choices": list(st.width_choices),
                    "stride": st.stride,
                    "max_depth": st.max_depth,
                }
                for st in self.stages
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SearchSpaceDef":
        stages = tuple(
            StageDef(
                depth_choices=tuple(s["depth_choices"]),
                kernel_choices=tuple(s["kernel_choices"]),
                width_choices=tuple(s["width_choices"]),
                stride=s.get("stride", 1),
                max_depth=s.get("max_depth"),
            )
            for s in obj["stages"]
        )
        return cls(
            stages=stages,
            input_resolution=obj["input_resolution"],
            stem_channels=obj["stem_channels"],
            num_classes=obj.get("num_classes", 1000),
        )


@dataclass(frozen=True)
class Architecture:
    """Immutable genotype: per-stage depth plus per-active-slot kernel/width."""

    depths: tuple[int, ...]
    kernels: tuple[tuple[int, ...], ...]
    widths: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "depths", tuple(self.depths))
        object.__setattr__(self, "kernels", tuple(tuple(k) for k in self.kernels))
        object.__setattr__(self, "widths", tuple(tuple(w) for w in self.widths))


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[str, ...]
    size: int = 0
    saturated: bool = False

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "violations": list(self.violations),
            "size": self.size,
            "saturated": self.saturated,
        }


# ---------------------------------------------------------------------------
# Validation and size accounting
# ---------------------------------------------------------------------------

def _ascending(seq: Sequence[int]) -> bool:
    return all(a < b for a, b in zip(seq, seq[1:]))


def space_size(space: SearchSpaceDef) -> int:
    """Exact number of architectures (arbitrary-precision)."""
    total = 1
    for st in space.stages:
        per_layer = len(st.kernel_choices) * len(st.width_choices)
        total *= sum(per_layer**d for d in st.depth_choices)
    return total


def validate_space(space: SearchSpaceDef) -> ValidationReport:
    """Check every structural invariant; failures are reported, not raised."""
    violations: list[str] = []
    if not space.stages:
        violations.append("space must define at least one stage")
    if space.input_resolution < 1:
        violations.append("input_resolution must be >= 1")
    if space.stem_channels < 1:
        violations.append("stem_channels must be >= 1")
    for i, st in enumerate(space.stages):
        tag = f"stage {i}"
        for name, choices in (
            ("depth_choices", st.depth_choices),
            ("kernel_choices", st.kernel_choices),
            ("width_choices", st.width_choices),
        ):
            if not choices:
                violations.append(f"{tag}: {name} must be non-empty")
            elif not _ascending(choices):
                violations.append(f"{tag}: {name} must be strictly ascending")
        if any(k % 2 == 0 or k < 1 for k in st.kernel_choices):
            violations.append(f"{tag}: kernel must be odd")
        if any(w < 1 for w in st.width_choices):
            violations.append(f"{tag}: widths must be >= 1")
        if st.depth_choices:
            if any(d < 1 or d > st.max_depth for d in st.depth_choices):
                violations.append(f"{tag}: depth_choices must lie in 1..max_depth")
            if max(st.depth_choices) != st.max_depth:
                violations.append(f"{tag}: max(depth_choices) must equal max_depth")
        if st.stride < 1:
            violations.append(f"{tag}: stride must be >= 1")
    if not violations:
        h = space.input_resolution
        for st in space.stages:
            h = -(-h // st.stride)
        if h < 1:
            violations.append("input_resolution too small for the stage strides")
    if violations:
        return ValidationReport(ok=False, violations=tuple(violations))
    size = space_size(space)
    saturated = size > SATURATION_LIMIT
    return ValidationReport(
        ok=True,
        violations=(),
        size=min(size, SATURATION_LIMIT),
        saturated=saturated,
    )


def arch_in_space(space: SearchSpaceDef, a: Architecture) -> bool:
    if len(a.depths) != space.n_stages:
        return False
    if len(a.kernels) != space.n_stages or len(a.widths) != space.n_stages:
        return False
    for st, d, ks, ws in zip(space.stages, a.depths, a.kernels, a.widths):
        if d not in st.depth_choices or len(ks) != d or len(ws) != d:
            return False
        if any(k not in st.kernel_choices for k in ks):
            return False
        if any(w not in st.width_choices for w in ws):
            return False
    return True


def _require_member(space: SearchSpaceDef, a: Architecture, role: str) -> None:
    if not arch_in_space(space, a):
        raise SpaceMismatchError(f"{role} architecture does not belong to this space")


# ---------------------------------------------------------------------------
# Canonical encoding
# ---------------------------------------------------------------------------

def encode(space: SearchSpaceDef, a: Architecture) -> tuple[int, ...]:
    """Fixed-length integer vector; inactive slots carry sentinel 0."""
    _require_member(space, a, "encoded")
    out: list[int] = []
    for st, d, ks, ws in zip(space.stages, a.depths, a.kernels, a.widths):
        out.append(d)
        for j in range(st.max_depth):
            if j < d:
                out.extend((ks[j], ws[j]))
            else:
                out.extend((0, 0))
    return tuple(out)


def decode(space: SearchSpaceDef, vec: Sequence[int]) -> Architecture:
    vec = tuple(int(v) for v in vec)
    if len(vec) != space.encoding_length():
        raise ValueError(
            f"encoding length {len(vec)} != expected {space.encoding_length()}"
        )
    depths: list[int] = []
    kernels: list[tuple[int, ...]] = []
    widths: list[tuple[int, ...]] = []
    pos = 0
    for st in space.stages:
        d = vec[pos]
        pos += 1
        if d not in st.depth_choices:
            raise ValueError(f"depth {d} not in choices {st.depth_choices}")
        ks: list[int] = []
        ws: list[int] = []
        for j in range(st.max_depth):
            k, w = vec[pos], vec[pos + 1]
            pos += 2
            if j < d:
                if k not in st.kernel_choices:
                    raise ValueError(f"kernel {k} not in choices {st.kernel_choices}")
                if w not in st.width_choices:
                    raise ValueError(f"width {w} not in choices {st.width_choices}")
                ks.append(k)
                ws.append(w)
            elif k != 0 or w != 0:
                raise ValueError("inactive slots must be encoded as 0")
        depths.append(d)
        kernels.append(tuple(ks))
        widths.append(tuple(ws))
    return Architecture(tuple(depths), tuple(kernels), tuple(widths))


def digest(a: Architecture) -> str:
    """Stable 16-hex-char key: sha256 of the canonical gene serialization.

    Byte-exact construction: sha256(b"arch-v1:" + JSON of
    [depths, kernels, widths] with separators (",", ":")), first 16 hex chars.
    """
    payload = json.dumps(
        [list(a.depths), [list(t) for t in a.kernels], [list(t) for t in a.widths]],
        separators=(",", ":"),
    )
    return hashlib.sha256(b"arch-v1:" + payload.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Weight arithmetic
# ---------------------------------------------------------------------------

def input_channels(space: SearchSpaceDef, a: Architecture, s: int, j: int) -> int:
    """Input channel count of slot (s, j): previous slot's width, the previous
    stage's last active width across a boundary, or the stem for slot (0, 0)."""
    if j > 0:
        return a.widths[s][j - 1]
    if s == 0:
        return space.stem_channels
    return a.widths[s - 1][-1]


def weight_count(space: SearchSpaceDef, a: Architecture) -> int:
    """Total conv weights: sum of k^2 * c_in * c_out over active slots."""
    _require_member(space, a, "counted")
    total = 0
    for s in range(space.n_stages):
        for j in range(a.depths[s]):
            k = a.kernels[s][j]
            total += k * k * input_channels(space, a, s, j) * a.widths[s][j]
    return total


def shared_weight_count(space: SearchSpaceDef, a: Architecture, b: Architecture) -> int:
    """Size of the weight intersection under nested sharing.

    Centered sub-kernels and leading channel slices make the per-slot
    intersection a box of minima; slots active in only one architecture
    share nothing.
    """
    _require_member(space, a, "first")
    _require_member(space, b, "second")
    total = 0
    for s in range(space.n_stages):
        for j in range(min(a.depths[s], b.depths[s])):
            k = min(a.kernels[s][j], b.kernels[s][j])
            cin = min(input_channels(space, a, s, j), input_channels(space, b, s, j))
            cout = min(a.widths[s][j], b.widths[s][j])
            total += k * k * cin * cout
    return total


def contains(space: SearchSpaceDef, ref: Architecture, target: Architecture) -> bool:
    """True iff every weight of `ref` is a weight of `target` (nested sharing)."""
    _require_member(space, ref, "reference")
    _require_member(space, target, "target")
    n = space.n_stages
    for s in range(n):
        if target.depths[s] < ref.depths[s]:
            return False
        for j in range(ref.depths[s]):
            if target.kernels[s][j] < ref.kernels[s][j]:
                return False
            if target.widths[s][j] < ref.widths[s][j]:
                return False
        # Stage output feeds the next stage's input slice.
        if s < n - 1 and target.widths[s][-1] < ref.widths[s][-1]:
            return False
    return True


# ---------------------------------------------------------------------------
# Constrained choice lists
# ---------------------------------------------------------------------------

def _depth_list(st: StageDef, ref_depth: Optional[int], direction: Direction) -> tuple[int, ...]:
    if ref_depth is None:
        return st.depth_choices
    if direction == "grow":
        return tuple(d for d in st.depth_choices if d >= ref_depth)
    return tuple(d for d in st.depth_choices if d <= ref_depth)


def _kernel_list(
    st: StageDef, ref_kernels: Optional[tuple[int, ...]], j: int, direction: Direction
) -> tuple[int, ...]:
    if ref_kernels is None or j >= len(ref_kernels):
        return st.kernel_choices
    if direction == "grow":
        return tuple(k for k in st.kernel_choices if k >= ref_kernels[j])
    return tuple(k for k in st.kernel_choices if k <= ref_kernels[j])


def _width_list(
    space: SearchSpaceDef,
    s: int,
    ref: Optional[Architecture],
    j: int,
    depth: int,
    direction: Direction,
) -> tuple[int, ...]:
    st = space.stages[s]
    if ref is None:
        return st.width_choices
    feeds_next = s < space.n_stages - 1 and j == depth - 1
    if direction == "grow":
        lo = ref.widths[s][j] if j < ref.depths[s] else 1
        if feeds_next:
            lo = max(lo, ref.widths[s][-1])
        return tuple(w for w in st.width_choices if w >= lo)
    hi = ref.widths[s][j]
    if feeds_next:
        hi = min(hi, ref.widths[s][-1])
    return tuple(w for w in st.width_choices if w <= hi)


def _check_constrained_pre(
    space: SearchSpaceDef, ref: Architecture, a: Architecture, direction: Direction, op: str
) -> None:
    ok = contains(space, ref, a) if direction == "grow" else contains(space, a, ref)
    if not ok:
        raise ValueError(f"{op}: input violates the containment precondition")


# ---------------------------------------------------------------------------
# Sampling / mutation / crossover
# ---------------------------------------------------------------------------

def _as_rng(rng: int | SplitRng, tag: str) -> SplitRng:
    if isinstance(rng, SplitRng):
        return rng
    return SplitRng.from_seed(rng, tag)


def _sample(
    space: SearchSpaceDef,
    rng: SplitRng,
    ref: Optional[Architecture],
    direction: Direction,
) -> Architecture:
    depths: list[int] = []
    kernels: list[tuple[int, ...]] = []
    widths: list[tuple[int, ...]] = []
    for s, st in enumerate(space.stages):
        ref_d = ref.depths[s] if ref is not None else None
        ref_k = ref.kernels[s] if ref is not None else None
        d = rng.choice(_depth_list(st, ref_d, direction))
        ks: list[int] = []
        ws: list[int] = []
        for j in range(d):
            ks.append(rng.choice(_kernel_list(st, ref_k, j, direction)))
            ws.append(rng.choice(_width_list(space, s, ref, j, d, direction)))
        depths.append(d)
        kernels.append(tuple(ks))
        widths.append(tuple(ws))
    return Architecture(tuple(depths), tuple(kernels), tuple(widths))


def random_sample(space: SearchSpaceDef, rng: int | SplitRng) -> Architecture:
    """Uniform independent choice per axis; deterministic in the seed."""
    return _sample(space, _as_rng(rng, "sample"), None, "grow")


def constrained_sample(
    space: SearchSpaceDef,
    ref: Architecture,
    rng: int | SplitRng,
    direction: Direction = "grow",
) -> Architecture:
    """Uniform sample from per-axis lists truncated against `ref`.

    direction="grow" yields contains(ref, out); "shrink" yields contains(out, ref).
    """
    _require_member(space, ref, "reference")
    return _sample(space, _as_rng(rng, "sample"), ref, direction)


def _mutate(
    space: SearchSpaceDef,
    rng: SplitRng,
    a: Architecture,
    mutate_prob: float,
    ref: Optional[Architecture],
    direction: Direction,
) -> Architecture:
    depths: list[int] = []
    kernels: list[tuple[int, ...]] = []
    widths: list[tuple[int, ...]] = []
    for s, st in enumerate(space.stages):
        ref_d = ref.depths[s] if ref is not None else None
        ref_k = ref.kernels[s] if ref is not None else None
        d_old = a.depths[s]
        dlist = _depth_list(st, ref_d, direction)
        d = rng.choice(dlist) if rng.random() < mutate_prob else d_old
        ks: list[int] = []
        ws: list[int] = []
        for j in range(d):
            klist = _kernel_list(st, ref_k, j, direction)
            wlist = _width_list(space, s, ref, j, d, direction)
            if j < d_old:
                old_k, old_w = a.kernels[s][j], a.widths[s][j]
                resample_k = rng.random() < mutate_prob or old_k not in klist
                ks.append(rng.choice(klist) if resample_k else old_k)
                resample_w = rng.random() < mutate_prob or old_w not in wlist
                ws.append(rng.choice(wlist) if resample_w else old_w)
            else:
                ks.append(rng.choice(klist))
                ws.append(rng.choice(wlist))
        depths.append(d)
        kernels.append(tuple(ks))
        widths.append(tuple(ws))
    return Architecture(tuple(depths), tuple(kernels), tuple(widths))


def mutate(
    space: SearchSpaceDef, a: Architecture, mutate_prob: float, rng: int | SplitRng
) -> Architecture:
    """Resample each gene independently with probability `mutate_prob`.

    Depth growth draws fresh genes for the new trailing slots; depth shrink
    drops trailing slots.
    """
    _require_member(space, a, "mutated")
    return _mutate(space, _as_rng(rng, "mutate"), a, mutate_prob, None, "grow")


def constrained_mutate(
    space: SearchSpaceDef,
    ref: Architecture,
    a: Architecture,
    mutate_prob: float,
    rng: int | SplitRng,
    direction: Direction = "grow",
) -> Architecture:
    """Gene-wise mutation over choice lists truncated against `ref`.

    Requires the input to already satisfy the containment constraint; output
    satisfies it by construction.  A surviving gene that falls outside its
    truncated list after a depth move is forcibly resampled.
    """
    _require_member(space, ref, "reference")
    _require_member(space, a, "mutated")
    _check_constrained_pre(space, ref, a, direction, "constrained_mutate")
    return _mutate(space, _as_rng(rng, "mutate"), a, mutate_prob, ref, direction)


def _crossover(
    space: SearchSpaceDef, rng: SplitRng, a: Architecture, b: Architecture
) -> Architecture:
    depths: list[int] = []
    kernels: list[tuple[int, ...]] = []
    widths: list[tuple[int, ...]] = []
    for s in range(space.n_stages):
        parent = a if rng.randrange(2) == 0 else b
        depths.append(parent.depths[s])
        kernels.append(parent.kernels[s])
        widths.append(parent.widths[s])
    return Architecture(tuple(depths), tuple(kernels), tuple(widths))


def crossover(
    space: SearchSpaceDef, a: Architecture, b: Architecture, rng: int | SplitRng
) -> Architecture:
    """Inherit each stage (depth plus all slot genes) wholesale from a parent."""
    _require_member(space, a, "first parent")
    _require_member(space, b, "second parent")
    return _crossover(space, _as_rng(rng, "crossover"), a, b)


def constrained_crossover(
    space: SearchSpaceDef,
    ref: Architecture,
    a: Architecture,
    b: Architecture,
    rng: int | SplitRng,
    direction: Direction = "grow",
) -> Architecture:
    """Per-stage crossover of two parents that both satisfy the constraint.

    Containment decomposes per stage, so the offspring satisfies it too.
    """
    _require_member(space, ref, "reference")
    _check_constrained_pre(space, ref, a, direction, "constrained_crossover")
    _check_constrained_pre(space, ref, b, direction, "constrained_crossover")
    return _crossover(space, _as_rng(rng, "crossover"), a, b)


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

def _stage_configs(st: StageDef) -> Iterator[tuple[int, tuple[int, ...], tuple[int, ...]]]:
    for d in st.depth_choices:
        slot_pairs = list(itertools.product(st.kernel_choices, st.width_choices))
        for combo in itertools.product(slot_pairs, repeat=d):
            ks = tuple(k for k, _ in combo)
            ws = tuple(w for _, w in combo)
            yield d, ks, ws


def enumerate_architectures(
    space: SearchSpaceDef, cap: int = 10**6
) -> Iterator[Architecture]:
    """Yield every architecture in canonical encoding order.

    Raises SpaceTooLargeError when the space exceeds `cap`.
    """
    size = space_size(space)
    if size > cap:
        raise SpaceTooLargeError(f"space has {size} architectures (cap {cap})")
    per_stage = [list(_stage_configs(st)) for st in space.stages]
    for combo in itertools.product(*per_stage):
        yield Architecture(
            depths=tuple(c[0] for c in combo),
            kernels=tuple(c[1] for c in combo),
            widths=tuple(c[2] for c in combo),
        )
