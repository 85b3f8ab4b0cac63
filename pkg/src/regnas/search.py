"""Constrained evolutionary architecture search and its experiment drivers.

The optimizer maximizes `acc_weight * Top-1 - nfr_weight * NFR(reference ->
candidate)` subject to a hard cost budget, optionally restricted to the
subspace whose members contain (or are contained by) a reference
architecture.  Selection is elitist: the top `parent_fraction` of each
generation survives unchanged and the remainder is refilled by per-gene
mutation and per-stage crossover of the survivors, with rejection sampling
against the cost budget.

Everything is a pure function of (config, space, evaluator): candidate
random streams are split from the run seed by (generation, slot, attempt)
before any work is dispatched, and population scoring is an order-free map,
so results are identical at any parallelism level.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .costmodel import CostConstraint, satisfies
from .errors import ConfigError, InfeasibleError, SpaceTooLargeError
from .hashing import SplitRng, derive, mix64
from .metrics import (
    CorrectnessVector,
    NfrMatrix,
    RewardConfig,
    nfr,
    nfr_matrix,
    reward,
    top1,
)
from .space import (
    Architecture,
    Direction,
    SearchSpaceDef,
    arch_in_space,
    constrained_crossover,
    constrained_mutate,
    constrained_sample,
    contains,
    crossover,
    digest,
    encode,
    enumerate_architectures,
    mutate,
    random_sample,
)


@dataclass(frozen=True)
class SearchConfig:
    reward: RewardConfig
    constraint: CostConstraint
    generations: int = 20
    population: int = 100
    mutate_prob: float = 0.1
    mutation_ratio: float = 0.5
    parent_fraction: float = 0.25
    cas_enabled: bool = False
    cas_direction: Direction = "grow"
    reference: Optional[Architecture] = None
    rng_seed: int = 0
    retry_budget: int = 100
    threads: int = 1

    def validate(self, space: SearchSpaceDef) -> None:
        if self.generations < 1:
            raise ConfigError("generations must be >= 1")
        if self.population < 1:
            raise ConfigError("population must be >= 1")
        if not 0 <= self.mutate_prob <= 1:
            raise ConfigError("mutate_prob must lie in [0, 1]")
        if not 0 <= self.mutation_ratio <= 1:
            raise ConfigError("mutation_ratio must lie in [0, 1]")
        if not 0 < self.parent_fraction <= 1:
            raise ConfigError("parent_fraction must lie in (0, 1]")
        if self.retry_budget < 1:
            raise ConfigError("retry_budget must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.cas_enabled and self.reference is None:
            raise ConfigError("constrained search requires a reference architecture")
        if self.reference is not None and not arch_in_space(space, self.reference):
            raise ConfigError("reference architecture does not belong to the space")

    @property
    def n_parents(self) -> int:
        return max(1, int(self.population * self.parent_fraction))

    @property
    def refill_size(self) -> int:
        return self.population - self.n_parents

    @property
    def evaluation_slots(self) -> int:
        """Scoring slots over the whole run: the initial population plus one
        refill per later generation (100 + 19*75 = 1525 at the defaults)."""
        return self.population + (self.generations - 1) * self.refill_size

    def summary_json(self) -> dict:
        return {
            "reward": {"acc_weight": self.reward.acc_weight, "nfr_weight": self.reward.nfr_weight},
            "constraint": {"kind": self.constraint.kind, "threshold": self.constraint.threshold},
            "generations": self.generations,
            "population": self.population,
            "mutate_prob": self.mutate_prob,
            "mutation_ratio": self.mutation_ratio,
            "parent_fraction": self.parent_fraction,
            "cas_enabled": self.cas_enabled,
            "cas_direction": self.cas_direction,
            "reference": digest(self.reference) if self.reference is not None else None,
            "rng_seed": self.rng_seed,
            "retry_budget": self.retry_budget,
        }


@dataclass(frozen=True)
class CandidateScore:
    digest: str
    top1: float
    nfr: Optional[float]
    reward: float
    cost: float
    contains_ref: Optional[bool]

    def to_json(self) -> dict:
        obj = {"digest": self.digest, "top1": self.top1, "reward": self.reward, "cost": self.cost}
        if self.nfr is not None:
            obj["nfr"] = self.nfr
        if self.contains_ref is not None:
            obj["contains_ref"] = self.contains_ref
        return obj


@dataclass(frozen=True)
class GenerationLog:
    generation: int
    best: CandidateScore
    population: tuple[CandidateScore, ...]

    def to_json(self) -> dict:
        return {
            "generation": self.generation,
            "best": self.best.to_json(),
            "population": [c.to_json() for c in self.population],
        }


@dataclass(frozen=True)
class SearchResult:
    best: Architecture
    best_score: CandidateScore
    log: tuple[GenerationLog, ...]
    evaluation_slots: int
    distinct_evaluations: int

    def scatter_entries(self) -> list[CandidateScore]:
        """Unique evaluated candidates in first-seen order."""
        seen: dict[str, CandidateScore] = {}
        for gen in self.log:
            for cand in gen.population:
                seen.setdefault(cand.digest, cand)
        return list(seen.values())


class _Scorer:
    """Digest-memoized batch scoring against one evaluator and reference."""

    def __init__(self, space: SearchSpaceDef, evaluator, cfg: SearchConfig):
        self.space = space
        self.evaluator = evaluator
        self.cfg = cfg
        self.ref_bits: Optional[CorrectnessVector] = (
            evaluator.evaluate(cfg.reference) if cfg.reference is not None else None
        )
        self.memo: dict[str, CandidateScore] = {}
        self.bitmaps: dict[str, CorrectnessVector] = {}
        self.arch_by_digest: dict[str, Architecture] = {}

    def _evaluate_batch(self, archs: list[Architecture]) -> list[CorrectnessVector]:
        if self.cfg.threads > 1 and len(archs) > 1:
            chunk = -(-len(archs) // self.cfg.threads)
            parts = [archs[i : i + chunk] for i in range(0, len(archs), chunk)]
            with ThreadPoolExecutor(max_workers=self.cfg.threads) as pool:
                results = list(pool.map(self.evaluator.evaluate_many, parts))
            return [v for part in results for v in part]
        return self.evaluator.evaluate_many(archs)

    def score(self, archs: Sequence[Architecture]) -> list[CandidateScore]:
        fresh: dict[str, Architecture] = {}
        for a in archs:
            d = digest(a)
            if d not in self.memo and d not in fresh:
                fresh[d] = a
        if fresh:
            new_archs = list(fresh.values())
            for (d, a), bits in zip(fresh.items(), self._evaluate_batch(new_archs)):
                t1 = top1(bits)
                nfr_term = nfr(self.ref_bits, bits) if self.ref_bits is not None else None
                flag = None
                if self.cfg.reference is not None:
                    flag = (
                        contains(self.space, self.cfg.reference, a)
                        if self.cfg.cas_direction == "grow"
                        else contains(self.space, a, self.cfg.reference)
                    )
                self.memo[d] = CandidateScore(
                    digest=d,
                    top1=t1,
                    nfr=nfr_term,
                    reward=reward(t1, nfr_term if nfr_term is not None else 0.0, self.cfg.reward),
                    cost=self.cfg.constraint.cost(self.space, a),
                    contains_ref=flag,
                )
                self.bitmaps[d] = bits
                self.arch_by_digest[d] = a
        return [self.memo[digest(a)] for a in archs]


def _sort_key(space: SearchSpaceDef, scorer: _Scorer, cand: CandidateScore):
    return (-cand.reward, encode(space, scorer.arch_by_digest[cand.digest]))


def _feasible_sample(space, cfg: SearchConfig, base_key: int) -> Architecture:
    for attempt in range(cfg.retry_budget):
        rng = SplitRng(derive(base_key, "try", attempt))
        if cfg.cas_enabled:
            a = constrained_sample(space, cfg.reference, rng, cfg.cas_direction)
        else:
            a = random_sample(space, rng)
        if satisfies(space, a, cfg.constraint):
            return a
    raise InfeasibleError(
        f"no feasible sample within {cfg.retry_budget} attempts; "
        f"budget {cfg.constraint.threshold} {cfg.constraint.kind} looks unattainable"
    )


def _feasible_offspring(
    space, cfg: SearchConfig, parents: list[Architecture], base_key: int, use_mutation: bool
) -> Architecture:
    for attempt in range(cfg.retry_budget):
        rng = SplitRng(derive(base_key, "try", attempt))
        if use_mutation:
            parent = parents[rng.randrange(len(parents))]
            if cfg.cas_enabled:
                a = constrained_mutate(space, cfg.reference, parent, cfg.mutate_prob, rng, cfg.cas_direction)
            else:
                a = mutate(space, parent, cfg.mutate_prob, rng)
        else:
            i, j = rng.pair_distinct(len(parents))
            if cfg.cas_enabled:
                a = constrained_crossover(space, cfg.reference, parents[i], parents[j], rng, cfg.cas_direction)
            else:
                a = crossover(space, parents[i], parents[j], rng)
        if satisfies(space, a, cfg.constraint):
            return a
    raise InfeasibleError(
        f"no feasible offspring within {cfg.retry_budget} attempts at "
        f"budget {cfg.constraint.threshold} {cfg.constraint.kind}"
    )


def evolutionary_search(cfg: SearchConfig, space: SearchSpaceDef, evaluator) -> SearchResult:
    """Elitist evolutionary search; returns the best candidate ever scored."""
    cfg.validate(space)
    scorer = _Scorer(space, evaluator, cfg)
    root = derive(mix64(cfg.rng_seed), "evolution")

    population = [
        _feasible_sample(space, cfg, derive(root, "init", i)) for i in range(cfg.population)
    ]
    scores = scorer.score(population)
    log: list[GenerationLog] = []
    best_digest = min(scores, key=lambda c: _sort_key(space, scorer, c)).digest
    log.append(GenerationLog(1, scorer.memo[best_digest], tuple(scores)))

    n_mut = int(round(cfg.mutation_ratio * cfg.refill_size))
    for g in range(2, cfg.generations + 1):
        ranked = sorted(scores, key=lambda c: _sort_key(space, scorer, c))
        parents = [scorer.arch_by_digest[c.digest] for c in ranked[: cfg.n_parents]]
        offspring = [
            _feasible_offspring(space, cfg, parents, derive(root, "gen", g, "slot", j), j < n_mut)
            for j in range(cfg.refill_size)
        ]
        population = parents + offspring
        scores = scorer.score(population)
        gen_best = min(scores, key=lambda c: _sort_key(space, scorer, c))
        if _sort_key(space, scorer, gen_best) < _sort_key(space, scorer, scorer.memo[best_digest]):
            best_digest = gen_best.digest
        log.append(GenerationLog(g, scorer.memo[best_digest], tuple(scores)))

    return SearchResult(
        best=scorer.arch_by_digest[best_digest],
        best_score=scorer.memo[best_digest],
        log=tuple(log),
        evaluation_slots=cfg.evaluation_slots,
        distinct_evaluations=len(scorer.memo),
    )


@dataclass(frozen=True)
class BruteForceResult:
    best: Architecture
    best_score: CandidateScore
    entries: tuple[CandidateScore, ...]


def brute_force_search(
    space: SearchSpaceDef,
    evaluator,
    reward_cfg: RewardConfig,
    constraint: CostConstraint,
    reference: Optional[Architecture] = None,
    require_containment: bool = False,
    direction: Direction = "grow",
    enumeration_cap: int = 10**6,
    batch: int = 512,
) -> BruteForceResult:
    """Exact argmax of the reward over every feasible architecture.

    Ties break on the canonical encoding, matching the evolutionary search.
    """
    if require_containment and reference is None:
        raise ConfigError("containment filtering requires a reference")
    cfg = SearchConfig(
        reward=reward_cfg,
        constraint=constraint,
        reference=reference,
        cas_enabled=require_containment,
        cas_direction=direction,
    )
    scorer = _Scorer(space, evaluator, cfg)

    feasible: list[Architecture] = []
    for a in enumerate_architectures(space, cap=enumeration_cap):
        if not satisfies(space, a, constraint):
            continue
        if require_containment:
            ok = (
                contains(space, reference, a)
                if direction == "grow"
                else contains(space, a, reference)
            )
            if not ok:
                continue
        feasible.append(a)
    if not feasible:
        raise InfeasibleError("no architecture satisfies the constraint")

    entries: list[CandidateScore] = []
    for i in range(0, len(feasible), batch):
        entries.extend(scorer.score(feasible[i : i + batch]))
    best = min(entries, key=lambda c: _sort_key(space, scorer, c))
    return BruteForceResult(
        best=scorer.arch_by_digest[best.digest], best_score=best, entries=tuple(entries)
    )


# ---------------------------------------------------------------------------
# Experiment drivers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FamilyResult:
    labels: tuple[str, ...]
    architectures: tuple[Architecture, ...]
    results: tuple[SearchResult, ...]
    matrix: NfrMatrix

    def mean_pairwise_nfr(self) -> float:
        k = len(self.labels)
        pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
        return sum(self.matrix.values[i][j] for i, j in pairs) / len(pairs)


def family_search(
    space: SearchSpaceDef,
    evaluator,
    budgets: Sequence[float],
    cfg: SearchConfig,
    mode: str = "s2l",
) -> FamilyResult:
    """Search one architecture per budget, each constrained against the last.

    The anchor model is searched unconstrained with the accuracy-only reward;
    every later model uses `cfg.reward` plus the containment constraint
    against its predecessor.  mode "s2l" walks budgets small-to-large (each
    model contains the previous); "l2s" walks large-to-small (each model is
    contained by the previous) and exists for the direction experiment.
    """
    if len(budgets) < 2:
        raise ConfigError("family search needs at least two budgets")
    if sorted(budgets) != list(budgets) or len(set(budgets)) != len(budgets):
        raise ConfigError("budgets must be strictly ascending")
    if mode not in ("s2l", "l2s"):
        raise ConfigError(f"unknown family mode {mode!r}")

    order = list(budgets) if mode == "s2l" else list(reversed(budgets))
    direction: Direction = "grow" if mode == "s2l" else "shrink"

    results: list[SearchResult] = []
    archs: list[Architecture] = []
    reference: Optional[Architecture] = None
    for i, budget in enumerate(order):
        stage_cfg = dataclasses.replace(
            cfg,
            constraint=cfg.constraint.with_threshold(budget),
            reward=RewardConfig.preset("r0") if i == 0 else cfg.reward,
            cas_enabled=i > 0,
            cas_direction=direction,
            reference=reference,
            rng_seed=derive(mix64(cfg.rng_seed), "family", i),
        )
        res = evolutionary_search(stage_cfg, space, evaluator)
        results.append(res)
        archs.append(res.best)
        reference = res.best

    if mode == "l2s":  # report in ascending-budget order either way
        results.reverse()
        archs.reverse()
    labels = tuple(f"A{i + 1}" for i in range(len(archs)))
    vectors = [evaluator.evaluate(a) for a in archs]
    return FamilyResult(
        labels=labels,
        architectures=tuple(archs),
        results=tuple(results),
        matrix=nfr_matrix(vectors, labels),
    )


@dataclass(frozen=True)
class SweepRow:
    ratio: float
    cost: float
    top1: float
    nfr: float

    def to_json(self) -> dict:
        return {"ratio": self.ratio, "cost": self.cost, "top1": self.top1, "nfr": self.nfr}


def lambda_sweep(
    space: SearchSpaceDef,
    evaluator,
    ratios: Sequence[float],
    cfg: SearchConfig,
) -> list[SweepRow]:
    """One full search per nfr/acc weight ratio, acc weight pinned at 1."""
    if not ratios or any(r <= 0 for r in ratios):
        raise ConfigError("sweep ratios must be positive")
    if cfg.reference is None:
        raise ConfigError("a lambda sweep needs a reference architecture")
    rows = []
    for i, ratio in enumerate(ratios):
        run_cfg = dataclasses.replace(
            cfg,
            reward=RewardConfig(1.0, float(ratio)),
            rng_seed=derive(mix64(cfg.rng_seed), "sweep", i),
        )
        res = evolutionary_search(run_cfg, space, evaluator)
        rows.append(
            SweepRow(
                ratio=float(ratio),
                cost=res.best_score.cost,
                top1=res.best_score.top1,
                nfr=res.best_score.nfr if res.best_score.nfr is not None else 0.0,
            )
        )
    return rows


@dataclass(frozen=True)
class TransitivityReport:
    budgets: tuple[float, float, float]
    anchor_digest: str
    direct_digest: str
    transitive_digest: str
    nfr_direct: float
    nfr_transitive: float

    @property
    def gap(self) -> float:
        return self.nfr_direct - self.nfr_transitive

    def to_json(self) -> dict:
        return {
            "budgets": list(self.budgets),
            "anchor_digest": self.anchor_digest,
            "direct_digest": self.direct_digest,
            "transitive_digest": self.transitive_digest,
            "nfr_direct": self.nfr_direct,
            "nfr_transitive": self.nfr_transitive,
            "gap": self.gap,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TransitivityReport":
        return cls(
            budgets=tuple(obj["budgets"]),
            anchor_digest=obj["anchor_digest"],
            direct_digest=obj["direct_digest"],
            transitive_digest=obj["transitive_digest"],
            nfr_direct=obj["nfr_direct"],
            nfr_transitive=obj["nfr_transitive"],
        )


def transitivity_check(
    space: SearchSpaceDef,
    evaluator,
    cfg: SearchConfig,
    budgets: tuple[float, float, float],
) -> TransitivityReport:
    """Compare searching the largest model directly against the anchor versus
    through an intermediate model searched against the anchor first."""
    b1, b2, b3 = budgets
    if not (b1 <= b2 <= b3):
        raise ConfigError("budgets must satisfy b1 <= b2 <= b3")

    def run(reference, budget, tag, use_cas):
        stage_cfg = dataclasses.replace(
            cfg,
            constraint=cfg.constraint.with_threshold(budget),
            reward=RewardConfig.preset("r0") if reference is None else cfg.reward,
            cas_enabled=use_cas,
            cas_direction="grow",
            reference=reference,
            rng_seed=derive(mix64(cfg.rng_seed), "transitivity", tag),
        )
        return evolutionary_search(stage_cfg, space, evaluator).best

    a1 = run(None, b1, "anchor", False)
    a2 = run(a1, b2, "middle", True)
    a3_trans = run(a2, b3, "transitive", True)
    a3_direct = run(a1, b3, "direct", True)

    a1_bits = evaluator.evaluate(a1)
    return TransitivityReport(
        budgets=(float(b1), float(b2), float(b3)),
        anchor_digest=digest(a1),
        direct_digest=digest(a3_direct),
        transitive_digest=digest(a3_trans),
        nfr_direct=nfr(a1_bits, evaluator.evaluate(a3_direct)),
        nfr_transitive=nfr(a1_bits, evaluator.evaluate(a3_trans)),
    )


@dataclass(frozen=True)
class DirectionReport:
    budgets: tuple[float, ...]
    s2l: FamilyResult
    l2s: FamilyResult

    def to_json(self) -> dict:
        return {
            "budgets": list(self.budgets),
            "s2l_mean_pairwise_nfr": self.s2l.mean_pairwise_nfr(),
            "l2s_mean_pairwise_nfr": self.l2s.mean_pairwise_nfr(),
            "s2l_top1": list(self.s2l.matrix.top1s),
            "l2s_top1": list(self.l2s.matrix.top1s),
        }


def direction_compare(
    space: SearchSpaceDef,
    evaluator,
    budgets: Sequence[float],
    cfg: SearchConfig,
) -> DirectionReport:
    """Run the same family search in both directions with a shared seed."""
    return DirectionReport(
        budgets=tuple(float(b) for b in budgets),
        s2l=family_search(space, evaluator, budgets, cfg, mode="s2l"),
        l2s=family_search(space, evaluator, budgets, cfg, mode="l2s"),
    )
