"""Regression-constrained neural architecture search.

Find families of architectures across compute budgets that keep both high
Top-1 accuracy and a low pairwise negative flip rate, by (1) constraining
each model to contain the weights of the previous one under nested sharing,
and (2) scoring candidates with a reward that penalizes negative flips
against the reference.
"""

__version__ = "0.1.0"

from .costmodel import CostConstraint, LatencyLUT, flops, flops_macs, latency, satisfies
from .evaluator import PredictionTable, SyntheticSupernetModel, table_evaluate
from .metrics import (
    CorrectnessVector,
    NfrMatrix,
    RewardConfig,
    nfr,
    nfr_matrix,
    pair_nfr,
    pfr,
    relative_change,
    reward,
    top1,
)
from .search import (
    BruteForceResult,
    FamilyResult,
    SearchConfig,
    SearchResult,
    brute_force_search,
    direction_compare,
    evolutionary_search,
    family_search,
    lambda_sweep,
    transitivity_check,
)
from .space import (
    Architecture,
    SearchSpaceDef,
    StageDef,
    ValidationReport,
    constrained_crossover,
    constrained_mutate,
    constrained_sample,
    contains,
    crossover,
    decode,
    digest,
    encode,
    enumerate_architectures,
    mutate,
    random_sample,
    shared_weight_count,
    space_size,
    validate_space,
    weight_count,
)

__all__ = [
    "Architecture",
    "BruteForceResult",
    "CorrectnessVector",
    "CostConstraint",
    "FamilyResult",
    "LatencyLUT",
    "NfrMatrix",
    "PredictionTable",
    "RewardConfig",
    "SearchConfig",
    "SearchResult",
    "SearchSpaceDef",
    "StageDef",
    "SyntheticSupernetModel",
    "ValidationReport",
    "brute_force_search",
    "constrained_crossover",
    "constrained_mutate",
    "constrained_sample",
    "contains",
    "crossover",
    "decode",
    "digest",
    "direction_compare",
    "encode",
    "enumerate_architectures",
    "evolutionary_search",
    "family_search",
    "flops",
    "flops_macs",
    "lambda_sweep",
    "latency",
    "mutate",
    "nfr",
    "nfr_matrix",
    "pair_nfr",
    "pfr",
    "random_sample",
    "relative_change",
    "reward",
    "satisfies",
    "shared_weight_count",
    "space_size",
    "table_evaluate",
    "top1",
    "transitivity_check",
    "validate_space",
    "weight_count",
]
