"""Exception taxonomy shared across the engine and the CLI.

The CLI maps these onto stable exit-code classes: configuration problems
exit 2, infeasible searches exit 3, evaluator/data misses exit 4.
"""


class RegnasError(Exception):
    """Base class for engine errors."""


class ConfigError(RegnasError):
    """Invalid configuration, file format, or flag combination (exit 2)."""


class SpaceMismatchError(RegnasError):
    """An architecture does not belong to the search space it was used with."""


class InfeasibleError(RegnasError):
    """Constraint retry budget exhausted; feasible set appears empty (exit 3)."""


class EvaluatorMissError(RegnasError):
    """A required architecture/signature is absent from an evaluator or LUT (exit 4)."""


class DataMismatchError(RegnasError):
    """Inputs disagree on dataset size or schema (exit 4)."""


class SpaceTooLargeError(RegnasError):
    """Enumeration requested on a space above the configured cap."""
