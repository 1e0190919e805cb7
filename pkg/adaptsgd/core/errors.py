"""
Error types raised across adaptsgd.

Every error derives from AdaptSGDError and from the closest built-in exception, so callers
can catch either the domain type or the familiar one.
"""


class AdaptSGDError(Exception):
    """Base class for all adaptsgd errors."""


class ParameterError(AdaptSGDError, ValueError):
    """Invalid parameters for a schedule, objective, oracle or run."""


class DomainError(ParameterError):
    """A numeric argument lies outside the domain of a function."""


class PreconditionError(ParameterError):
    """A theorem hypothesis does not hold for the given inputs."""

    def __init__(self, hypothesis: str, message: str | None = None):
        self.hypothesis = hypothesis
        super().__init__(message or f"Hypothesis violated: {hypothesis}")


class ScheduleIndexError(AdaptSGDError, IndexError):
    """Step index outside the range a schedule is defined on."""


class DegeneratePointError(AdaptSGDError, ValueError):
    """Quantity undefined at the given point (e.g. PL ratio at a minimiser)."""


class CapabilityError(AdaptSGDError, RuntimeError):
    """The requested operation needs data or structure that is not available."""


class DivergenceError(AdaptSGDError, ArithmeticError):
    """Value or gradient became non-finite (or exceeded 1e300) during a run."""

    def __init__(self, iteration: int, seed: int | None = None, message: str | None = None):
        self.iteration = iteration
        self.seed = seed
        where = f"iteration {iteration}" + (f" (seed {seed})" if seed is not None else "")
        super().__init__(message or f"SGD diverged at {where}")


class EnsembleDivergenceError(DivergenceError):
    """One or more members of a seed ensemble diverged."""

    def __init__(self, seeds: list[int], iterations: list[int]):
        self.seeds = list(seeds)
        self.iterations = list(iterations)
        super().__init__(
            iteration=min(iterations) if iterations else 0,
            message=f"SGD diverged for seeds {self.seeds}",
        )


class ConfigError(AdaptSGDError, ValueError):
    """Unreadable or ill-formed configuration."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
