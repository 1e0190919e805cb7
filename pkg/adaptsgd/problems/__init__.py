from typing import Any

from adaptsgd.core.errors import ParameterError
from adaptsgd.core.types import NoiseKind, ProblemKind
from adaptsgd.problems.base_objective import (
    BaseObjective,
    estimate_smoothness,
    finite_difference_gradient,
    pl_ratio,
)
from adaptsgd.problems.noise import NoiseOracle, sample_gradient
from adaptsgd.problems.polar import PolarPLObjective, polar_pl_objective
from adaptsgd.problems.quadratic import QuadraticObjective, quadratic_objective

__all__ = [
    "BaseObjective",
    "NoiseOracle",
    "PolarPLObjective",
    "QuadraticObjective",
    "estimate_smoothness",
    "finite_difference_gradient",
    "get_objective",
    "get_oracle",
    "pl_ratio",
    "polar_pl_objective",
    "quadratic_objective",
    "sample_gradient",
]


def get_objective(kind: ProblemKind, objective_kwargs: dict[str, Any]) -> BaseObjective:
    """
    Routes a problem kind and its args (as a dict) to the matching objective.
    Currently supported kinds: ['quadratic', 'polar_pl']
    """
    if kind == "quadratic":
        if "lambdas" not in objective_kwargs:
            raise ParameterError("lambdas are required for the quadratic objective")
        return QuadraticObjective(**objective_kwargs)
    elif kind == "polar_pl":
        return PolarPLObjective(**objective_kwargs)
    else:
        raise ParameterError(f"Unknown problem kind: {kind}. Supported: ['quadratic', 'polar_pl']")


def get_oracle(kind: NoiseKind, dim: int, oracle_kwargs: dict[str, Any]) -> NoiseOracle:
    """
    Routes a noise kind and its args (sigma and/or a) to a NoiseOracle of dimension dim.
    Currently supported kinds: ['exact', 'additive_gaussian', 'relative', 'mixed']
    """
    sigma = float(oracle_kwargs.get("sigma", 0.0))
    a = float(oracle_kwargs.get("a", 0.0))
    if kind == "exact":
        return NoiseOracle.exact(dim)
    elif kind == "additive_gaussian":
        return NoiseOracle.additive_gaussian(sigma, dim)
    elif kind == "relative":
        return NoiseOracle.relative(a, dim)
    elif kind == "mixed":
        return NoiseOracle.mixed(sigma, a, dim)
    else:
        raise ParameterError(
            f"Unknown noise kind: {kind}. Supported: ['exact', 'additive_gaussian', 'relative', 'mixed']"
        )
