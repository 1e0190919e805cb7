import math
from collections.abc import Sequence

import numpy as np

from adaptsgd.core.errors import ParameterError
from adaptsgd.problems.base_objective import BaseObjective


class QuadraticObjective(BaseObjective):
    """f(x) = ½ Σ λ_i x_i², smooth with L = max λ and PL everywhere with μ = min λ."""

    name = "quadratic"

    def __init__(self, lambdas: Sequence[float], **kwargs):
        lambdas = np.asarray(lambdas, dtype=np.float64).reshape(-1)
        if lambdas.size == 0 or np.any(lambdas <= 0) or not np.all(np.isfinite(lambdas)):
            raise ParameterError(f"all lambdas must be positive and finite, got {lambdas.tolist()}")
        super().__init__(
            dim=lambdas.size,
            f_star=0.0,
            L=float(lambdas.max()),
            mu=float(lambdas.min()),
            **kwargs,
        )
        self.lambdas = lambdas

    def value_at(self, x: np.ndarray) -> np.ndarray:
        x = self.check_point(x)
        return 0.5 * np.sum(self.lambdas * x * x, axis=-1)

    def gradient_at(self, x: np.ndarray) -> np.ndarray:
        x = self.check_point(x)
        return self.lambdas * x

    def default_start(self) -> np.ndarray:
        # all-ones direction, scaled so that f(x1) - f* = 1
        scale = math.sqrt(2.0 / float(self.lambdas.sum()))
        return np.full(self.dim, scale)

    def to_dict(self):
        return {**super().to_dict(), "lambdas": self.lambdas.tolist()}


def quadratic_objective(lambdas: Sequence[float]) -> QuadraticObjective:
    return QuadraticObjective(lambdas)
