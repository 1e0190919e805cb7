from abc import ABC, abstractmethod

import numpy as np

from adaptsgd.core.errors import CapabilityError, DegeneratePointError, ParameterError
from adaptsgd.utils.rng import StreamBatch

PL_DEGENERATE_GAP = 1e-15


class BaseObjective(ABC):
    """
    Base class for the analytically characterized test objectives. Every objective knows its
    infimum f*, its smoothness constant L and, when it satisfies the PL condition on a
    declared region, its PL constant μ.

    value_at and gradient_at accept a single point of shape (d,) or a batch of shape (n, d).
    """

    name: str = "objective"

    def __init__(self, dim: int, f_star: float, L: float, mu: float | None = None, **kwargs):
        if dim < 1:
            raise ParameterError(f"dimension must be positive, got {dim}")
        if not L > 0:
            raise ParameterError(f"L must be positive, got {L}")
        if mu is not None and not mu > 0:
            raise ParameterError(f"mu must be positive when given, got {mu}")
        self.dim = dim
        self.f_star = f_star
        self.L = L
        self.mu = mu
        self.kwargs = kwargs

    @abstractmethod
    def value_at(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @abstractmethod
    def gradient_at(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def in_pl_region(self, x: np.ndarray) -> np.ndarray:
        """Whether the PL certificate (and μ) applies at x."""
        x = np.asarray(x, dtype=np.float64)
        return np.full(x.shape[:-1], self.mu is not None, dtype=bool)

    @abstractmethod
    def default_start(self) -> np.ndarray:
        raise NotImplementedError

    def random_start(self, streams: StreamBatch) -> np.ndarray:
        raise CapabilityError(f"{self.name} has no random-start rule")

    def check_point(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.dim:
            raise ParameterError(f"point has dimension {x.shape[-1]}, objective has {self.dim}")
        return x

    def to_dict(self):
        return {
            "name": self.name,
            "dim": self.dim,
            "f_star": self.f_star,
            "L": self.L,
            "mu": self.mu,
        }


def pl_ratio(obj: BaseObjective, x: np.ndarray) -> float | np.ndarray:
    """‖∇f(x)‖² / (2(f(x) − f*)); at least μ wherever the PL condition holds."""
    x = obj.check_point(x)
    gap = obj.value_at(x) - obj.f_star
    if np.any(gap < PL_DEGENERATE_GAP):
        raise DegeneratePointError("PL ratio is undefined where f(x) - f* < 1e-15")
    grad = obj.gradient_at(x)
    ratio = np.sum(grad * grad, axis=-1) / (2.0 * gap)
    return float(ratio) if np.ndim(ratio) == 0 else ratio


def finite_difference_gradient(obj: BaseObjective, x: np.ndarray, step: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of obj at a batch of points (n, d)."""
    x = np.atleast_2d(obj.check_point(x))
    grad = np.empty_like(x)
    for i in range(obj.dim):
        offset = np.zeros(obj.dim)
        offset[i] = step
        grad[:, i] = (obj.value_at(x + offset) - obj.value_at(x - offset)) / (2.0 * step)
    return grad


def estimate_smoothness(obj: BaseObjective, points: np.ndarray, step: float = 1e-6) -> float:
    """Largest observed ‖∇f(x + h·e_i) − ∇f(x)‖ / h; a lower estimate of L over the points."""
    x = np.atleast_2d(obj.check_point(points))
    base = obj.gradient_at(x)
    best = 0.0
    for i in range(obj.dim):
        offset = np.zeros(obj.dim)
        offset[i] = step
        diff = obj.gradient_at(x + offset) - base
        best = max(best, float(np.max(np.linalg.norm(diff, axis=-1))) / step)
    return best
