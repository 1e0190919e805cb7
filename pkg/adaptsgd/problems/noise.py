"""
Stochastic gradient oracles.

Every oracle returns g = ∇f(x) + noise with E[g | x] = ∇f(x) and
E[‖g − ∇f(x)‖² | x] = a‖∇f(x)‖² + b, for the (a, b) reported by the oracle.
"""

import math
from dataclasses import dataclass

import numpy as np

from adaptsgd.core.errors import ParameterError
from adaptsgd.core.types import NoiseKind
from adaptsgd.problems.base_objective import BaseObjective
from adaptsgd.utils.rng import StreamBatch

NOISE_KINDS: tuple[str, ...] = ("exact", "additive_gaussian", "relative", "mixed")


@dataclass(frozen=True)
class NoiseOracle:
    kind: NoiseKind
    dim: int
    sigma: float = 0.0
    rel: float = 0.0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ParameterError(f"Unknown noise kind: {self.kind}. Supported: {list(NOISE_KINDS)}")
        if self.dim < 1:
            raise ParameterError(f"oracle dimension must be positive, got {self.dim}")
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise ParameterError(f"sigma must be nonnegative, got {self.sigma}")
        if not (self.rel >= 0 and math.isfinite(self.rel)):
            raise ParameterError(f"a must be nonnegative, got {self.rel}")

    @classmethod
    def exact(cls, dim: int) -> "NoiseOracle":
        return cls("exact", dim)

    @classmethod
    def additive_gaussian(cls, sigma: float, dim: int) -> "NoiseOracle":
        return cls("additive_gaussian", dim, sigma=sigma)

    @classmethod
    def relative(cls, a: float, dim: int) -> "NoiseOracle":
        return cls("relative", dim, rel=a)

    @classmethod
    def mixed(cls, sigma: float, a: float, dim: int) -> "NoiseOracle":
        return cls("mixed", dim, sigma=sigma, rel=a)

    @property
    def has_additive(self) -> bool:
        return self.kind in ("additive_gaussian", "mixed")

    @property
    def has_relative(self) -> bool:
        return self.kind in ("relative", "mixed")

    @property
    def a(self) -> float:
        return self.rel if self.has_relative else 0.0

    @property
    def b(self) -> float:
        return self.dim * self.sigma**2 if self.has_additive else 0.0

    @property
    def is_exact(self) -> bool:
        return self.kind == "exact"

    def second_moment(self, grad_sq: float | np.ndarray) -> float | np.ndarray:
        """a‖∇f‖² + b."""
        return self.a * grad_sq + self.b

    def perturb(self, grad: np.ndarray, streams: StreamBatch) -> np.ndarray:
        """Add this oracle's noise to a batch of exact gradients, one row per stream lane.

        The exact oracle draws nothing; the mixed oracle draws the additive term first.
        """
        grad = np.atleast_2d(grad)
        if grad.shape[-1] != self.dim:
            raise ParameterError(f"gradient has dimension {grad.shape[-1]}, oracle has {self.dim}")
        if self.is_exact:
            return grad.copy()
        g = grad.copy()
        if self.has_additive:
            g += self.sigma * streams.normals(self.dim)
        if self.has_relative:
            std = np.sqrt(self.rel * np.sum(grad * grad, axis=-1) / self.dim)
            g += std[:, None] * streams.normals(self.dim)
        return g

    def to_dict(self):
        return {"kind": self.kind, "dim": self.dim, "sigma": self.sigma, "a": self.rel}


def sample_gradient(
    oracle: NoiseOracle, obj: BaseObjective, x: np.ndarray, rng: StreamBatch
) -> np.ndarray:
    """Draw g(x) for a point (d,) with a one-lane stream, or a batch (n, d) with n lanes."""
    if oracle.dim != obj.dim:
        raise ParameterError(f"oracle dimension {oracle.dim} does not match objective {obj.dim}")
    x = obj.check_point(x)
    single = x.ndim == 1
    rows = 1 if single else x.shape[0]
    if len(rng) != rows:
        raise ParameterError(f"stream has {len(rng)} lanes for {rows} points")
    g = oracle.perturb(obj.gradient_at(np.atleast_2d(x)), rng)
    return g[0] if single else g
