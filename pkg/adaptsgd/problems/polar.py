"""
Non-convex test function defined in polar coordinates,

    g(r, θ) = (2 + cos θ / 2 + cos 4θ) · r² · (5/3 − r),

which satisfies the PL condition with μ = 1/24 on the disc r ≤ 1 and has f* = f(0, 0) = 0.
"""

import math

import numpy as np

from adaptsgd.problems.base_objective import BaseObjective
from adaptsgd.utils.rng import StreamBatch

POLAR_MU = 1.0 / 24.0
# Rounded up from estimate_smoothness over r <= 1 (about 30.6, reached near the origin
# along theta = pi/4). Overridable through problem.L.
POLAR_DEFAULT_L = 32.0
POLAR_PL_RADIUS = 1.0
ORIGIN_RADIUS = 1e-12
START_RADIUS = 0.9


class PolarPLObjective(BaseObjective):
    name = "polar_pl"

    def __init__(self, L: float = POLAR_DEFAULT_L, **kwargs):
        super().__init__(dim=2, f_star=0.0, L=L, mu=POLAR_MU, **kwargs)

    @staticmethod
    def _polar(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return np.hypot(x[..., 0], x[..., 1]), np.arctan2(x[..., 1], x[..., 0])

    def value_at(self, x: np.ndarray) -> np.ndarray:
        x = self.check_point(x)
        r, theta = self._polar(x)
        shape = 2.0 + np.cos(theta) / 2.0 + np.cos(4.0 * theta)
        return shape * r * r * (5.0 / 3.0 - r)

    def gradient_at(self, x: np.ndarray) -> np.ndarray:
        x = self.check_point(x)
        r, theta = self._polar(x)
        cos_t, sin_t = np.cos(theta), np.sin(theta)
        shape = 2.0 + cos_t / 2.0 + np.cos(4.0 * theta)
        dg_dr = (10.0 * r / 3.0 - 3.0 * r * r) * shape
        # (1/r)·∂g/∂θ, with the 1/r already cancelled against r²
        dg_dtheta_over_r = (-sin_t / 2.0 - 4.0 * np.sin(4.0 * theta)) * r * (5.0 / 3.0 - r)
        grad = np.stack(
            [
                cos_t * dg_dr - sin_t * dg_dtheta_over_r,
                sin_t * dg_dr + cos_t * dg_dtheta_over_r,
            ],
            axis=-1,
        )
        return np.where((r < ORIGIN_RADIUS)[..., None], 0.0, grad)

    def in_pl_region(self, x: np.ndarray) -> np.ndarray:
        x = self.check_point(x)
        return np.hypot(x[..., 0], x[..., 1]) <= POLAR_PL_RADIUS

    def default_start(self) -> np.ndarray:
        angle = math.pi / 4.0
        return np.array([START_RADIUS * math.cos(angle), START_RADIUS * math.sin(angle)])

    def random_start(self, streams: StreamBatch) -> np.ndarray:
        """Uniform draw from the disc r <= 0.9, one point per lane."""
        radius = START_RADIUS * np.sqrt(streams.uniform())
        angle = 2.0 * math.pi * streams.uniform()
        return np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=-1)


def polar_pl_objective(L: float = POLAR_DEFAULT_L) -> PolarPLObjective:
    return PolarPLObjective(L=L)
