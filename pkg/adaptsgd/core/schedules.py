"""
Step-size schedules for SGD and their partial sums.

Main schedules are evaluated at t = 1..T by the optimizer; the restart schedule uses the
stage-local index t = 0..T_i - 1. step_size accepts t = 0 for every kind.
"""

import bisect
import math
from dataclasses import dataclass, field

import numpy as np

from adaptsgd.core.errors import ParameterError, ScheduleIndexError
from adaptsgd.core.types import RestartParams, ScheduleKind

SCHEDULE_KINDS: tuple[str, ...] = (
    "exponential",
    "cosine",
    "cosine_restart",
    "inverse_sqrt",
    "inverse_linear",
    "stagewise",
    "constant",
    "poly_pl",
)
ALPHA_CONSISTENCY_TOL = 1e-12


@dataclass(frozen=True)
class StagewiseParams:
    milestones: tuple[int, ...]
    factor: float

    def to_dict(self):
        return {"milestones": list(self.milestones), "factor": self.factor}


@dataclass(frozen=True)
class PolyPLParams:
    mu: float

    def to_dict(self):
        return {"mu": self.mu}


def exponential_alpha(beta: float, T: int) -> float:
    """α = (β/T)^(1/T), the decay factor that makes η_T = η0·β/T."""
    if T < 1:
        raise ParameterError(f"T must be a positive integer, got {T}")
    if not 1.0 <= beta <= T:
        raise ParameterError(f"beta must satisfy 1 <= beta <= T, got beta={beta}, T={T}")
    return (beta / T) ** (1.0 / T)


def stage_lengths(T0: int, r: float, l: int) -> list[int]:  # noqa: E741
    """Restart stage horizons T_i = round(T0·r^i), i = 0..l (halves round up)."""
    return [max(1, math.floor(T0 * r**i + 0.5)) for i in range(l + 1)]


def theory_eta0(L: float, a: float = 0.0, c: float = 1.0) -> float:
    """η0 = 1/(c·L·(1+a)), the initial step the convergence theorems prescribe."""
    return 1.0 / (c * L * (1.0 + a))


def beta_for_condition(L: float, a: float, mu: float) -> float:
    """β = L(1+a)/μ, which removes the condition-number mismatch of the exponential bound."""
    return max(1.0, L * (1.0 + a) / mu)


@dataclass(frozen=True)
class ScheduleSpec:
    """An immutable step-size rule: kind, parameters and horizon T.

    Prefer the classmethod constructors; they fill in derived fields (α from β for the
    exponential schedule, T = Σ T_i for the restart schedule).
    """

    kind: ScheduleKind
    eta0: float
    T: int
    alpha: float | None = None
    beta: float | None = None
    restart: RestartParams | None = None
    stagewise: StagewiseParams | None = None
    pl_params: PolyPLParams | None = None
    _stage_lengths: tuple[int, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ParameterError(f"Unknown schedule kind: {self.kind}. Supported: {SCHEDULE_KINDS}")
        if not (self.eta0 > 0 and math.isfinite(self.eta0)):
            raise ParameterError(f"eta0 must be positive and finite, got {self.eta0}")
        if int(self.T) != self.T or self.T < 1:
            raise ParameterError(f"T must be a positive integer, got {self.T}")

        if self.kind == "exponential":
            self._validate_exponential()
        elif self.kind in ("inverse_sqrt", "inverse_linear"):
            if self.alpha is None or not self.alpha > 0:
                raise ParameterError(f"{self.kind} needs alpha > 0, got {self.alpha}")
        elif self.kind == "stagewise":
            self._validate_stagewise()
        elif self.kind == "poly_pl":
            if self.pl_params is None or not self.pl_params.mu > 0:
                raise ParameterError("poly_pl needs pl_params with mu > 0")
        elif self.kind == "cosine_restart":
            self._validate_restart()

    def _validate_exponential(self):
        if self.beta is not None:
            derived = exponential_alpha(self.beta, self.T)
            if self.alpha is None:
                object.__setattr__(self, "alpha", derived)
            elif abs(self.alpha - derived) > ALPHA_CONSISTENCY_TOL:
                raise ParameterError(
                    f"alpha={self.alpha} is inconsistent with beta={self.beta}, T={self.T} "
                    f"(expected {derived})"
                )
        if self.alpha is None:
            raise ParameterError("exponential schedule needs beta or alpha")
        if not 0.0 < self.alpha <= 1.0:
            raise ParameterError(f"exponential alpha must lie in (0, 1], got {self.alpha}")

    def _validate_stagewise(self):
        params = self.stagewise
        if params is None:
            raise ParameterError("stagewise schedule needs milestones and factor")
        if not 0.0 < params.factor < 1.0:
            raise ParameterError(f"stagewise factor must lie in (0, 1), got {params.factor}")
        milestones = params.milestones
        if any(b <= a for a, b in zip(milestones, milestones[1:], strict=False)):
            raise ParameterError(f"milestones must be strictly increasing: {milestones}")
        if milestones and (milestones[0] < 0 or milestones[-1] >= self.T):
            raise ParameterError(f"milestones must lie in [0, T={self.T}): {milestones}")

    def _validate_restart(self):
        params = self.restart
        if params is None:
            raise ParameterError("cosine_restart schedule needs restart parameters")
        if params.T0 < 1 or params.r < 1.0 or params.l < 0:
            raise ParameterError(f"restart needs T0 >= 1, r >= 1, l >= 0, got {params}")
        lengths = tuple(stage_lengths(params.T0, params.r, params.l))
        if sum(lengths) != self.T:
            raise ParameterError(
                f"cosine_restart horizon must equal the sum of stage lengths {sum(lengths)}"
            )
        object.__setattr__(self, "_stage_lengths", lengths)

    ########################################################
    ########    Constructors                       #########
    ########################################################

    @classmethod
    def exponential(
        cls, eta0: float, T: int, beta: float | None = None, alpha: float | None = None
    ) -> "ScheduleSpec":
        return cls(kind="exponential", eta0=eta0, T=T, alpha=alpha, beta=beta)

    @classmethod
    def cosine(cls, eta0: float, T: int) -> "ScheduleSpec":
        return cls(kind="cosine", eta0=eta0, T=T)

    @classmethod
    def cosine_restart(
        cls, eta0: float, T0: int, r: float = 1.0, l: int = 0  # noqa: E741
    ) -> "ScheduleSpec":
        if T0 < 1 or r < 1.0 or l < 0:
            raise ParameterError(f"restart needs T0 >= 1, r >= 1, l >= 0, got T0={T0}, r={r}, l={l}")
        total = sum(stage_lengths(T0, r, l))
        return cls(
            kind="cosine_restart", eta0=eta0, T=total, restart=RestartParams(T0=T0, r=r, l=l)
        )

    @classmethod
    def inverse_sqrt(cls, eta0: float, alpha: float, T: int) -> "ScheduleSpec":
        return cls(kind="inverse_sqrt", eta0=eta0, T=T, alpha=alpha)

    @classmethod
    def inverse_linear(cls, eta0: float, alpha: float, T: int) -> "ScheduleSpec":
        return cls(kind="inverse_linear", eta0=eta0, T=T, alpha=alpha)

    @classmethod
    def stagewise_decay(
        cls, eta0: float, T: int, milestones: list[int], factor: float
    ) -> "ScheduleSpec":
        params = StagewiseParams(milestones=tuple(int(m) for m in milestones), factor=factor)
        return cls(kind="stagewise", eta0=eta0, T=T, stagewise=params)

    @classmethod
    def constant(cls, eta0: float, T: int) -> "ScheduleSpec":
        return cls(kind="constant", eta0=eta0, T=T)

    @classmethod
    def poly_pl(cls, L: float, a: float, mu: float, T: int) -> "ScheduleSpec":
        """η_t = min(1/(L(1+a)), (2t+1)/(μ(t+1)²)); the first argument is carried as eta0."""
        if not (L > 0 and a >= 0):
            raise ParameterError(f"poly_pl needs L > 0 and a >= 0, got L={L}, a={a}")
        return cls(kind="poly_pl", eta0=theory_eta0(L, a), T=T, pl_params=PolyPLParams(mu=mu))

    ########################################################
    ########    Evaluation and serialization       #########
    ########################################################

    @property
    def stages(self) -> tuple[int, ...]:
        return self._stage_lengths

    @property
    def default_first_index(self) -> int:
        return 0 if self.kind == "cosine_restart" else 1

    def step_size(self, t: int) -> float:
        return step_size(self, t)

    def to_dict(self):
        d = {"kind": self.kind, "eta0": self.eta0, "T": self.T}
        if self.alpha is not None:
            d["alpha"] = self.alpha
        if self.beta is not None:
            d["beta"] = self.beta
        if self.restart is not None:
            d.update(self.restart.to_dict())
        if self.stagewise is not None:
            d.update(self.stagewise.to_dict())
        if self.pl_params is not None:
            d.update(self.pl_params.to_dict())
        return d



def stage_decomposition(spec: ScheduleSpec, t: int) -> tuple[int, int]:
    """Map a global restart-schedule index to (stage i, local index within T_i)."""
    if spec.kind != "cosine_restart":
        raise ParameterError("stage_decomposition applies to cosine_restart schedules only")
    if t < 0 or t >= spec.T:
        raise ScheduleIndexError(f"index {t} outside [0, {spec.T - 1}] of the restart schedule")
    start = 0
    for i, length in enumerate(spec.stages):
        if t < start + length:
            return i, t - start
        start += length
    raise ScheduleIndexError(f"index {t} outside the restart schedule")  # unreachable


def _check_index(spec: ScheduleSpec, t: int) -> None:
    if t < 0:
        raise ScheduleIndexError(f"step index must be >= 0, got {t}")
    if spec.kind == "cosine" and t > spec.T:
        raise ScheduleIndexError(f"cosine schedule is defined on [0, {spec.T}], got t={t}")
    if spec.kind == "cosine_restart" and t >= spec.T:
        raise ScheduleIndexError(f"restart schedule is defined on [0, {spec.T - 1}], got t={t}")


def step_size(spec: ScheduleSpec, t: int) -> float:
    """η_t of the given schedule."""
    t = int(t)
    _check_index(spec, t)
    kind = spec.kind
    if kind == "exponential":
        return spec.eta0 * spec.alpha**t
    if kind == "cosine":
        return spec.eta0 / 2.0 * (1.0 + math.cos(t * math.pi / spec.T))
    if kind == "cosine_restart":
        i, local = stage_decomposition(spec, t)
        return spec.eta0 / 2.0 * (1.0 + math.cos(local * math.pi / spec.stages[i]))
    if kind == "inverse_sqrt":
        return spec.eta0 / (1.0 + spec.alpha * math.sqrt(t))
    if kind == "inverse_linear":
        return spec.eta0 / (1.0 + spec.alpha * t)
    if kind == "stagewise":
        passed = bisect.bisect_right(spec.stagewise.milestones, t)
        return spec.eta0 * spec.stagewise.factor**passed
    if kind == "poly_pl":
        return min(spec.eta0, (2 * t + 1) / (spec.pl_params.mu * (t + 1) ** 2))
    return spec.eta0


def schedule_sum(spec: ScheduleSpec, t_from: int, t_to: int, direct: bool = False) -> float:
    """Σ_{t=t_from}^{t_to} η_t; closed form where one exists unless `direct` is set.

    An empty range (t_from > t_to) sums to 0.
    """
    if t_from > t_to:
        return 0.0
    _check_index(spec, t_from)
    _check_index(spec, t_to)
    if not direct:
        if spec.kind == "exponential":
            alpha = spec.alpha
            if alpha == 1.0:
                return spec.eta0 * (t_to - t_from + 1)
            return spec.eta0 * (alpha**t_from - alpha ** (t_to + 1)) / (1.0 - alpha)
        if spec.kind == "cosine" and (t_from, t_to) == (1, spec.T):
            return spec.eta0 * (spec.T - 1) / 2.0
        if spec.kind == "constant":
            return spec.eta0 * (t_to - t_from + 1)
    return math.fsum(step_size(spec, t) for t in range(t_from, t_to + 1))


def step_sequence(
    spec: ScheduleSpec, n_steps: int | None = None, first_index: int | None = None
) -> np.ndarray:
    """Step sizes for n_steps consecutive updates starting at first_index.

    Values are produced by step_size one by one, so a run's recorded η_t matches
    step_size(spec, t) exactly.
    """
    if first_index is None:
        first_index = spec.default_first_index
    if n_steps is None:
        n_steps = spec.T
    return np.array(
        [step_size(spec, t) for t in range(first_index, first_index + n_steps)], dtype=np.float64
    )
