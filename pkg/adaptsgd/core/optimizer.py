"""
SGD with a prescribed step-size schedule, optional Nesterov momentum, and the weighted
random-iterate output rule.

All runs go through one batched engine: rows are seeds, each row owns its xoshiro256++
lane, so a seed's trajectory is the same whether it runs alone or inside a batch.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from adaptsgd.core.errors import (
    CapabilityError,
    DegeneratePointError,
    DivergenceError,
    ParameterError,
)
from adaptsgd.core.schedules import ScheduleSpec, step_sequence
from adaptsgd.core.types import RecordMode, RunConfig, RunTrace
from adaptsgd.problems.base_objective import BaseObjective
from adaptsgd.problems.noise import NoiseOracle
from adaptsgd.utils.rng import StreamBatch

DIVERGENCE_LIMIT = 1e300


@dataclass
class BatchOutcome:
    """Raw engine output for a batch of seeds (row k belongs to seeds[k])."""

    seeds: list[int]
    first_index: int
    final_points: np.ndarray
    final_gaps: np.ndarray
    value_gap: np.ndarray | None = None
    grad_sq: np.ndarray | None = None
    iterates: np.ndarray | None = None
    iterate_steps: np.ndarray | None = None
    curve_steps: np.ndarray | None = None
    curve_gaps: np.ndarray | None = None
    diverged: dict[int, int] = field(default_factory=dict)


def _recorded_steps(T: int, every: int) -> np.ndarray:
    return np.arange(0, T, every, dtype=np.int64)


def run_batch(
    obj: BaseObjective,
    oracle: NoiseOracle,
    eta: np.ndarray,
    x1: np.ndarray | None,
    seeds: list[int],
    *,
    momentum: float = 0.0,
    first_index: int = 1,
    keep_trace: bool = False,
    record_iterates: RecordMode = "none",
    thin_every: int = 1,
    curve_every: int = 0,
    stop_on_divergence: bool = False,
) -> BatchOutcome:
    """
    Run len(seeds) independent SGD trajectories with the step sizes `eta`
    (eta[k] is η at step t = first_index + k).

    x1=None draws each seed's start from its own stream with obj.random_start before any
    gradient noise. A lane whose value or gradient becomes non-finite (or exceeds 1e300)
    is recorded in `diverged` as {seed: t} and frozen at the origin; with
    stop_on_divergence the run ends at the first such event.

    The curve holds the gap at steps first_index + k for k = 0, curve_every, ... and at
    the final point first_index + T.
    """
    if oracle.dim != obj.dim:
        raise ParameterError(f"oracle dimension {oracle.dim} does not match objective {obj.dim}")
    if not 0.0 <= momentum < 1.0:
        raise ParameterError(f"momentum must lie in [0, 1), got {momentum}")
    if thin_every < 1:
        raise ParameterError(f"thin_every must be >= 1, got {thin_every}")

    T = int(eta.shape[0])
    n = len(seeds)
    streams = StreamBatch(seeds)
    if x1 is None:
        x = np.array(obj.random_start(streams), dtype=np.float64)
    else:
        x1 = obj.check_point(x1)
        if x1.ndim != 1:
            raise ParameterError(f"x1 must be a single point, got shape {x1.shape}")
        x = np.tile(x1, (n, 1))
    v = np.zeros_like(x)

    value_gap = np.empty((n, T)) if keep_trace else None
    grad_sq = np.empty((n, T)) if keep_trace else None

    iterate_every = 1 if record_iterates == "all" else thin_every
    iterate_steps = None
    iterates = None
    if record_iterates != "none":
        iterate_steps = _recorded_steps(T, iterate_every)
        iterates = np.empty((n, iterate_steps.size, obj.dim))
    curve_steps = None
    curve_gaps = None
    if curve_every > 0:
        curve_steps = np.append(_recorded_steps(T, curve_every), T)
        curve_gaps = np.empty((n, curve_steps.size))

    diverged: dict[int, int] = {}
    alive = np.ones(n, dtype=bool)

    def evaluate(x: np.ndarray, t: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        with np.errstate(over="ignore", invalid="ignore"):
            value = obj.value_at(x)
            grad = obj.gradient_at(x)
            gsq = np.sum(grad * grad, axis=-1)
            bad = (
                ~np.isfinite(value)
                | (np.abs(value) > DIVERGENCE_LIMIT)
                | ~np.isfinite(gsq)
                | (np.sqrt(gsq) > DIVERGENCE_LIMIT)
            )
        bad &= alive
        if bad.any():
            for row in np.flatnonzero(bad):
                diverged[seeds[row]] = t
            alive[bad] = False
            x[bad] = 0.0
            v[bad] = 0.0
            value = np.where(bad, obj.f_star, value)
            grad = np.where(bad[:, None], 0.0, grad)
            gsq = np.where(bad, 0.0, gsq)
        return value - obj.f_star, grad, gsq

    for k in range(T):
        t = first_index + k
        gap, grad, gsq = evaluate(x, t)
        if diverged and (stop_on_divergence or not alive.any()):
            break
        if keep_trace:
            value_gap[:, k] = gap
            grad_sq[:, k] = gsq
        if iterates is not None and k % iterate_every == 0:
            iterates[:, k // iterate_every] = x
        if curve_gaps is not None and k % curve_every == 0:
            curve_gaps[:, k // curve_every] = gap

        g = oracle.perturb(grad, streams)
        if momentum > 0.0:
            v = momentum * v + g
            x = x - eta[k] * (g + momentum * v)
        else:
            x = x - eta[k] * g

    if not (diverged and (stop_on_divergence or not alive.any())):
        final_gap, _, _ = evaluate(x, first_index + T)
        if curve_gaps is not None:
            curve_gaps[:, -1] = final_gap
    else:
        final_gap = np.full(n, np.nan)

    return BatchOutcome(
        seeds=list(seeds),
        first_index=first_index,
        final_points=x,
        final_gaps=final_gap,
        value_gap=value_gap,
        grad_sq=grad_sq,
        iterates=iterates,
        iterate_steps=None if iterate_steps is None else iterate_steps + first_index,
        curve_steps=None if curve_steps is None else curve_steps + first_index,
        curve_gaps=curve_gaps,
        diverged=diverged,
    )


def _validate_run(obj: BaseObjective, oracle: NoiseOracle, cfg: RunConfig) -> None:
    if cfg.T < 1:
        raise ParameterError(f"T must be >= 1, got {cfg.T}")
    if not 0.0 <= cfg.momentum < 1.0:
        raise ParameterError(f"momentum must lie in [0, 1), got {cfg.momentum}")
    if oracle.dim != obj.dim:
        raise ParameterError(f"oracle dimension {oracle.dim} does not match objective {obj.dim}")
    if cfg.x1 is not None and np.asarray(cfg.x1).shape != (obj.dim,):
        raise ParameterError(f"x1 must have shape ({obj.dim},), got {np.asarray(cfg.x1).shape}")


def sgd_run(obj: BaseObjective, oracle: NoiseOracle, cfg: RunConfig) -> RunTrace:
    """
    x_{t+1} = x_t − η_t g_t for t = first_index .. first_index + T − 1.

    With momentum m > 0 the Nesterov update without dampening is used:
    v_t = m·v_{t−1} + g_t, x_{t+1} = x_t − η_t(g_t + m·v_t), v_0 = 0.
    """
    _validate_run(obj, oracle, cfg)
    eta = step_sequence(cfg.schedule, cfg.T, cfg.first_index)
    outcome = run_batch(
        obj,
        oracle,
        eta,
        cfg.x1,
        [cfg.seed],
        momentum=cfg.momentum,
        first_index=cfg.first_index,
        keep_trace=True,
        record_iterates=cfg.record_iterates,
        thin_every=cfg.thin_every,
        stop_on_divergence=True,
    )
    if outcome.diverged:
        raise DivergenceError(iteration=outcome.diverged[cfg.seed], seed=cfg.seed)
    return RunTrace(
        eta=eta,
        value_gap=outcome.value_gap[0],
        grad_sq=outcome.grad_sq[0],
        final_point=outcome.final_points[0],
        final_gap=float(outcome.final_gaps[0]),
        seed=cfg.seed,
        first_index=cfg.first_index,
        iterates=None if outcome.iterates is None else outcome.iterates[0],
        iterate_steps=outcome.iterate_steps,
    )


def sgd_restart_run(
    obj: BaseObjective,
    oracle: NoiseOracle,
    eta0: float,
    T0: int,
    r: float = 1.0,
    l: int = 0,  # noqa: E741
    seed: int = 0,
    momentum: float = 0.0,
    x1: np.ndarray | None = None,
    record_iterates: RecordMode = "none",
    thin_every: int = 1,
) -> RunTrace:
    """
    Cosine with restarts: l+1 stages of lengths T_i = round(T0·r^i), stage i using
    (η0/2)(1 + cos(tπ/T_i)) for t = 0..T_i − 1. Each stage starts from the final point of
    the previous one; the momentum buffer carries over.
    """
    if T0 < 1:
        raise ParameterError(f"T0 must be >= 1, got {T0}")
    schedule = ScheduleSpec.cosine_restart(eta0, T0, r, l)
    cfg = RunConfig(
        x1=obj.default_start() if x1 is None else np.asarray(x1, dtype=np.float64),
        T=schedule.T,
        schedule=schedule,
        momentum=momentum,
        seed=seed,
        record_iterates=record_iterates,
        thin_every=thin_every,
        first_index=0,
    )
    return sgd_run(obj, oracle, cfg)


def sample_weighted_iterate(trace: RunTrace, rng: StreamBatch) -> tuple[int, np.ndarray]:
    """Draw (t, x_t) with probability η_t / Σ η_i; needs every iterate recorded."""
    if not trace.has_all_iterates:
        raise CapabilityError("weighted iterate draw needs record_iterates='all'")
    cumulative = np.cumsum(trace.eta)
    total = cumulative[-1]
    if not total > 0:
        raise DegeneratePointError("all step sizes are zero; the weighted iterate is undefined")
    u = float(rng.uniform()[0]) * total
    k = int(np.searchsorted(cumulative, u, side="right"))
    k = min(k, trace.T - 1)
    return trace.first_index + k, trace.iterates[k]


def weighted_grad_sq(trace: RunTrace) -> float:
    """Σ η_t‖∇f(x_t)‖² / Σ η_t, the expectation of ‖∇f(x̃)‖² under the weighted draw."""
    total = math.fsum(trace.eta)
    if not total > 0:
        raise DegeneratePointError("all step sizes are zero; the weighted iterate is undefined")
    return math.fsum(trace.eta * trace.grad_sq) / total
