"""
Seed ensembles, rate fits and the studies built on them.

Ensembles split their seeds into one chunk of consecutive seeds per worker; chunks run on a
thread pool and are reassembled in seed order before any reduction. Every seed owns its own
stream, so results do not depend on the number of workers.
"""

import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Literal

import numpy as np

from adaptsgd.core.bounds import get_bound
from adaptsgd.core.errors import (
    CapabilityError,
    DomainError,
    EnsembleDivergenceError,
    ParameterError,
)
from adaptsgd.core.optimizer import BatchOutcome, run_batch
from adaptsgd.core.schedules import (
    ScheduleSpec,
    beta_for_condition,
    step_sequence,
    theory_eta0,
)
from adaptsgd.core.types import (
    BoundInputs,
    CheckResult,
    EnsembleRecord,
    EnsembleResult,
    RateFit,
    RestartParams,
    StudyReport,
    StudyRow,
)
from adaptsgd.problems.base_objective import BaseObjective
from adaptsgd.problems.noise import NoiseOracle

if TYPE_CHECKING:
    from adaptsgd.logger import RunLogger, VerbosePrinter

CI_MIN_SEEDS = 30
Z_95 = 1.96

DEFAULT_LEVELS = (0.0, 0.05, 1.0)
DEFAULT_STUDY_SCHEDULES = ("exponential", "cosine", "constant")
DEFAULT_MAX_SLOPES = {"exponential": -0.7, "cosine": -0.6}
DEFAULT_MIN_R2 = 0.9
NONCONVEX_C = 2.0
# a plateau's last-quarter mean gap keeps at least this share of its third-quarter mean
PLATEAU_RATIO = 0.8
ADAPTIVE_ADVANTAGE = 2.0
STAGEWISE_FACTOR = 0.1

PL_THEOREMS = {
    "exponential": "exp-pl",
    "cosine": "cos-pl",
    "poly_pl": "poly-pl",
    "cosine_restart": "restart",
}
NONCONVEX_THEOREMS = {"exponential": "exp-nc", "cosine": "cos-nc"}


@dataclass(frozen=True)
class StudySettings:
    """Hyperparameters and run options shared by every ensemble of a study.

    beta="condition" selects β = L(1+a)/μ for the exponential schedule. For
    cosine_restart, each horizon in a study grid is used as T0 with r and l from `restart`.
    """

    beta: float | Literal["condition"] = 1.0
    alpha: float = 1.0
    c: float | None = None
    restart: RestartParams | None = None
    momentum: float = 0.0
    x1: np.ndarray | None = None
    random_start: bool = False
    curve_every: int = 0
    jobs: int = 1


def study_schedule(
    kind: str,
    T: int,
    L: float,
    mu: float | None,
    a: float = 0.0,
    *,
    beta: float | Literal["condition"] = 1.0,
    alpha: float = 1.0,
    c: float = 1.0,
    restart: RestartParams | None = None,
) -> ScheduleSpec:
    """Schedule of the given kind with the theory step η0 = 1/(c·L·(1+a))."""
    eta0 = theory_eta0(L, a, c)
    if kind == "exponential":
        if beta == "condition":
            if mu is None:
                raise CapabilityError("beta = 'condition' needs an objective with a PL constant")
            beta = beta_for_condition(L, a, mu)
        return ScheduleSpec.exponential(eta0, T, beta=min(float(beta), float(T)))
    elif kind == "cosine":
        return ScheduleSpec.cosine(eta0, T)
    elif kind == "constant":
        return ScheduleSpec.constant(eta0, T)
    elif kind == "inverse_sqrt":
        return ScheduleSpec.inverse_sqrt(eta0, alpha, T)
    elif kind == "inverse_linear":
        return ScheduleSpec.inverse_linear(eta0, alpha, T)
    elif kind == "stagewise":
        milestones = sorted({m for m in (T // 2, 3 * T // 4) if 0 < m < T})
        return ScheduleSpec.stagewise_decay(eta0, T, milestones, STAGEWISE_FACTOR)
    elif kind == "poly_pl":
        if mu is None:
            raise CapabilityError("poly_pl needs an objective with a PL constant")
        return ScheduleSpec.poly_pl(L, a, mu, T)
    elif kind == "cosine_restart":
        r, l = (restart.r, restart.l) if restart else (1.0, 0)  # noqa: E741
        return ScheduleSpec.cosine_restart(eta0, T, r, l)
    else:
        raise ParameterError(f"Unknown schedule kind: {kind}")


def _start_point(obj: BaseObjective, settings: StudySettings) -> np.ndarray | None:
    if settings.random_start:
        return None
    if settings.x1 is not None:
        return np.asarray(settings.x1, dtype=np.float64)
    return obj.default_start()


def _summarize(values: np.ndarray) -> tuple[float, float, float]:
    """(mean, std with ddof=1, 95% normal-approximation half-width)."""
    n = values.size
    if np.all(values == values[0]):
        mean, std = float(values[0]), 0.0
    else:
        mean, std = float(np.mean(values)), float(np.std(values, ddof=1))
    return mean, std, Z_95 * std / math.sqrt(n)


def chunk_size(n_seeds: int, jobs: int) -> int:
    """Seeds per batch so that each worker runs a single batch."""
    return max(1, math.ceil(n_seeds / max(1, jobs)))


def _run_chunks(
    obj: BaseObjective,
    oracle: NoiseOracle,
    eta: np.ndarray,
    x1: np.ndarray | None,
    seeds: list[int],
    jobs: int,
    **engine_kwargs,
) -> list[BatchOutcome]:
    size = chunk_size(len(seeds), jobs)
    chunks = [seeds[i : i + size] for i in range(0, len(seeds), size)]

    def work(chunk: list[int]) -> BatchOutcome:
        return run_batch(obj, oracle, eta, x1, chunk, **engine_kwargs)

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        outcomes = list(pool.map(work, chunks))

    diverged = sorted((s, t) for o in outcomes for s, t in o.diverged.items())
    if diverged:
        raise EnsembleDivergenceError(
            seeds=[s for s, _ in diverged], iterations=[t for _, t in diverged]
        )
    return outcomes


def run_ensemble(
    obj: BaseObjective,
    oracle: NoiseOracle,
    schedule: ScheduleSpec,
    T: int | None = None,
    n_seeds: int = 1,
    base_seed: int = 0,
    settings: StudySettings | None = None,
    level: float | None = None,
) -> EnsembleResult:
    """Run seeds base_seed .. base_seed + n_seeds − 1 and aggregate their final gaps."""
    if n_seeds < 1:
        raise ParameterError(f"n_seeds must be >= 1, got {n_seeds}")
    settings = settings or StudySettings()
    T = schedule.T if T is None else T
    first_index = schedule.default_first_index
    eta = step_sequence(schedule, T, first_index)
    seeds = list(range(base_seed, base_seed + n_seeds))

    outcomes = _run_chunks(
        obj,
        oracle,
        eta,
        _start_point(obj, settings),
        seeds,
        settings.jobs,
        momentum=settings.momentum,
        first_index=first_index,
        curve_every=settings.curve_every,
    )
    final_gaps = np.concatenate([o.final_gaps for o in outcomes])
    mean, std, ci = _summarize(final_gaps)

    curve = None
    if settings.curve_every > 0:
        gaps = np.concatenate([o.curve_gaps for o in outcomes], axis=0)
        steps = outcomes[0].curve_steps.tolist()
        curve = list(zip(steps, np.mean(gaps, axis=0).tolist(), strict=True))

    record = EnsembleRecord(
        schedule=schedule.kind,
        T=T,
        mean_gap=mean,
        std_gap=std,
        ci95_halfwidth=ci,
        n_seeds=n_seeds,
        level=level,
        final_gaps=final_gaps,
        curve=curve,
    )
    return EnsembleResult(records=[record])


def run_weighted_ensemble(
    obj: BaseObjective,
    oracle: NoiseOracle,
    schedule: ScheduleSpec,
    n_seeds: int,
    base_seed: int = 0,
    settings: StudySettings | None = None,
) -> EnsembleRecord:
    """Ensemble of Σ η_t‖∇f(x_t)‖² / Σ η_t, the per-seed expectation over the weighted iterate."""
    if n_seeds < 1:
        raise ParameterError(f"n_seeds must be >= 1, got {n_seeds}")
    settings = settings or StudySettings()
    first_index = schedule.default_first_index
    eta = step_sequence(schedule, schedule.T, first_index)
    total = math.fsum(eta.tolist())
    seeds = list(range(base_seed, base_seed + n_seeds))

    outcomes = _run_chunks(
        obj,
        oracle,
        eta,
        _start_point(obj, settings),
        seeds,
        settings.jobs,
        momentum=settings.momentum,
        first_index=first_index,
        keep_trace=True,
    )
    grad_sq = np.concatenate([o.grad_sq for o in outcomes], axis=0)
    weighted = np.array([math.fsum((row * eta).tolist()) / total for row in grad_sq])
    mean, std, ci = _summarize(weighted)
    return EnsembleRecord(
        schedule=schedule.kind,
        T=schedule.T,
        mean_gap=mean,
        std_gap=std,
        ci95_halfwidth=ci,
        n_seeds=n_seeds,
        final_gaps=weighted,
    )


def fit_rate(Ts: Sequence[int], mean_gaps: Sequence[float]) -> RateFit:
    """Least-squares line through (ln T, ln gap)."""
    if len(Ts) != len(mean_gaps):
        raise ParameterError("Ts and mean_gaps must have the same length")
    if len(Ts) < 3:
        raise ParameterError(f"fit_rate needs at least 3 points, got {len(Ts)}")
    x = np.asarray(Ts, dtype=np.float64)
    y = np.asarray(mean_gaps, dtype=np.float64)
    if np.any(x <= 0):
        raise DomainError("horizons must be positive")
    if np.any(~(y > 0)):
        raise DomainError("mean gaps must be positive to fit a log-log rate")

    log_t, log_gap = np.log(x), np.log(y)
    slope, intercept = np.polyfit(log_t, log_gap, 1)
    residual = log_gap - (slope * log_t + intercept)
    ss_res = float(np.sum(residual**2))
    ss_tot = float(np.sum((log_gap - log_gap.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return RateFit(slope=float(slope), intercept=float(intercept), r_squared=r_squared)


def _report(
    row: StudyRow, logger: "RunLogger | None", verbose: "VerbosePrinter | None"
) -> StudyRow:
    if logger:
        logger.log(row)
    if verbose:
        verbose.print_record(row)
    return row


########################################################
########    Studies                            #########
########################################################


def _window_mean(curve: list[tuple[int, float]], lo: int, hi: int) -> float:
    """Mean of the curve values with lo <= step < hi, or the first value past lo if none."""
    values = [value for step, value in curve if lo <= step < hi]
    if values:
        return math.fsum(values) / len(values)
    for step, value in curve:
        if step >= lo:
            return value
    return curve[-1][1]


def noise_adaptation_study(
    obj: BaseObjective,
    levels: Sequence[float] = DEFAULT_LEVELS,
    schedules: Sequence[str] = DEFAULT_STUDY_SCHEDULES,
    T: int = 10_000,
    n_seeds: int = 100,
    base_seed: int = 0,
    settings: StudySettings | None = None,
    logger: "RunLogger | None" = None,
    verbose: "VerbosePrinter | None" = None,
) -> StudyReport:
    """
    Run every schedule at every additive noise level σ with hyperparameters fixed once for
    the noiseless case (η0 = 1/L); the schedules are not retuned as σ grows.

    At the largest level the report checks that constant-step SGD plateaus over the last
    quarter of the run and that exponential and cosine end at least 2× lower.
    """
    settings = settings or StudySettings()
    if settings.curve_every <= 0:
        settings = replace(settings, curve_every=max(1, T // 100))
    specs = {
        kind: study_schedule(
            kind,
            T,
            obj.L,
            obj.mu,
            0.0,
            beta=settings.beta,
            alpha=settings.alpha,
            c=settings.c or 1.0,
            restart=settings.restart,
        )
        for kind in schedules
    }

    report = StudyReport(name="noise-adaptation")
    for level in levels:
        if level == 0:
            oracle = NoiseOracle.exact(obj.dim)
        else:
            oracle = NoiseOracle.additive_gaussian(level, obj.dim)
        for kind, spec in specs.items():
            record = run_ensemble(obj, oracle, spec, spec.T, n_seeds, base_seed, settings, level)
            rec = record.records[0]
            row = StudyRow(
                level=level,
                schedule=kind,
                T=spec.T,
                mean_gap=rec.mean_gap,
                ci95=rec.ci95_halfwidth,
                curve=rec.curve,
            )
            report.rows.append(_report(row, logger, verbose))

    report.checks.extend(_noise_adaptation_checks(report.rows, levels))
    return report


def _noise_adaptation_checks(rows: list[StudyRow], levels: Sequence[float]) -> list[CheckResult]:
    top = max(levels) if levels else 0.0
    if top <= 0:
        return []
    at_top = {row.schedule: row for row in rows if row.level == top}
    constant = at_top.get("constant")
    if constant is None:
        return []

    checks = []
    first = constant.curve[0][0]
    half, three_quarters = first + constant.T // 2, first + (3 * constant.T) // 4
    third = _window_mean(constant.curve, half, three_quarters)
    last = _window_mean(constant.curve, three_quarters, first + constant.T + 1)
    ratio = last / third if third > 0 else 1.0
    checks.append(
        CheckResult(
            name=f"constant plateaus at sigma={top:g}",
            passed=ratio >= PLATEAU_RATIO,
            detail=f"last/third quarter mean gap {ratio:.4g} (>= {PLATEAU_RATIO})",
        )
    )
    for kind in ("exponential", "cosine"):
        row = at_top.get(kind)
        if row is None:
            continue
        checks.append(
            CheckResult(
                name=f"{kind} beats constant at sigma={top:g}",
                passed=ADAPTIVE_ADVANTAGE * row.mean_gap <= constant.mean_gap,
                detail=f"{row.mean_gap:.4g} vs constant {constant.mean_gap:.4g}",
            )
        )
    return checks


def bound_validation(
    obj: BaseObjective,
    oracle: NoiseOracle,
    schedule: str,
    Ts: Sequence[int],
    n_seeds: int = 100,
    base_seed: int = 0,
    settings: StudySettings | None = None,
    nonconvex: bool = False,
    logger: "RunLogger | None" = None,
    verbose: "VerbosePrinter | None" = None,
) -> StudyReport:
    """
    Compare empirical ensembles with the matching theorem bound at every horizon in Ts.

    PL mode compares the mean final gap E f(x_{T+1}) − f* with the exponential, cosine,
    polynomial or restart bound, using η0 = 1/(L(1+a)). Non-convex mode compares the
    weighted expectation of ‖∇f‖² with the exponential or cosine bound, using
    η0 = 1/(cL(1+a)), c > 1. A row is within bound when mean + ci95 <= bound.
    """
    settings = settings or StudySettings()
    if n_seeds < CI_MIN_SEEDS:
        raise ParameterError(f"bound validation needs n_seeds >= {CI_MIN_SEEDS}, got {n_seeds}")
    if settings.random_start:
        raise ParameterError("bound validation needs a fixed start point")
    theorems = NONCONVEX_THEOREMS if nonconvex else PL_THEOREMS
    if schedule not in theorems:
        raise ParameterError(
            f"No bound for schedule {schedule} (supported: {sorted(theorems)})"
        )
    if not nonconvex and obj.mu is None:
        raise CapabilityError(f"{obj.name} has no PL constant; PL bounds do not apply")

    c = settings.c or (NONCONVEX_C if nonconvex else 1.0)
    a, b = oracle.a, oracle.b
    x1 = _start_point(obj, settings)
    delta1 = float(obj.value_at(x1) - obj.f_star)
    evaluate = get_bound(theorems[schedule])

    report = StudyReport(name="bound-validation")
    for T in Ts:
        spec = study_schedule(
            schedule,
            T,
            obj.L,
            obj.mu,
            a,
            beta=settings.beta,
            alpha=settings.alpha,
            c=c,
            restart=settings.restart,
        )
        inputs = BoundInputs(
            L=obj.L,
            mu=obj.mu if obj.mu is not None else 1.0,
            a=a,
            b=b,
            T=spec.T,
            beta=spec.beta if spec.beta is not None else 1.0,
            c=c,
            delta1=delta1,
            restart=spec.restart,
        )
        bound = evaluate(inputs).total
        if nonconvex:
            rec = run_weighted_ensemble(obj, oracle, spec, n_seeds, base_seed, settings)
        else:
            rec = run_ensemble(obj, oracle, spec, spec.T, n_seeds, base_seed, settings).records[0]
        within = rec.mean_gap + rec.ci95_halfwidth <= bound
        row = StudyRow(
            level=oracle.sigma,
            schedule=schedule,
            T=spec.T,
            mean_gap=rec.mean_gap,
            ci95=rec.ci95_halfwidth,
            bound=bound,
            within_bound=within,
        )
        report.rows.append(_report(row, logger, verbose))
        report.checks.append(
            CheckResult(
                name=f"{theorems[schedule]} T={spec.T}",
                passed=within,
                detail=f"{rec.mean_gap:.4g} + {rec.ci95_halfwidth:.2g} <= {bound:.4g}",
            )
        )
    return report


def _rate_checks(
    name: str, fit: RateFit, max_slope: float | None, min_r2: float
) -> list[CheckResult]:
    checks = [
        CheckResult(
            name=f"{name} r^2",
            passed=fit.r_squared >= min_r2,
            detail=f"{fit.r_squared:.4f} >= {min_r2}",
        )
    ]
    if max_slope is not None:
        checks.append(
            CheckResult(
                name=f"{name} slope",
                passed=fit.slope <= max_slope,
                detail=f"{fit.slope:.4f} <= {max_slope}",
            )
        )
    return checks


def fit_given_rates(
    Ts: Sequence[int],
    gaps: Sequence[float],
    max_slope: float | None = None,
    min_r2: float = DEFAULT_MIN_R2,
) -> StudyReport:
    """Rate study on supplied (T, gap) pairs instead of simulated ensembles."""
    fit = fit_rate(Ts, gaps)
    report = StudyReport(name="rates", fits={"synthetic": fit})
    report.checks.extend(_rate_checks("synthetic", fit, max_slope, min_r2))
    return report


def rates_study(
    obj: BaseObjective,
    oracle: NoiseOracle,
    schedules: Sequence[str],
    Ts: Sequence[int],
    n_seeds: int = 100,
    base_seed: int = 0,
    settings: StudySettings | None = None,
    max_slope: float | None = None,
    min_r2: float = DEFAULT_MIN_R2,
    logger: "RunLogger | None" = None,
    verbose: "VerbosePrinter | None" = None,
) -> StudyReport:
    """
    Fit ln(mean gap) against ln T for each schedule, hyperparameters untouched across T
    (η0 = 1/(L(1+a))). Slopes are checked against max_slope, or per schedule against
    DEFAULT_MAX_SLOPES when max_slope is None.
    """
    settings = settings or StudySettings()
    report = StudyReport(name="rates")
    for kind in schedules:
        gaps = []
        for T in Ts:
            spec = study_schedule(
                kind,
                T,
                obj.L,
                obj.mu,
                oracle.a,
                beta=settings.beta,
                alpha=settings.alpha,
                c=settings.c or 1.0,
                restart=settings.restart,
            )
            rec = run_ensemble(obj, oracle, spec, spec.T, n_seeds, base_seed, settings).records[0]
            row = StudyRow(
                level=oracle.sigma,
                schedule=kind,
                T=spec.T,
                mean_gap=rec.mean_gap,
                ci95=rec.ci95_halfwidth,
            )
            report.rows.append(_report(row, logger, verbose))
            gaps.append(rec.mean_gap)
        fit = fit_rate([row.T for row in report.rows if row.schedule == kind], gaps)
        report.fits[kind] = fit
        limit = max_slope if max_slope is not None else DEFAULT_MAX_SLOPES.get(kind)
        report.checks.extend(_rate_checks(kind, fit, limit, min_r2))
    return report


def report_text(report: StudyReport) -> str:
    """Plain-text summary of a study report."""
    lines = [f"study: {report.name}", f"status: {'PASS' if report.passed else 'FAIL'}", ""]
    for row in report.rows:
        level = "-" if row.level is None else f"{row.level:g}"
        line = (
            f"level={level} schedule={row.schedule} T={row.T} "
            f"mean_gap={row.mean_gap:.6g} ci95={row.ci95:.3g}"
        )
        if row.bound is not None:
            line += f" bound={row.bound:.6g} within_bound={row.within_bound}"
        lines.append(line)
    if report.fits:
        lines.append("")
        for name, fit in report.fits.items():
            lines.append(
                f"fit {name}: slope={fit.slope:.6g} intercept={fit.intercept:.6g} "
                f"r_squared={fit.r_squared:.6g}"
            )
    if report.checks:
        lines.append("")
        for check in report.checks:
            lines.append(f"[{'pass' if check.passed else 'FAIL'}] {check.name}: {check.detail}")
    return "\n".join(lines) + "\n"
