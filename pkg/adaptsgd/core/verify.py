"""
Invariant suites run by `adaptsgd verify`. Each suite returns one CheckResult per property.
"""

import math
from collections.abc import Callable

import numpy as np

from adaptsgd.core.bounds import (
    bound_restart_pl,
    gamma,
    verify_lemma2,
    verify_lemma3,
    verify_lemma4,
    verify_lemma5,
    verify_lemma6,
)
from adaptsgd.core.optimizer import sgd_restart_run, sgd_run
from adaptsgd.core.schedules import ScheduleSpec, schedule_sum
from adaptsgd.core.types import (
    BoundInputs,
    CheckResult,
    RestartParams,
    RunConfig,
    RunTrace,
    SuiteName,
)
from adaptsgd.problems import (
    BaseObjective,
    NoiseOracle,
    estimate_smoothness,
    finite_difference_gradient,
    pl_ratio,
    polar_pl_objective,
    quadratic_objective,
)
from adaptsgd.problems.polar import POLAR_MU
from adaptsgd.utils.rng import StreamBatch

LEMMA3_TOL = 1e-10
GAMMA_TOL = 1e-10
LEMMA2_TOL = 1e-12
COSINE_SUM_TOL = 1e-12
PL_TOL = 1e-9
GRADIENT_TOL = 1e-6
DESCENT_TOL = 1e-12
SECOND_MOMENT_TOL = 0.01
UNBIASED_SE = 4.0
NOISE_LANES = 100_000
NOISE_ROUNDS = 10
LINEAR_RATE_T = 2**14
LINEAR_RATE_GAP = 1e-6


def _check(name: str, passed: bool, detail: str = "") -> CheckResult:
    return CheckResult(name=name, passed=bool(passed), detail=detail)


########################################################
########    lemmas                             #########
########################################################


def lemma_checks() -> list[CheckResult]:
    checks = []

    Ts = np.unique(np.round(np.logspace(0, 6, 200)).astype(np.int64))
    worst = max(verify_lemma3(int(T)) for T in Ts)
    checks.append(
        _check("cosine sum of cos(t*pi/T) = -1", worst <= LEMMA3_TOL, f"max residual {worst:.3g}")
    )

    failures = 0
    for T in range(3, 1001):
        for beta in range(1, T):
            res = verify_lemma4(beta, T)
            failures += not (res.alpha_ok and res.ratio_ok)
    checks.append(
        _check("alpha >= 0.69 and tail ratio bound", failures == 0, f"{failures} failures")
    )

    xs = np.logspace(-6, 6, 1201)
    bad = [float(x) for x in xs if not verify_lemma5(float(x))]
    checks.append(_check("1 - x <= ln(1/x)", not bad, f"{len(bad)} failures"))

    root_pi = math.sqrt(math.pi)
    gamma_err = max(abs(gamma(1.0) - 1.0), abs(gamma(0.5) - root_pi) / root_pi)
    checks.append(
        _check("gamma accuracy", gamma_err <= GAMMA_TOL, f"max rel error {gamma_err:.3g}")
    )

    bad = []
    for a in (0.0, 0.5, 1.0, 4.0 / 3.0, 5.0 / 3.0, 2.0, 4.0):
        for b in (0.01, 0.1, 0.5, 1.0):
            for T in (10, 100, 10_000):
                if not verify_lemma6(a, b, T).holds:
                    bad.append((a, b, T))
    checks.append(_check("power-exponential sum bound", not bad, f"{len(bad)} failures"))

    stream = StreamBatch.from_seed(2024)
    worst = 0.0
    for _ in range(20):
        A = [2.0 * float(stream.uniform()[0]) for _ in range(50)]
        B = [2.0 * float(stream.uniform()[0]) for _ in range(50)]
        X1 = 2.0 * float(stream.uniform()[0])
        worst = max(worst, verify_lemma2(A, B, X1).rel_diff)
    checks.append(
        _check("linear recursion unrolling", worst <= LEMMA2_TOL, f"max rel diff {worst:.3g}")
    )

    worst = 0.0
    for T in range(2, 1001):
        spec = ScheduleSpec.cosine(1.0, T)
        worst = max(worst, abs(schedule_sum(spec, 1, T, direct=True) - (T - 1) / 2.0) / T)
    checks.append(
        _check(
            "cosine step sum = eta0(T-1)/2", worst <= COSINE_SUM_TOL, f"max error/T {worst:.3g}"
        )
    )
    return checks


########################################################
########    pl                                 #########
########################################################


def _random_points(obj: BaseObjective, n: int, seed: int, r_min: float = 0.1) -> np.ndarray:
    stream = StreamBatch(list(range(seed, seed + n)))
    if obj.dim == 2 and obj.name == "polar_pl":
        radius = r_min + (1.0 - r_min) * stream.uniform()
        angle = 2.0 * math.pi * stream.uniform()
        return np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=-1)
    return np.stack([2.0 * stream.uniform() - 1.0 for _ in range(obj.dim)], axis=-1)


def _gradient_error(obj: BaseObjective, points: np.ndarray) -> float:
    exact = obj.gradient_at(points)
    approx = finite_difference_gradient(obj, points, step=1e-5)
    scale = np.maximum(np.linalg.norm(exact, axis=-1), 1.0)
    return float(np.max(np.linalg.norm(approx - exact, axis=-1) / scale))


def pl_checks() -> list[CheckResult]:
    polar = polar_pl_objective()
    quad = quadratic_objective([1.0, 4.0, 0.5])

    radius = np.linspace(0.01, 1.0, 100)
    angle = np.linspace(0.0, 2.0 * math.pi, 100, endpoint=False)
    rr, aa = np.meshgrid(radius, angle)
    grid = np.stack([(rr * np.cos(aa)).ravel(), (rr * np.sin(aa)).ravel()], axis=-1)
    ratios = pl_ratio(polar, grid)
    low = float(np.min(ratios))
    checks = [
        _check("polar PL ratio >= 1/24 on r <= 1", low >= POLAR_MU - PL_TOL, f"min ratio {low:.6g}")
    ]

    q_points = _random_points(quad, 100, seed=7)
    q_low = float(np.min(pl_ratio(quad, q_points)))
    checks.append(
        _check(
            "quadratic PL ratio >= min lambda", q_low >= quad.mu - PL_TOL, f"min ratio {q_low:.6g}"
        )
    )

    for obj in (polar, quad):
        err = _gradient_error(obj, _random_points(obj, 100, seed=11))
        checks.append(
            _check(
                f"{obj.name} gradient vs finite differences",
                err <= GRADIENT_TOL,
                f"max rel error {err:.3g}",
            )
        )

    smooth = estimate_smoothness(polar, grid)
    checks.append(
        _check(
            "polar smoothness estimate <= L",
            smooth <= polar.L,
            f"estimate {smooth:.4g}, L = {polar.L:g}",
        )
    )
    return checks


########################################################
########    noise                              #########
########################################################


def noise_checks() -> list[CheckResult]:
    quad = quadratic_objective([1.0, 2.0, 3.0, 4.0])
    dim = quad.dim
    oracles = [
        NoiseOracle.exact(dim),
        NoiseOracle.additive_gaussian(1.0, dim),
        NoiseOracle.relative(1.0, dim),
        NoiseOracle.mixed(0.5, 0.5, dim),
    ]
    base = np.array([1.0, -1.0, 0.5, 2.0])
    points = [base * (j + 1) / 5.0 for j in range(10)]
    streams = StreamBatch(list(range(NOISE_LANES)))
    n_draws = NOISE_LANES * NOISE_ROUNDS

    checks = []
    for oracle in oracles:
        worst_moment, worst_bias = 0.0, 0.0
        for x in points:
            grad = quad.gradient_at(x)
            grads = np.tile(grad, (NOISE_LANES, 1))
            sq_sum, coord_sum = 0.0, np.zeros(dim)
            for _ in range(NOISE_ROUNDS):
                noise = oracle.perturb(grads, streams) - grads
                sq_sum += float(np.sum(noise * noise))
                coord_sum += noise.sum(axis=0)
            target = oracle.second_moment(float(grad @ grad))
            moment = sq_sum / n_draws
            if target == 0.0:
                worst_moment = max(worst_moment, moment)
                worst_bias = max(worst_bias, float(np.max(np.abs(coord_sum))))
                continue
            worst_moment = max(worst_moment, abs(moment - target) / target)
            standard_error = math.sqrt(target / dim / n_draws)
            bias = float(np.max(np.abs(coord_sum / n_draws))) / standard_error
            worst_bias = max(worst_bias, bias)
        if oracle.is_exact:
            exact = worst_moment == 0.0 and worst_bias == 0.0
            checks.append(_check("exact oracle returns the gradient", exact))
            continue
        checks.append(
            _check(
                f"{oracle.kind} second moment a|grad|^2 + b",
                worst_moment <= SECOND_MOMENT_TOL,
                f"max rel deviation {worst_moment:.3g}",
            )
        )
        checks.append(
            _check(
                f"{oracle.kind} unbiased",
                worst_bias <= UNBIASED_SE,
                f"max {worst_bias:.3g} standard errors",
            )
        )
    return checks


########################################################
########    descent                            #########
########################################################


def _descent_violation(trace: RunTrace) -> float:
    values = np.append(trace.value_gap, trace.final_gap)
    decrease = values[1:] - values[:-1] + trace.eta / 2.0 * trace.grad_sq
    return float(np.max(decrease))


def descent_checks() -> list[CheckResult]:
    checks = []
    exact2 = NoiseOracle.exact(2)
    for obj in (quadratic_objective([0.5, 1.0]), polar_pl_objective()):
        eta0 = 1.0 / obj.L
        for spec in (ScheduleSpec.exponential(eta0, 500, beta=1.0), ScheduleSpec.cosine(eta0, 500)):
            trace = sgd_run(obj, exact2, RunConfig(x1=obj.default_start(), T=500, schedule=spec))
            worst = _descent_violation(trace)
            checks.append(
                _check(
                    f"{obj.name} {spec.kind} noiseless descent",
                    worst <= DESCENT_TOL,
                    f"max excess {worst:.3g}",
                )
            )

    line = quadratic_objective([1.0])
    spec = ScheduleSpec.cosine(0.5, 200)
    trace = sgd_run(line, NoiseOracle.exact(1), RunConfig(x1=np.array([1.0]), T=200, schedule=spec))
    expected = math.prod((1.0 - eta) ** 2 for eta in trace.eta) * trace.value_gap[0]
    rel = abs(trace.final_gap - expected) / expected
    checks.append(
        _check("1-D quadratic gap = prod (1 - eta_t)^2 gap_1", rel <= 1e-9, f"rel error {rel:.3g}")
    )

    quad = quadratic_objective([0.5, 1.0])
    for spec in (
        ScheduleSpec.exponential(1.0 / quad.L, LINEAR_RATE_T, beta=1.0),
        ScheduleSpec.cosine(1.0 / quad.L, LINEAR_RATE_T),
    ):
        cfg = RunConfig(x1=quad.default_start(), T=LINEAR_RATE_T, schedule=spec)
        trace = sgd_run(quad, exact2, cfg)
        checks.append(
            _check(
                f"noiseless {spec.kind} reaches gap <= 1e-6 at T = 2^14",
                trace.final_gap <= LINEAR_RATE_GAP,
                f"final gap {trace.final_gap:.3g}",
            )
        )

    polar = polar_pl_objective()
    noisy = NoiseOracle.additive_gaussian(0.05, 2)
    single = sgd_restart_run(polar, noisy, 1.0 / polar.L, 300, seed=3)
    cosine = sgd_run(
        polar,
        noisy,
        RunConfig(
            x1=polar.default_start(),
            T=300,
            schedule=ScheduleSpec.cosine(1.0 / polar.L, 300),
            seed=3,
            first_index=0,
        ),
    )
    same = np.array_equal(single.value_gap, cosine.value_gap) and np.array_equal(
        single.final_point, cosine.final_point
    )
    checks.append(_check("single-stage restart equals cosine run", same))

    restart = RestartParams(T0=10, r=1.0, l=2)
    inputs = BoundInputs(L=1.0, mu=1.0, b=0.0, delta1=1.0, restart=restart)
    c2 = 1.0 / 2.0
    expected = math.exp(-1.0 * c2 * (30 - 2 - 1))
    total = bound_restart_pl(inputs).total
    ok = abs(total - expected) <= 1e-12 * expected
    checks.append(_check("restart bound with b = 0 is the transient", ok))
    return checks


SUITES: dict[str, Callable[[], list[CheckResult]]] = {
    "lemmas": lemma_checks,
    "pl": pl_checks,
    "noise": noise_checks,
    "descent": descent_checks,
}


def run_suite(name: SuiteName) -> list[CheckResult]:
    """
    Routes a suite name to its checks.
    Currently supported suites: ['lemmas', 'pl', 'noise', 'descent']
    """
    try:
        suite = SUITES[name]
    except KeyError:
        raise ValueError(f"Unknown suite: {name}. Supported: {list(SUITES)}") from None
    return suite()
