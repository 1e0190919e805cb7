"""
Closed-form convergence bounds for SGD under the exponential, cosine, polynomial and
restarted-cosine schedules, plus numeric checks of the supporting lemmas.

Evaluators are pure functions of BoundInputs. A term whose exponential overflows is
reported as +inf instead of raising; a term with a zero coefficient (b = 0 or Δ1 = 0) is 0
even when its factor is infinite.
"""

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from adaptsgd.core.errors import DomainError, ParameterError, PreconditionError
from adaptsgd.core.schedules import stage_lengths
from adaptsgd.core.types import BoundInputs, BoundTerm, BoundValue, TheoremName
from adaptsgd.utils.special import gamma

__all__ = [
    "BOUND_EVALUATORS",
    "bound_cos_noncvx",
    "bound_cos_pl",
    "bound_exp_noncvx",
    "bound_exp_pl",
    "bound_poly_pl",
    "bound_restart_pl",
    "gamma",
    "get_bound",
    "noise_constant_ratio",
    "verify_lemma2",
    "verify_lemma3",
    "verify_lemma4",
    "verify_lemma5",
    "verify_lemma6",
]

TRANSIENT = "transient"
NOISE = "noise-floor"
LEMMA4_ALPHA_FLOOR = 0.69
LEMMA5_TOL = 1e-12
LEMMA6_REL_TOL = 1e-9
# first noise summand of the cosine bound before its constant is absorbed
PROOF_FORM_FACTOR = 2.0 * math.exp(-4.0 / 3.0)


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _scaled(coefficient: float, factor: float) -> float:
    """coefficient · factor with 0 · inf taken as 0."""
    if coefficient == 0.0:
        return 0.0
    return coefficient * factor


def _two_terms(theorem: str, transient: float, noise: float) -> BoundValue:
    terms = [BoundTerm(TRANSIENT, transient), BoundTerm(NOISE, noise)]
    return BoundValue.from_terms(theorem, terms)


def _check_common(inputs: BoundInputs, need_mu: bool = True) -> None:
    if not inputs.L > 0:
        raise ParameterError(f"L must be positive, got {inputs.L}")
    if need_mu and not inputs.mu > 0:
        raise ParameterError(f"mu must be positive, got {inputs.mu}")
    if inputs.a < 0 or inputs.b < 0 or inputs.delta1 < 0:
        raise ParameterError("a, b and delta1 must be nonnegative")
    if inputs.T < 1:
        raise ParameterError(f"T must be >= 1, got {inputs.T}")


########################################################
########    PL bounds                          #########
########################################################


def bound_exp_pl(inputs: BoundInputs, as_printed: bool = False) -> BoundValue:
    """
    Exponential schedule (η0 = 1/(L(1+a)), α = (β/T)^(1/T)) on a PL function:

        E f(x_{T+1}) − f* ≤ 5L·C(β)/(e²μ²) · ln²(T/β)/T · b
                           + C(β)·exp(−0.69·μ/(L(1+a)) · T/ln(T/β)) · Δ1,

    with C(β) = exp(2μβ / (L(1+a)·ln(T/β))). as_printed=True evaluates the transient
    exponent with L + a in place of L(1+a). β = T makes the bound vacuous (+inf).
    """
    _check_common(inputs)
    L, mu, a, T, beta = inputs.L, inputs.mu, inputs.a, inputs.T, inputs.beta
    if beta < 1:
        raise PreconditionError("beta >= 1")
    if T < max(3, beta):
        raise PreconditionError("T >= max(3, beta)")

    log_ratio = math.log(T / beta)
    if log_ratio == 0.0:
        return _two_terms("exp-pl", _scaled(inputs.delta1, math.inf), _scaled(inputs.b, math.inf))

    c_beta = _exp(2.0 * mu * beta / (L * (1.0 + a) * log_ratio))
    exponent_scale = (L + a) if as_printed else L * (1.0 + a)
    decay = _exp(-0.69 * mu / exponent_scale * T / log_ratio)

    noise = _scaled(inputs.b, 5.0 * L * c_beta / (math.e**2 * mu**2) * log_ratio**2 / T)
    transient = _scaled(inputs.delta1, c_beta * decay)
    return _two_terms("exp-pl", transient, noise)


def bound_cos_pl(inputs: BoundInputs, proof_form: bool = False) -> BoundValue:
    """
    Cosine schedule (η0 = 1/(L(1+a))) on a PL function:

        exp(−μ(T−1)/(2L(1+a)))·Δ1 + π⁴b/(32(1+a)T⁴) · ((8T²/μ)^{4/3} + (6T²/μ)^{5/3}).

    proof_form=True keeps the factor 2·exp(−4/3) on the first noise summand.
    """
    _check_common(inputs)
    L, mu, a, T = inputs.L, inputs.mu, inputs.a, inputs.T
    if T < 2:
        raise PreconditionError("T >= 2")

    transient = _scaled(inputs.delta1, _exp(-mu * (T - 1) / (2.0 * L * (1.0 + a))))
    first = (8.0 * T**2 / mu) ** (4.0 / 3.0)
    if proof_form:
        first *= PROOF_FORM_FACTOR
    second = (6.0 * T**2 / mu) ** (5.0 / 3.0)
    noise = _scaled(inputs.b, math.pi**4 / (32.0 * (1.0 + a) * T**4) * (first + second))
    return _two_terms("cos-pl", transient, noise)


def noise_constant_ratio(inputs: BoundInputs) -> float:
    """Stated over proof-form noise term of the cosine bound; lies in [1, e^{4/3}/2]."""
    stated = bound_cos_pl(inputs).term(NOISE)
    proof = bound_cos_pl(inputs, proof_form=True).term(NOISE)
    if proof == 0.0:
        return 1.0
    return stated / proof


def bound_poly_pl(inputs: BoundInputs) -> BoundValue:
    """
    η_t = min(1/(L(1+a)), (2t+1)/(μ(t+1)²)) on a PL function:

        L²(1+a)b/(2μ³T²) + 2Lb/(μ²T) + Δ1·L²(1+a)²/(μ²T²)·(1 − μ/(L(1+a)))^{L(1+a)/μ}.
    """
    _check_common(inputs)
    L, mu, a, T = inputs.L, inputs.mu, inputs.a, inputs.T
    scale = L * (1.0 + a)
    if mu > scale:
        raise PreconditionError("mu <= L(1+a)")

    base = max(0.0, 1.0 - mu / scale)
    transient = _scaled(inputs.delta1, scale**2 / (mu**2 * T**2) * base ** (scale / mu))
    noise_late = _scaled(inputs.b, L**2 * (1.0 + a) / (2.0 * mu**3 * T**2))
    noise_early = _scaled(inputs.b, 2.0 * L / (mu**2 * T))
    return BoundValue.from_terms(
        "poly-pl",
        [
            BoundTerm(TRANSIENT, transient),
            BoundTerm(NOISE, noise_late),
            BoundTerm("noise-early", noise_early),
        ],
    )


def _restart_constants(inputs: BoundInputs) -> tuple[float, float]:
    c1 = 6.0 ** (5.0 / 3.0) * math.pi**4 * inputs.b / (32.0 * (1.0 + inputs.a))
    c2 = 1.0 / (2.0 * inputs.L * (1.0 + inputs.a))
    return c1, c2


def _stage_noise(c1: float, mu: float, T_i: int) -> float:
    return c1 * ((mu * T_i) ** (-4.0 / 3.0) + mu ** (-5.0 / 3.0) * T_i ** (-2.0 / 3.0))


def bound_restart_pl(inputs: BoundInputs, recursion: bool = False) -> BoundValue:
    """
    Cosine with restarts over stages T_i = round(T0·r^i), i = 0..l.

    For r = 1 the closed form is used (T = (l+1)·T0); otherwise, or with recursion=True,
    the per-stage recursion
        Δ_i ≤ C1(μ^{−4/3}T_i^{−4/3} + μ^{−5/3}T_i^{−2/3}) + exp(−C2μ(T_i−1))·Δ_{i−1}
    is iterated from Δ_{−1} = Δ1, with C1 = 6^{5/3}π⁴b/(32(1+a)) and C2 = 1/(2L(1+a)).
    """
    _check_common(inputs)
    params = inputs.restart
    if params is None:
        raise ParameterError("restart bound needs restart parameters (T0, r, l)")
    if params.T0 < 2:
        raise PreconditionError("T0 >= 2")
    if params.r < 1 or params.l < 0:
        raise PreconditionError("r >= 1 and l >= 0")

    mu = inputs.mu
    c1, c2 = _restart_constants(inputs)

    if params.r == 1.0 and not recursion:
        T0, stages = params.T0, params.l + 1
        total_T = stages * T0
        contraction = _exp(-c2 * mu * (total_T - params.l - 1))
        per_stage = _exp(-c2 * mu * (T0 - 1))
        noise = _stage_noise(c1, mu, T0) * (1.0 - contraction) / (1.0 - per_stage)
        transient = _scaled(inputs.delta1, contraction)
    else:
        noise, transient = 0.0, inputs.delta1
        for T_i in stage_lengths(params.T0, params.r, params.l):
            contraction = _exp(-c2 * mu * (T_i - 1))
            noise = _stage_noise(c1, mu, T_i) + contraction * noise
            transient = contraction * transient
    return _two_terms("restart", transient, noise)


########################################################
########    Non-convex bounds                  #########
########################################################


def bound_exp_noncvx(inputs: BoundInputs) -> BoundValue:
    """
    Exponential schedule with η0 = 1/(cL(1+a)), bound on E‖∇f(x̃_T)‖² for the weighted
    random iterate:  3Lc(a+1)·ln(T/β)/(T−β)·Δ1 + bT/(c(a+1)(T−β)).
    """
    _check_common(inputs, need_mu=False)
    L, a, T, beta, c = inputs.L, inputs.a, inputs.T, inputs.beta, inputs.c
    if c <= 1:
        raise PreconditionError("c > 1")
    if beta < 1:
        raise PreconditionError("beta >= 1")
    if T <= beta:
        raise PreconditionError("T > beta")

    transient = _scaled(inputs.delta1, 3.0 * L * c * (a + 1.0) * math.log(T / beta) / (T - beta))
    noise = _scaled(inputs.b, T / (c * (a + 1.0) * (T - beta)))
    return _two_terms("exp-nc", transient, noise)


def bound_cos_noncvx(inputs: BoundInputs) -> BoundValue:
    """Cosine schedule with η0 = 1/(cL(1+a)):  4Lc(a+1)/(T−1)·Δ1 + 21bT/(4π⁴cL(a+1)(T−1))."""
    _check_common(inputs, need_mu=False)
    L, a, T, c = inputs.L, inputs.a, inputs.T, inputs.c
    if c <= 1:
        raise PreconditionError("c > 1")
    if T < 2:
        raise PreconditionError("T >= 2")

    transient = _scaled(inputs.delta1, 4.0 * L * c * (a + 1.0) / (T - 1))
    noise = _scaled(inputs.b, 21.0 * T / (4.0 * math.pi**4 * c * L * (a + 1.0) * (T - 1)))
    return _two_terms("cos-nc", transient, noise)


BOUND_EVALUATORS: dict[str, Callable[..., BoundValue]] = {
    "exp-pl": bound_exp_pl,
    "cos-pl": bound_cos_pl,
    "exp-nc": bound_exp_noncvx,
    "cos-nc": bound_cos_noncvx,
    "poly-pl": bound_poly_pl,
    "restart": bound_restart_pl,
}


def get_bound(theorem: TheoremName) -> Callable[..., BoundValue]:
    """
    Routes a theorem name to its evaluator.
    Currently supported: ['exp-pl', 'cos-pl', 'exp-nc', 'cos-nc', 'poly-pl', 'restart']
    """
    try:
        return BOUND_EVALUATORS[theorem]
    except KeyError:
        raise ParameterError(
            f"Unknown theorem: {theorem}. Supported: {list(BOUND_EVALUATORS)}"
        ) from None


########################################################
########    Lemma verifiers                    #########
########################################################


@dataclass(frozen=True)
class Lemma2Result:
    direct: float
    unrolled: float

    @property
    def rel_diff(self) -> float:
        scale = max(abs(self.direct), abs(self.unrolled))
        return 0.0 if scale == 0.0 else abs(self.direct - self.unrolled) / scale


@dataclass(frozen=True)
class Lemma4Result:
    alpha: float
    ratio: float
    limit: float
    alpha_ok: bool
    ratio_ok: bool


@dataclass(frozen=True)
class Lemma6Result:
    lhs: float
    rhs: float
    holds: bool


def verify_lemma2(A: Sequence[float], B: Sequence[float], X1: float) -> Lemma2Result:
    """Iterate X_{k+1} = A_k X_k + B_k and compare with Π A_i·X1 + Σ_i Π_{j>i} A_j·B_i."""
    if len(A) != len(B):
        raise ParameterError(f"A and B must have equal length, got {len(A)} and {len(B)}")
    if any(v < 0 for v in A) or any(v < 0 for v in B) or X1 < 0:
        raise DomainError("the unrolled recursion needs nonnegative A, B and X1")

    direct = float(X1)
    for a_k, b_k in zip(A, B, strict=True):
        direct = a_k * direct + b_k

    suffix = 1.0
    tail = []
    for a_k, b_k in zip(reversed(A), reversed(B), strict=True):
        tail.append(suffix * b_k)
        suffix *= a_k
    unrolled = suffix * X1 + math.fsum(tail)
    return Lemma2Result(direct=direct, unrolled=unrolled)


def verify_lemma3(T: int) -> float:
    """|Σ_{t=1}^T cos(tπ/T) + 1|."""
    if T < 1:
        raise DomainError(f"T must be >= 1, got {T}")
    t = np.arange(1, T + 1, dtype=np.float64)
    return abs(math.fsum(np.cos(t * math.pi / T).tolist()) + 1.0)


def verify_lemma4(beta: float, T: int) -> Lemma4Result:
    """α = (β/T)^{1/T} ≥ 0.69 and α^{T+1}/(1−α) ≤ 2β/ln(T/β)."""
    if T < 3:
        raise PreconditionError("T >= 3")
    if not 1 <= beta < T:
        raise PreconditionError("1 <= beta < T")
    log_alpha = math.log(beta / T) / T
    alpha = math.exp(log_alpha)
    ratio = math.exp((T + 1) * log_alpha) / -math.expm1(log_alpha)
    limit = 2.0 * beta / math.log(T / beta)
    return Lemma4Result(
        alpha=alpha,
        ratio=ratio,
        limit=limit,
        alpha_ok=alpha >= LEMMA4_ALPHA_FLOOR,
        ratio_ok=ratio <= limit,
    )


def verify_lemma5(x: float) -> bool:
    """1 − x ≤ ln(1/x)."""
    if not x > 0:
        raise DomainError(f"x must be positive, got {x}")
    return 1.0 - x <= -math.log(x) + LEMMA5_TOL


def verify_lemma6(a: float, b: float, T: int) -> Lemma6Result:
    """Σ_{t=0}^T exp(−bt)·t^a ≤ 2e^{−a}(a/b)^a + Γ(a+1)/b^{a+1}, with 0⁰ = 1."""
    if not b > 0:
        raise DomainError(f"b must be positive, got {b}")
    if a < 0:
        raise DomainError(f"a must be nonnegative, got {a}")
    if T < 0:
        raise DomainError(f"T must be nonnegative, got {T}")
    t = np.arange(T + 1, dtype=np.float64)
    lhs = math.fsum((np.exp(-b * t) * np.power(t, a)).tolist())
    rhs = 2.0 * math.exp(-a) * (a / b) ** a + gamma(a + 1.0) / b ** (a + 1.0)
    return Lemma6Result(lhs=lhs, rhs=rhs, holds=lhs <= rhs + LEMMA6_REL_TOL * rhs)
