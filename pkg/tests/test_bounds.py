"""Tests for theorem bound evaluators and lemma verifiers."""

import math
from dataclasses import replace

import pytest

from adaptsgd.core.bounds import (
    NOISE,
    TRANSIENT,
    bound_cos_noncvx,
    bound_cos_pl,
    bound_exp_noncvx,
    bound_exp_pl,
    bound_poly_pl,
    bound_restart_pl,
    get_bound,
    noise_constant_ratio,
    verify_lemma2,
    verify_lemma3,
    verify_lemma4,
    verify_lemma5,
    verify_lemma6,
)
from adaptsgd.core.errors import DomainError, ParameterError, PreconditionError
from adaptsgd.core.types import BoundInputs, RestartParams


class TestExponentialPLBound:
    """Tests for bound_exp_pl."""

    def test_reference_value(self):
        inputs = BoundInputs(L=1.0, mu=0.5, a=0.0, b=0.0, T=100, beta=2.0, delta1=1.0)
        c_beta = math.exp(2.0 / math.log(50.0))
        assert c_beta == pytest.approx(1.66734, rel=1e-4)
        bound = bound_exp_pl(inputs)
        assert bound.total == pytest.approx(c_beta * math.exp(-34.5 / math.log(50.0)))
        assert bound.total == pytest.approx(2.464e-4, rel=1e-3)
        assert bound.term(NOISE) == 0.0

    def test_zero_inputs(self):
        inputs = BoundInputs(mu=0.5, T=100, beta=2.0, b=0.0, delta1=0.0)
        assert bound_exp_pl(inputs).total == 0.0

    def test_beta_equals_horizon_is_vacuous(self):
        inputs = BoundInputs(mu=0.5, T=10, beta=10.0, b=1.0, delta1=1.0)
        assert math.isinf(bound_exp_pl(inputs).total)

    def test_as_printed_differs_with_relative_noise(self):
        inputs = BoundInputs(L=2.0, mu=0.5, a=1.0, T=100, beta=2.0, delta1=1.0)
        assert bound_exp_pl(inputs, as_printed=True).total < bound_exp_pl(inputs).total

    def test_preconditions(self):
        with pytest.raises(PreconditionError) as excinfo:
            bound_exp_pl(BoundInputs(T=2, beta=3.0))
        assert excinfo.value.hypothesis == "T >= max(3, beta)"
        with pytest.raises(PreconditionError):
            bound_exp_pl(BoundInputs(T=10, beta=0.5))


class TestCosinePLBound:
    """Tests for bound_cos_pl and noise_constant_ratio."""

    def test_transient_only(self):
        inputs = BoundInputs(L=1.0, mu=1.0, a=0.0, b=0.0, T=11, delta1=1.0)
        assert bound_cos_pl(inputs).total == pytest.approx(math.exp(-5.0))
        assert bound_cos_pl(inputs).total == pytest.approx(6.7379e-3, rel=1e-4)

    def test_noise_only(self):
        inputs = BoundInputs(L=1.0, mu=1.0, a=0.0, b=1.0, T=10, delta1=0.0)
        expected = math.pi**4 / 320000.0 * (800.0 ** (4 / 3) + 600.0 ** (5 / 3))
        assert bound_cos_pl(inputs).total == pytest.approx(expected, rel=1e-12)
        assert bound_cos_pl(inputs).total == pytest.approx(15.253, rel=1e-4)

    def test_zero_inputs(self):
        assert bound_cos_pl(BoundInputs(T=10, b=0.0, delta1=0.0)).total == 0.0

    def test_proof_form_ratio(self):
        inputs = BoundInputs(mu=0.1, b=1.0, T=50)
        ratio = noise_constant_ratio(inputs)
        assert 1.0 <= ratio <= math.exp(4.0 / 3.0) / 2.0
        assert bound_cos_pl(inputs, proof_form=True).term(TRANSIENT) == bound_cos_pl(
            inputs
        ).term(TRANSIENT)

    def test_precondition(self):
        with pytest.raises(PreconditionError):
            bound_cos_pl(BoundInputs(T=1))


class TestNonconvexBounds:
    """Tests for the non-convex evaluators."""

    def test_exponential_reference(self):
        inputs = BoundInputs(L=1.0, c=2.0, a=0.0, beta=1.0, T=101, delta1=1.0, b=1.0)
        expected = 6.0 * math.log(101.0) / 100.0 + 101.0 / 200.0
        assert bound_exp_noncvx(inputs).total == pytest.approx(expected)
        assert bound_exp_noncvx(inputs).total == pytest.approx(0.78191, rel=1e-5)

    def test_cosine_reference_near_boundary(self):
        inputs = BoundInputs(L=1.0, c=1.0 + 1e-12, a=0.0, T=101, delta1=1.0, b=1.0)
        assert bound_cos_noncvx(inputs).total == pytest.approx(0.094435, rel=1e-5)

    def test_zero_inputs(self):
        inputs = BoundInputs(T=101, b=0.0, delta1=0.0)
        assert bound_exp_noncvx(inputs).total == 0.0
        assert bound_cos_noncvx(inputs).total == 0.0

    def test_preconditions(self):
        with pytest.raises(PreconditionError):
            bound_cos_noncvx(BoundInputs(c=1.0, T=10))
        with pytest.raises(PreconditionError):
            bound_exp_noncvx(BoundInputs(T=5, beta=5.0))


class TestPolyPLBound:
    """Tests for bound_poly_pl."""

    def test_saturated_condition(self):
        inputs = BoundInputs(L=1.0, mu=1.0, a=0.0, b=0.0, T=10, delta1=1.0)
        assert bound_poly_pl(inputs).total == 0.0

    def test_transient(self):
        inputs = BoundInputs(L=1.0, mu=0.5, a=0.0, b=0.0, T=10, delta1=1.0)
        assert bound_poly_pl(inputs).total == pytest.approx(0.01)

    def test_noise_terms(self):
        inputs = BoundInputs(L=1.0, mu=1.0, a=0.0, b=1.0, T=10, delta1=1.0)
        bound = bound_poly_pl(inputs)
        assert bound.total == pytest.approx(0.205)
        assert bound.term("noise-early") == pytest.approx(0.2)

    def test_precondition(self):
        with pytest.raises(PreconditionError):
            bound_poly_pl(BoundInputs(L=1.0, mu=2.0, T=10))


class TestRestartBound:
    """Tests for bound_restart_pl."""

    def test_reference_value(self):
        inputs = BoundInputs(
            L=1.0, mu=1.0, a=0.0, b=1.0, delta1=1.0, restart=RestartParams(T0=10, r=1.0, l=1)
        )
        assert 6.0 ** (5 / 3) * math.pi**4 / 32.0 == pytest.approx(60.307, rel=1e-4)
        assert bound_restart_pl(inputs).total == pytest.approx(15.967, rel=1e-4)

    def test_noiseless_is_pure_contraction(self):
        inputs = BoundInputs(
            L=1.0, mu=1.0, b=0.0, delta1=1.0, restart=RestartParams(T0=10, r=1.0, l=2)
        )
        expected = math.exp(-0.5 * (30 - 2 - 1))
        assert bound_restart_pl(inputs).total == pytest.approx(expected, rel=1e-12)

    def test_closed_form_matches_recursion(self):
        inputs = BoundInputs(
            L=2.0, mu=0.5, a=0.5, b=0.3, delta1=2.0, restart=RestartParams(T0=20, r=1.0, l=3)
        )
        closed = bound_restart_pl(inputs).total
        recursive = bound_restart_pl(inputs, recursion=True).total
        assert closed == pytest.approx(recursive, rel=1e-10)

    def test_growing_stages(self):
        inputs = BoundInputs(mu=1.0, b=1.0, delta1=1.0, restart=RestartParams(T0=10, r=2.0, l=2))
        assert bound_restart_pl(inputs).total > 0.0

    def test_needs_restart_parameters(self):
        with pytest.raises(ParameterError):
            bound_restart_pl(BoundInputs())
        with pytest.raises(PreconditionError):
            bound_restart_pl(BoundInputs(restart=RestartParams(T0=1)))


# one valid input set per theorem, with and without relative noise
BOUND_CASES = [
    ("exp-pl", BoundInputs(L=1.0, mu=0.5, T=100, beta=2.0)),
    ("exp-pl", BoundInputs(L=2.0, mu=1.0, a=1.0, T=40, beta=1.0)),
    ("cos-pl", BoundInputs(L=1.0, mu=0.5, T=50)),
    ("cos-pl", BoundInputs(L=2.0, mu=1.0, a=0.5, T=12)),
    ("exp-nc", BoundInputs(L=1.0, T=100, beta=2.0, c=2.0)),
    ("exp-nc", BoundInputs(L=3.0, a=1.0, T=30, beta=5.0, c=1.5)),
    ("cos-nc", BoundInputs(L=1.0, T=50, c=2.0)),
    ("cos-nc", BoundInputs(L=0.5, a=2.0, T=7, c=4.0)),
    ("poly-pl", BoundInputs(L=2.0, mu=0.5, T=50)),
    ("poly-pl", BoundInputs(L=1.0, mu=1.0, a=1.0, T=9)),
    ("restart", BoundInputs(L=1.0, mu=0.5, restart=RestartParams(T0=10, r=1.0, l=2))),
    ("restart", BoundInputs(L=2.0, mu=1.0, a=0.5, restart=RestartParams(T0=5, r=2.0, l=3))),
]
NOISE_LEVELS = (0.0, 0.01, 0.1, 1.0, 10.0)
INITIAL_GAPS = (0.0, 0.25, 1.0, 4.0, 100.0)


class TestBoundInvariants:
    """Tests for properties every theorem bound shares."""

    def test_nondecreasing_in_noise(self):
        for theorem, base in BOUND_CASES:
            for delta1 in INITIAL_GAPS:
                totals = [
                    get_bound(theorem)(replace(base, b=b, delta1=delta1)).total
                    for b in NOISE_LEVELS
                ]
                assert totals == sorted(totals), (theorem, delta1, totals)

    def test_nondecreasing_in_initial_gap(self):
        for theorem, base in BOUND_CASES:
            for b in NOISE_LEVELS:
                totals = [
                    get_bound(theorem)(replace(base, b=b, delta1=delta1)).total
                    for delta1 in INITIAL_GAPS
                ]
                assert totals == sorted(totals), (theorem, b, totals)

    def test_terms_sum_to_total(self):
        for theorem, base in BOUND_CASES:
            for b in NOISE_LEVELS:
                for delta1 in INITIAL_GAPS:
                    bound = get_bound(theorem)(replace(base, b=b, delta1=delta1))
                    values = [term.value for term in bound.terms]
                    assert all(v >= 0.0 for v in values)
                    assert bound.total == pytest.approx(math.fsum(values), rel=1e-15)

    def test_vacuous_bound_total_is_infinite(self):
        bound = bound_exp_pl(BoundInputs(mu=0.5, b=1.0, T=10, beta=10.0))
        assert bound.total == math.inf
        assert all(term.value == math.inf for term in bound.terms)

    def test_exponential_noiseless_decays_geometrically(self):
        for L, mu, a in ((1.0, 0.5, 0.0), (2.0, 1.0, 1.0), (1.0, 1.0, 0.5)):
            kappa = mu / (L * (1.0 + a))
            for beta in (1.0, 2.0):
                for T in (8, 20, 50, 200):
                    inputs = BoundInputs(L=L, mu=mu, a=a, b=0.0, T=T, beta=beta)
                    doubled = bound_exp_pl(replace(inputs, T=2 * T)).total
                    rate = math.exp(-0.69 * kappa * T / (2.0 * math.log(2 * T / beta)))
                    assert 0.0 < doubled <= bound_exp_pl(inputs).total * rate * (1 + 1e-12)

    def test_cosine_noiseless_decays_geometrically(self):
        for L, mu, a in ((1.0, 0.5, 0.0), (2.0, 1.0, 1.0), (1.0, 1.0, 0.5)):
            for T in (2, 10, 50, 200):
                inputs = BoundInputs(L=L, mu=mu, a=a, b=0.0, T=T)
                doubled = bound_cos_pl(replace(inputs, T=2 * T)).total
                rate = math.exp(-mu * T / (2.0 * L * (1.0 + a)))
                assert doubled == pytest.approx(bound_cos_pl(inputs).total * rate, rel=1e-12)
                assert doubled < bound_cos_pl(inputs).total


class TestGetBound:
    """Tests for the get_bound router."""

    def test_routes(self):
        assert get_bound("cos-pl") is bound_cos_pl
        assert get_bound("restart") is bound_restart_pl

    def test_unknown(self):
        with pytest.raises(ParameterError):
            get_bound("sqrt-pl")


class TestLemmaVerifiers:
    """Tests for the lemma verifiers."""

    def test_lemma2(self):
        result = verify_lemma2([1.0, 1.0], [0.0, 0.0], 3.0)
        assert result.direct == result.unrolled == 3.0
        result = verify_lemma2([0.5, 0.5], [1.0, 1.0], 0.0)
        assert result.direct == pytest.approx(1.5)
        assert result.unrolled == pytest.approx(1.5)
        assert result.rel_diff <= 1e-15
        with pytest.raises(DomainError):
            verify_lemma2([-1.0], [0.0], 1.0)

    def test_lemma3(self):
        for T in (1, 3, 4, 1000):
            assert verify_lemma3(T) <= 1e-10

    def test_lemma4(self):
        result = verify_lemma4(1, 3)
        assert result.alpha == pytest.approx(0.69336, rel=1e-5)
        assert result.ratio == pytest.approx(0.7537, rel=1e-3)
        assert result.limit == pytest.approx(2.0 / math.log(3.0))
        assert result.alpha_ok and result.ratio_ok
        large = verify_lemma4(1, 1000)
        assert large.alpha_ok and large.ratio_ok
        with pytest.raises(PreconditionError):
            verify_lemma4(5, 5)

    def test_lemma4_sweep(self):
        for T in range(3, 120):
            for beta in range(1, T):
                result = verify_lemma4(beta, T)
                assert result.alpha_ok and result.ratio_ok, (beta, T)

    def test_lemma5(self):
        assert verify_lemma5(1.0)
        assert verify_lemma5(0.5)
        assert verify_lemma5(2.0)
        with pytest.raises(DomainError):
            verify_lemma5(0.0)

    def test_lemma6(self):
        result = verify_lemma6(2.0, 1.0, 10)
        assert result.lhs == pytest.approx(1.98874, rel=1e-4)
        assert result.rhs == pytest.approx(8.0 * math.exp(-2.0) + 2.0)
        assert result.holds
        geometric = verify_lemma6(0.0, 1.0, 200)
        assert geometric.lhs == pytest.approx(1.0 / (1.0 - math.exp(-1.0)))
        assert geometric.rhs == pytest.approx(3.0)
        for b in (0.01, 0.1, 1.0):
            assert verify_lemma6(4.0 / 3.0, b, 10_000).holds
        with pytest.raises(DomainError):
            verify_lemma6(1.0, 0.0, 10)
