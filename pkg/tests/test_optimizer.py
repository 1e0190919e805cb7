"""Tests for the SGD engine, restarts and the weighted iterate."""

import math

import numpy as np
import pytest

from adaptsgd.core.errors import (
    CapabilityError,
    DegeneratePointError,
    DivergenceError,
    ParameterError,
)
from adaptsgd.core.optimizer import (
    run_batch,
    sample_weighted_iterate,
    sgd_restart_run,
    sgd_run,
    weighted_grad_sq,
)
from adaptsgd.core.schedules import ScheduleSpec, step_sequence
from adaptsgd.core.types import RunConfig, RunTrace
from adaptsgd.problems import NoiseOracle, PolarPLObjective, QuadraticObjective
from adaptsgd.utils.rng import StreamBatch


def _quadratic_1d():
    return QuadraticObjective([1.0]), NoiseOracle.exact(1)


class TestSgdRun:
    """Tests for sgd_run."""

    def test_exact_step_to_minimizer(self):
        obj, oracle = _quadratic_1d()
        cfg = RunConfig(x1=np.array([5.0]), T=1, schedule=ScheduleSpec.constant(1.0, 1))
        trace = sgd_run(obj, oracle, cfg)
        assert trace.final_point[0] == 0.0
        assert trace.final_gap == 0.0

    def test_cosine_hand_recursion(self):
        obj, oracle = _quadratic_1d()
        cfg = RunConfig(x1=np.array([1.0]), T=2, schedule=ScheduleSpec.cosine(1.0, 2))
        trace = sgd_run(obj, oracle, cfg)
        np.testing.assert_allclose(trace.eta, [0.5, 0.0], atol=1e-16)
        assert trace.final_point[0] == pytest.approx(0.5)
        assert trace.final_gap == pytest.approx(0.125)

    def test_single_step_definition(self):
        obj = QuadraticObjective([1.0, 3.0])
        x1 = np.array([0.4, -0.2])
        cfg = RunConfig(x1=x1, T=1, schedule=ScheduleSpec.constant(0.1, 1))
        trace = sgd_run(obj, NoiseOracle.exact(2), cfg)
        np.testing.assert_array_equal(trace.final_point, x1 - 0.1 * obj.gradient_at(x1))

    def test_trace_layout(self):
        obj = QuadraticObjective([1.0, 2.0])
        spec = ScheduleSpec.exponential(0.5, 20, beta=2.0)
        cfg = RunConfig(x1=obj.default_start(), T=20, schedule=spec)
        trace = sgd_run(obj, NoiseOracle.additive_gaussian(0.1, 2), cfg)
        assert trace.T == 20
        assert list(trace.steps) == list(range(1, 21))
        np.testing.assert_array_equal(trace.eta, step_sequence(spec, 20, 1))
        assert trace.value_gap[0] == pytest.approx(1.0)

    def test_seed_reproducibility(self):
        obj = PolarPLObjective()
        oracle = NoiseOracle.additive_gaussian(0.5, 2)
        spec = ScheduleSpec.cosine(0.02, 100)
        runs = [
            sgd_run(obj, oracle, RunConfig(x1=obj.default_start(), T=100, schedule=spec, seed=s))
            for s in (4, 4, 5)
        ]
        np.testing.assert_array_equal(runs[0].value_gap, runs[1].value_gap)
        assert not np.array_equal(runs[0].value_gap, runs[2].value_gap)

    def test_noiseless_descent(self):
        obj = QuadraticObjective([0.5, 1.0])
        spec = ScheduleSpec.cosine(1.0 / obj.L, 200)
        trace = sgd_run(obj, NoiseOracle.exact(2), RunConfig(obj.default_start(), 200, spec))
        assert np.all(np.diff(trace.value_gap) <= 0.0)

    def test_momentum_update(self):
        obj, oracle = _quadratic_1d()
        cfg = RunConfig(
            x1=np.array([1.0]), T=2, schedule=ScheduleSpec.constant(0.5, 2), momentum=0.5
        )
        trace = sgd_run(obj, oracle, cfg)
        # v1 = 1, x2 = 1 - 0.5 * (1 + 0.5) = 0.25; v2 = 0.5 + 0.25 = 0.75,
        # x3 = 0.25 - 0.5 * (0.25 + 0.375) = -0.0625
        assert trace.final_point[0] == pytest.approx(-0.0625)

    def test_divergence(self):
        obj = PolarPLObjective()
        cfg = RunConfig(x1=obj.default_start(), T=200, schedule=ScheduleSpec.constant(1e3, 200))
        with pytest.raises(DivergenceError) as excinfo:
            sgd_run(obj, NoiseOracle.exact(2), cfg)
        assert excinfo.value.seed == 0
        assert excinfo.value.iteration >= 1

    def test_invalid_settings(self):
        obj, oracle = _quadratic_1d()
        spec = ScheduleSpec.constant(0.1, 5)
        with pytest.raises(ParameterError):
            sgd_run(obj, oracle, RunConfig(x1=np.array([1.0]), T=5, schedule=spec, momentum=1.0))
        with pytest.raises(ParameterError):
            sgd_run(obj, oracle, RunConfig(x1=np.array([1.0, 2.0]), T=5, schedule=spec))
        with pytest.raises(ParameterError):
            sgd_run(obj, NoiseOracle.exact(3), RunConfig(x1=np.array([1.0]), T=5, schedule=spec))

    def test_random_start_without_rule(self):
        obj, oracle = _quadratic_1d()
        cfg = RunConfig(x1=None, T=5, schedule=ScheduleSpec.constant(0.1, 5))
        with pytest.raises(CapabilityError):
            sgd_run(obj, oracle, cfg)

    def test_record_iterates(self):
        obj = QuadraticObjective([1.0, 2.0])
        spec = ScheduleSpec.constant(0.1, 10)
        thinned = sgd_run(
            obj,
            NoiseOracle.exact(2),
            RunConfig(obj.default_start(), 10, spec, record_iterates="thinned", thin_every=3),
        )
        assert list(thinned.iterate_steps) == [1, 4, 7, 10]
        np.testing.assert_array_equal(thinned.iterates[0], obj.default_start())
        assert not thinned.has_all_iterates


class TestRunBatch:
    """Tests for the batched engine."""

    def test_lane_independent_of_batch(self):
        obj = PolarPLObjective()
        oracle = NoiseOracle.additive_gaussian(0.3, 2)
        eta = step_sequence(ScheduleSpec.cosine(0.03, 50), 50, 1)
        batch = run_batch(obj, oracle, eta, obj.default_start(), [0, 1, 2])
        alone = run_batch(obj, oracle, eta, obj.default_start(), [1])
        np.testing.assert_array_equal(batch.final_points[1], alone.final_points[0])

    def test_curve_points(self):
        obj = QuadraticObjective([1.0])
        eta = step_sequence(ScheduleSpec.constant(0.1, 10), 10, 1)
        out = run_batch(obj, NoiseOracle.exact(1), eta, np.array([1.0]), [0], curve_every=4)
        assert list(out.curve_steps) == [1, 5, 9, 11]
        assert out.curve_gaps[0, -1] == out.final_gaps[0]

    def test_divergence_is_recorded_per_seed(self):
        obj = PolarPLObjective()
        eta = np.full(100, 1e3)
        out = run_batch(obj, NoiseOracle.exact(2), eta, obj.default_start(), [3, 4])
        assert set(out.diverged) == {3, 4}


class TestRestartRun:
    """Tests for sgd_restart_run."""

    def test_single_stage_equals_cosine(self):
        obj = PolarPLObjective()
        oracle = NoiseOracle.additive_gaussian(0.05, 2)
        restart = sgd_restart_run(obj, oracle, 1.0 / obj.L, 120, seed=9)
        cosine = sgd_run(
            obj,
            oracle,
            RunConfig(
                x1=obj.default_start(),
                T=120,
                schedule=ScheduleSpec.cosine(1.0 / obj.L, 120),
                seed=9,
                first_index=0,
            ),
        )
        np.testing.assert_array_equal(restart.value_gap, cosine.value_gap)
        np.testing.assert_array_equal(restart.final_point, cosine.final_point)

    def test_stage_lengths_and_restarted_steps(self):
        obj, oracle = _quadratic_1d()
        trace = sgd_restart_run(obj, oracle, 0.5, 2, r=2.0, l=1, x1=np.array([1.0]))
        assert trace.T == 6
        assert trace.eta[0] == 0.5
        assert trace.eta[2] == 0.5

    def test_product_of_contractions(self):
        obj, oracle = _quadratic_1d()
        trace = sgd_restart_run(obj, oracle, 0.5, 3, r=1.0, l=1, x1=np.array([1.0]))
        expected = math.prod(1.0 - e for e in trace.eta) ** 2 * 0.5
        assert trace.final_gap == pytest.approx(expected, rel=1e-12)


class TestWeightedIterate:
    """Tests for sample_weighted_iterate and weighted_grad_sq."""

    def _trace(self, eta):
        eta = np.asarray(eta, dtype=float)
        T = eta.size
        return RunTrace(
            eta=eta,
            value_gap=np.zeros(T),
            grad_sq=np.arange(T, dtype=float),
            final_point=np.zeros(1),
            final_gap=0.0,
            iterates=np.arange(T, dtype=float).reshape(T, 1),
            iterate_steps=np.arange(1, T + 1),
        )

    def test_zero_mass_step_never_drawn(self):
        trace = self._trace([0.5, 0.0])
        rng = StreamBatch.from_seed(3)
        assert {sample_weighted_iterate(trace, rng)[0] for _ in range(200)} == {1}

    def test_probabilities_follow_steps(self):
        trace = self._trace([3.0, 1.0])
        rng = StreamBatch.from_seed(11)
        draws = [sample_weighted_iterate(trace, rng)[0] for _ in range(10000)]
        assert draws.count(1) / len(draws) == pytest.approx(0.75, abs=0.02)

    def test_constant_schedule_is_uniform(self):
        stats = pytest.importorskip("scipy.stats")
        trace = self._trace([0.2] * 10)
        rng = StreamBatch.from_seed(5)
        counts = np.zeros(10)
        for _ in range(20000):
            t, _ = sample_weighted_iterate(trace, rng)
            counts[t - 1] += 1
        assert stats.chisquare(counts).pvalue > 0.001

    def test_needs_all_iterates(self):
        trace = self._trace([1.0, 1.0])
        trace.iterates = None
        with pytest.raises(CapabilityError):
            sample_weighted_iterate(trace, StreamBatch.from_seed(0))

    def test_all_zero_steps(self):
        with pytest.raises(DegeneratePointError):
            sample_weighted_iterate(self._trace([0.0, 0.0]), StreamBatch.from_seed(0))

    def test_weighted_grad_sq(self):
        # grad_sq = (0, 1), eta = (3, 1)
        assert weighted_grad_sq(self._trace([3.0, 1.0])) == pytest.approx(0.25)
