"""Tests for test objectives, PL utilities and noise oracles."""

import math

import numpy as np
import pytest

from adaptsgd.core.errors import CapabilityError, DegeneratePointError, ParameterError
from adaptsgd.problems import (
    NoiseOracle,
    PolarPLObjective,
    QuadraticObjective,
    estimate_smoothness,
    finite_difference_gradient,
    get_objective,
    get_oracle,
    pl_ratio,
    sample_gradient,
)
from adaptsgd.problems.polar import POLAR_MU
from adaptsgd.utils.rng import StreamBatch


class TestQuadraticObjective:
    """Tests for QuadraticObjective."""

    def test_value_and_gradient(self):
        obj = QuadraticObjective([1.0, 4.0])
        x = np.array([1.0, 1.0])
        assert obj.value_at(x) == pytest.approx(2.5)
        np.testing.assert_allclose(obj.gradient_at(x), [1.0, 4.0])

    def test_constants(self):
        obj = QuadraticObjective([1.0, 4.0])
        assert obj.L == 4.0
        assert obj.mu == 1.0
        assert obj.f_star == 0.0

    def test_default_start_has_unit_gap(self):
        obj = QuadraticObjective([0.5, 1.0, 3.0])
        assert obj.value_at(obj.default_start()) == pytest.approx(1.0)

    def test_batch_evaluation(self):
        obj = QuadraticObjective([1.0, 2.0])
        x = np.array([[1.0, 0.0], [0.0, 1.0]])
        np.testing.assert_allclose(obj.value_at(x), [0.5, 1.0])

    def test_invalid_lambdas(self):
        with pytest.raises(ParameterError):
            QuadraticObjective([1.0, 0.0])
        with pytest.raises(ParameterError):
            QuadraticObjective([])

    def test_dimension_mismatch(self):
        with pytest.raises(ParameterError):
            QuadraticObjective([1.0, 2.0]).value_at(np.ones(3))

    def test_no_random_start(self):
        with pytest.raises(CapabilityError):
            QuadraticObjective([1.0]).random_start(StreamBatch([0]))


class TestPolarPLObjective:
    """Tests for the non-convex polar objective."""

    def test_value_and_gradient_on_axis(self):
        obj = PolarPLObjective()
        x = np.array([1.0, 0.0])
        assert obj.value_at(x) == pytest.approx(7.0 / 3.0)
        np.testing.assert_allclose(obj.gradient_at(x), [7.0 / 6.0, 0.0], atol=1e-14)

    def test_origin(self):
        obj = PolarPLObjective()
        assert obj.value_at(np.zeros(2)) == 0.0
        np.testing.assert_array_equal(obj.gradient_at(np.zeros(2)), [0.0, 0.0])

    def test_gradient_matches_finite_differences(self):
        obj = PolarPLObjective()
        rng = np.random.default_rng(7)
        r = rng.uniform(0.1, 1.0, 50)
        theta = rng.uniform(0, 2 * math.pi, 50)
        x = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)
        np.testing.assert_allclose(
            obj.gradient_at(x), finite_difference_gradient(obj, x), rtol=1e-6, atol=1e-8
        )

    def test_pl_region(self):
        obj = PolarPLObjective()
        assert obj.in_pl_region(np.array([0.6, 0.8]))
        assert not obj.in_pl_region(np.array([1.0, 1.0]))

    def test_random_start_inside_disc(self):
        obj = PolarPLObjective()
        points = obj.random_start(StreamBatch(range(200)))
        assert points.shape == (200, 2)
        assert np.all(np.hypot(points[:, 0], points[:, 1]) <= 0.9)

    def test_smoothness_estimate_below_default_L(self):
        obj = PolarPLObjective()
        grid = np.linspace(-0.7, 0.7, 41)
        points = np.array([[a, b] for a in grid for b in grid])
        assert estimate_smoothness(obj, points) <= obj.L


class TestPLRatio:
    """Tests for pl_ratio."""

    def test_one_dimensional_quadratic_saturates(self):
        obj = QuadraticObjective([2.0])
        assert pl_ratio(obj, np.array([3.0])) == pytest.approx(2.0)

    def test_polar_on_axis(self):
        obj = PolarPLObjective()
        assert pl_ratio(obj, np.array([1.0, 0.0])) == pytest.approx(3.5 / 12.0)

    def test_polar_grid_certificate(self):
        obj = PolarPLObjective()
        r = np.linspace(0.01, 1.0, 60)
        theta = np.linspace(0, 2 * math.pi, 60, endpoint=False)
        rr, tt = np.meshgrid(r, theta)
        x = np.stack([(rr * np.cos(tt)).ravel(), (rr * np.sin(tt)).ravel()], axis=-1)
        assert np.min(pl_ratio(obj, x)) >= POLAR_MU - 1e-9

    def test_degenerate_at_minimizer(self):
        with pytest.raises(DegeneratePointError):
            pl_ratio(QuadraticObjective([1.0, 1.0]), np.zeros(2))


class TestNoiseOracle:
    """Tests for NoiseOracle constructors and the second-moment law."""

    def test_constants(self):
        assert NoiseOracle.exact(3).a == 0.0
        assert NoiseOracle.exact(3).b == 0.0
        assert NoiseOracle.additive_gaussian(0.5, 4).b == pytest.approx(1.0)
        assert NoiseOracle.relative(2.0, 4).a == 2.0
        mixed = NoiseOracle.mixed(1.0, 0.5, 2)
        assert (mixed.a, mixed.b) == (0.5, 2.0)
        assert mixed.second_moment(4.0) == pytest.approx(4.0)

    def test_invalid(self):
        with pytest.raises(ParameterError):
            NoiseOracle.additive_gaussian(-1.0, 2)
        with pytest.raises(ParameterError):
            NoiseOracle(kind="laplace", dim=2)

    def test_exact_returns_gradient(self):
        obj = QuadraticObjective([1.0, 2.0])
        x = np.array([1.0, -1.0])
        g = sample_gradient(NoiseOracle.exact(2), obj, x, StreamBatch.from_seed(0))
        np.testing.assert_array_equal(g, obj.gradient_at(x))

    def test_additive_second_moment(self):
        obj = QuadraticObjective([1.0] * 4)
        oracle = NoiseOracle.additive_gaussian(1.0, 4)
        x = np.ones((20000, 4))
        g = sample_gradient(oracle, obj, x, StreamBatch(range(20000)))
        noise_sq = np.sum((g - obj.gradient_at(x)) ** 2, axis=-1)
        # chi-square with 4 dof: std of the mean is sqrt(8 / n) = 0.02
        assert np.mean(noise_sq) == pytest.approx(4.0, abs=0.1)

    def test_relative_second_moment(self):
        obj = QuadraticObjective([1.0, 1.0])
        oracle = NoiseOracle.relative(1.0, 2)
        x = np.tile([3.0, 0.0], (20000, 1))
        g = sample_gradient(oracle, obj, x, StreamBatch(range(20000)))
        noise_sq = np.sum((g - obj.gradient_at(x)) ** 2, axis=-1)
        assert np.mean(noise_sq) == pytest.approx(9.0, rel=0.05)

    def test_relative_vanishes_at_minimizer(self):
        obj = QuadraticObjective([1.0, 1.0])
        g = sample_gradient(NoiseOracle.relative(1.0, 2), obj, np.zeros(2), StreamBatch([1]))
        np.testing.assert_array_equal(g, [0.0, 0.0])

    def test_unbiased(self):
        obj = QuadraticObjective([1.0, 2.0])
        oracle = NoiseOracle.mixed(1.0, 1.0, 2)
        x = np.tile([1.0, 1.0], (20000, 1))
        g = sample_gradient(oracle, obj, x, StreamBatch(range(20000)))
        np.testing.assert_allclose(np.mean(g, axis=0), [1.0, 2.0], atol=0.06)

    def test_lane_count_mismatch(self):
        obj = QuadraticObjective([1.0, 2.0])
        with pytest.raises(ParameterError):
            sample_gradient(NoiseOracle.exact(2), obj, np.ones((3, 2)), StreamBatch([0, 1]))


class TestRouters:
    """Tests for get_objective and get_oracle."""

    def test_get_objective(self):
        assert isinstance(get_objective("quadratic", {"lambdas": [1.0]}), QuadraticObjective)
        polar = get_objective("polar_pl", {"L": 40.0})
        assert isinstance(polar, PolarPLObjective)
        assert polar.L == 40.0

    def test_quadratic_needs_lambdas(self):
        with pytest.raises(ParameterError):
            get_objective("quadratic", {})

    def test_unknown_kinds(self):
        with pytest.raises(ParameterError):
            get_objective("rosenbrock", {})
        with pytest.raises(ParameterError):
            get_oracle("heavy_tailed", 2, {})

    def test_get_oracle(self):
        oracle = get_oracle("mixed", 3, {"sigma": 0.1, "a": 0.5})
        assert oracle.kind == "mixed"
        assert oracle.b == pytest.approx(0.03)
