"""Block vectors, sphere sampling, the noise model and the value oracle."""

import math

import numpy as np
import pytest

from zosaddle.core import (BlockPoint, DimensionError, Direction, NoiseModel,
                           NOISELESS, Oracle, OutOfDomainError, ProblemSpec,
                           SeededRng, flip_y, sample_sphere)
from zosaddle.geometry import DomainSpec


class TestBlockPoint:
    def test_concat_roundtrip(self):
        z = BlockPoint(np.array([1.0, 2.0]), np.array([3.0]))
        assert z.n_x == 2 and z.n_y == 1 and z.n == 3
        np.testing.assert_array_equal(z.z, [1.0, 2.0, 3.0])
        z2 = BlockPoint.from_concat(z.z, 2, 1)
        np.testing.assert_array_equal(z2.x, z.x)
        np.testing.assert_array_equal(z2.y, z.y)

    def test_empty_block_rejected(self):
        with pytest.raises(DimensionError):
            BlockPoint(np.array([]), np.array([1.0]))

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            BlockPoint(np.array([np.nan]), np.array([1.0]))
        with pytest.raises(ValueError):
            BlockPoint(np.array([1.0]), np.array([np.inf]))

    def test_from_concat_length_mismatch(self):
        with pytest.raises(DimensionError):
            BlockPoint.from_concat(np.zeros(3), 2, 2)

    def test_shifted(self):
        z = BlockPoint(np.array([0.0]), np.array([0.0]))
        w = z.shifted(np.array([1.0, -1.0]), 0.5)
        np.testing.assert_allclose(w.z, [0.5, -0.5])


class TestDirection:
    def test_unit_norm_enforced(self):
        Direction(np.array([0.6, 0.8]))
        with pytest.raises(ValueError):
            Direction(np.array([0.6, 0.9]))

    def test_split(self):
        d = Direction(np.array([1.0, 0.0, 0.0]))
        ex, ey = d.split(2)
        assert ex.shape == (2,) and ey.shape == (1,)


class TestSampleSphere:
    def test_one_dimensional_sphere_is_two_points(self):
        rng = SeededRng(0)
        values = {float(sample_sphere(rng, 1).e[0]) for _ in range(50)}
        assert values <= {1.0, -1.0}
        assert len(values) == 2

    def test_unit_norm(self):
        rng = SeededRng(1)
        for n in (1, 2, 3, 10, 100):
            e = sample_sphere(rng, n).e
            assert abs(np.linalg.norm(e) - 1.0) <= 1e-12

    def test_zero_dimension_rejected(self):
        with pytest.raises(DimensionError):
            sample_sphere(SeededRng(0), 0)

    def test_moments_n3(self):
        # coordinate means near 0 and second-moment matrix near I/3
        rng = SeededRng(2)
        m = 10**5
        draws = np.array([sample_sphere(rng, 3).e for _ in range(m)])
        assert np.all(np.abs(draws.mean(axis=0)) <= 3.0 / math.sqrt(m * 3))
        second = draws.T @ draws / m
        assert np.max(np.abs(second - np.eye(3) / 3.0)) <= 0.02

    def test_isotropy_mean_norm(self):
        rng = SeededRng(3)
        m = 10**5
        total = np.zeros(5)
        for _ in range(m):
            total += sample_sphere(rng, 5).e
        assert np.linalg.norm(total / m) <= 4.0 / math.sqrt(m)


class TestFlipY:
    def test_basic(self):
        np.testing.assert_array_equal(
            flip_y(np.array([1.0, 2.0, 3.0]), 2, 1), [1.0, 2.0, -3.0])

    def test_involution(self):
        v = np.array([0.3, -0.7, 2.0, 1.0])
        np.testing.assert_array_equal(flip_y(flip_y(v, 1, 3), 1, 3), v)

    def test_zero_fixed_point(self):
        np.testing.assert_array_equal(flip_y(np.zeros(4), 2, 2), np.zeros(4))

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            flip_y(np.zeros(3), 2, 2)


class TestSeededRng:
    def test_reproducible(self):
        a = SeededRng(42).standard_normal(100)
        b = SeededRng(42).standard_normal(100)
        np.testing.assert_array_equal(a, b)

    def test_spawn_independent(self):
        parent = SeededRng(5)
        child = parent.spawn()
        a = parent.standard_normal(10)
        b = child.standard_normal(10)
        assert not np.allclose(a, b)


class TestNoiseModel:
    def test_invalid_config(self):
        with pytest.raises(ValueError):
            NoiseModel(sigma=-1.0)
        with pytest.raises(ValueError):
            NoiseModel(xi_distribution="cauchy")

    @pytest.mark.parametrize("dist", ["gaussian", "uniform"])
    def test_xi_mean_and_variance(self, dist):
        noise = NoiseModel(sigma=0.5, xi_distribution=dist)
        rng = SeededRng(7)
        draws = np.array([noise.draw_xi(rng) for _ in range(10**5)])
        assert abs(draws.mean()) <= 0.01
        assert abs(draws.var() - 0.25) <= 0.01

    def test_none_distribution_silent(self):
        noise = NoiseModel(sigma=1.0, xi_distribution="none")
        assert noise.draw_xi(SeededRng(0)) == 0.0


def _bilinear_problem(radius=math.inf):
    return ProblemSpec(
        n_x=1, n_y=1,
        clean_value=lambda z: float(z.x @ z.y),
        neighborhood_radius=radius)


class TestOracle:
    def test_noiseless_value(self):
        oracle = Oracle(_bilinear_problem(), NOISELESS, SeededRng(0))
        z = BlockPoint(np.array([1.0]), np.array([2.0]))
        assert oracle.query(z) == 2.0
        assert oracle.calls == 1

    def test_pure_bias(self):
        problem = ProblemSpec(n_x=1, n_y=1, clean_value=lambda z: 0.0)
        noise = NoiseModel(sigma=0.0, delta_bound=0.1,
                           bias_fn=lambda z: 0.1, xi_distribution="none")
        oracle = Oracle(problem, noise, SeededRng(0))
        z = BlockPoint(np.array([0.0]), np.array([0.0]))
        assert oracle.query(z) == pytest.approx(0.1)

    def test_noise_statistics(self):
        problem = ProblemSpec(n_x=1, n_y=1, clean_value=lambda z: 0.0)
        oracle = Oracle(problem, NoiseModel(sigma=1.0), SeededRng(9))
        z = BlockPoint(np.array([0.0]), np.array([0.0]))
        vals = np.array([oracle.query(z) for _ in range(10**5)])
        assert abs(vals.mean()) <= 0.02
        assert abs(vals.var() - 1.0) <= 0.05
        assert oracle.calls == 10**5

    def test_call_counter_exact(self):
        oracle = Oracle(_bilinear_problem(), NOISELESS, SeededRng(0))
        z = BlockPoint(np.array([1.0]), np.array([1.0]))
        for expected in range(1, 8):
            oracle.query(z)
            assert oracle.calls == expected

    def test_out_of_neighborhood_rejected(self):
        domain = DomainSpec.box([0.0, 0.0], [1.0, 1.0], 1, 1)
        problem = _bilinear_problem(radius=0.1)
        oracle = Oracle(problem, NOISELESS, SeededRng(0), domain=domain)
        inside = BlockPoint(np.array([1.05]), np.array([0.5]))
        oracle.query(inside)  # within the defined neighborhood
        outside = BlockPoint(np.array([1.5]), np.array([0.5]))
        with pytest.raises(OutOfDomainError):
            oracle.query(outside)
