import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from imrc.errors import DomainError, EmptyTaskError, InvalidConfigError, ShapeError
from imrc.features import (
    FeatureMap,
    build_feature_map,
    embed,
    stats_from_arrays,
    task_stats,
)


class TestBuildFeatureMap:
    def test_default_sizes(self):
        fmap = build_feature_map(54, 2, rff_dim=200, sigma2_scale=10, seed=7)
        assert fmap.m == 400
        assert fmap.frequencies.shape == (200, 54)
        assert fmap.bound == pytest.approx(np.sqrt(2 / 200))

    def test_same_seed_is_bit_identical(self):
        a = build_feature_map(3, 2, 16, 10.0, seed=11)
        b = build_feature_map(3, 2, 16, 10.0, seed=11)
        assert a.frequencies.tobytes() == b.frequencies.tobytes()
        assert a.phases.tobytes() == b.phases.tobytes()

    def test_frequency_scale(self):
        fmap = build_feature_map(4, 2, 5000, sigma2_scale=10.0, seed=0)
        assert np.var(fmap.frequencies) == pytest.approx(0.1, rel=0.05)
        assert np.all((fmap.phases >= 0) & (fmap.phases < 2 * np.pi))

    @pytest.mark.parametrize("args", [(0, 2, 10, 1.0), (3, 0, 10, 1.0), (3, 2, -1, 1.0), (3, 2, 10, 0.0)])
    def test_invalid_config(self, args):
        with pytest.raises(InvalidConfigError):
            build_feature_map(*args)

    def test_frozen(self):
        fmap = build_feature_map(2, 2, 4, 1.0, seed=0)
        with pytest.raises(ValueError):
            fmap.frequencies[0, 0] = 1.0


class TestEmbed:
    def test_one_hot_blocks(self):
        fmap = build_feature_map(1, 2, 1, 3.0, seed=1)
        for y in (0, 1):
            v = embed(fmap, np.array([0.4]), y)
            assert v.shape == (2,)
            assert np.count_nonzero(v) == 1 and v[y] != 0

    def test_zero_frequency_gives_sqrt2(self):
        fmap = FeatureMap(3, 1, 2, np.zeros((1, 3)), np.zeros(1))
        np.testing.assert_array_equal(embed(fmap, np.array([5.0, -1.0, 2.0]), 1), [0.0, np.sqrt(2.0)])

    def test_matches_scripted_formula(self):
        fmap = build_feature_map(3, 3, 4, 10.0, seed=5)
        x = np.ones(3)
        expected = np.sqrt(2 / 4) * np.cos(fmap.frequencies @ x + fmap.phases)
        out = embed(fmap, x, 2).reshape(3, 4)
        np.testing.assert_allclose(out[2], expected, rtol=0, atol=1e-15)
        np.testing.assert_array_equal(out[:2], 0.0)

    def test_norm_bound_on_many_samples(self):
        fmap = build_feature_map(6, 4, 50, 2.0, seed=3)
        rng = np.random.default_rng(0)
        X = rng.normal(scale=5.0, size=(100_000, 6))
        y = rng.integers(0, 4, size=100_000)
        F = fmap.embed_batch(X, y)
        assert np.max(np.abs(F)) <= fmap.bound
        assert np.all(np.count_nonzero(F.reshape(-1, 4, 50).any(axis=2), axis=1) == 1)

    def test_shape_and_domain_errors(self):
        fmap = build_feature_map(2, 2, 4, 1.0, seed=0)
        with pytest.raises(ShapeError):
            embed(fmap, np.zeros(3), 0)
        with pytest.raises(DomainError):
            embed(fmap, np.zeros(2), 2)
        with pytest.raises(DomainError):
            fmap.embed_batch(np.zeros((2, 2)), [0, -1])


class TestTaskStats:
    def setup_method(self):
        self.fmap = build_feature_map(2, 2, 8, 1.0, seed=2)

    def test_single_sample(self):
        x = np.array([0.3, -0.2])
        stats = task_stats(self.fmap, [(x, 1)], variance_floor=1e-6)
        np.testing.assert_array_equal(stats.tau, embed(self.fmap, x, 1))
        np.testing.assert_array_equal(stats.sigma2, 1e-6)
        assert stats.n == 1

    def test_identical_samples_are_floored(self):
        x = np.array([1.0, 2.0])
        stats = task_stats(self.fmap, [(x, 0), (x, 0)], variance_floor=1e-6)
        np.testing.assert_array_equal(stats.sigma2, 1e-6)
        np.testing.assert_array_equal(stats.s, 0.5e-6)

    def test_unbiased_variance(self):
        rng = np.random.default_rng(1)
        X, y = rng.normal(size=(7, 2)), rng.integers(0, 2, 7)
        stats = stats_from_arrays(self.fmap, X, y, variance_floor=1e-300)
        F = self.fmap.embed_batch(X, y)
        raw = np.sum((F - F.mean(0)) ** 2, axis=0) / 6
        np.testing.assert_allclose(stats.sigma2, np.maximum(raw, 1e-300), rtol=1e-12)
        np.testing.assert_array_equal(stats.s, stats.sigma2 / 7)

    def test_empty_task(self):
        with pytest.raises(EmptyTaskError):
            task_stats(self.fmap, [])

    def test_monte_carlo_mean(self):
        # x ~ N(0, I) independent of y ~ Bernoulli(0.3):
        # E[block y] = P(y) sqrt(2/D) cos(b) exp(-|w|^2 / 2)
        fmap = build_feature_map(2, 2, 100, 1.0, seed=4)
        rng = np.random.default_rng(9)
        X = rng.normal(size=(100, 2))
        y = (rng.random(100) < 0.3).astype(int)
        stats = stats_from_arrays(fmap, X, y)
        base = fmap.bound * np.cos(fmap.phases) * np.exp(-0.5 * np.sum(fmap.frequencies ** 2, axis=1))
        expected = np.concatenate([0.7 * base, 0.3 * base])
        inside = np.abs(stats.tau - expected) <= 4 * np.sqrt(stats.s)
        assert inside.mean() >= 0.99

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 20), st.integers(1, 20), st.integers(0, 2 ** 32 - 1))
    def test_concatenation_is_weighted_mean(self, n1, n2, seed):
        rng = np.random.default_rng(seed)
        X1, X2 = rng.normal(size=(n1, 2)), rng.normal(size=(n2, 2))
        y1, y2 = rng.integers(0, 2, n1), rng.integers(0, 2, n2)
        a = stats_from_arrays(self.fmap, X1, y1)
        b = stats_from_arrays(self.fmap, X2, y2)
        both = stats_from_arrays(self.fmap, np.vstack([X1, X2]), np.concatenate([y1, y2]))
        np.testing.assert_allclose(both.tau, (n1 * a.tau + n2 * b.tau) / (n1 + n2), atol=1e-12)
        assert np.all(both.sigma2 >= 1e-6)
