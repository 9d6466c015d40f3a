import math

import numpy as np
import pytest

from assistlearn.privacy import CompositionResult, PrivacySpec, compose, dp_perturb


class TestSpecValidation:
    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            PrivacySpec(epsilon=0.0, delta=1e-5)
        with pytest.raises(ValueError):
            PrivacySpec(epsilon=1.0, delta=1.5)
        with pytest.raises(ValueError):
            PrivacySpec(epsilon=1.0, delta=1e-5, clip_norm=0.0)

    def test_noise_variance_formula(self):
        spec = PrivacySpec(epsilon=1.0, delta=1e-5)
        assert spec.noise_variance == pytest.approx(2.0 * math.log(1e5), rel=1e-12)


class TestCompose:
    def test_zero_steps(self):
        result = compose(PrivacySpec(1.0, 1e-5), steps=0, batch_fraction=0.5)
        assert result == CompositionResult(0.0, 0.0)

    def test_hand_computed_values(self):
        result = compose(PrivacySpec(1.0, 1e-5), steps=2000, batch_fraction=0.05)
        expected_eps = 2 * 0.05 * 1.0 * math.sqrt(2000 * math.log(1e5))
        assert result.eps_prime == pytest.approx(expected_eps, abs=1e-9)
        assert result.eps_prime == pytest.approx(15.174271293851465, abs=1e-9)
        assert result.delta_prime == pytest.approx(1e-3, abs=1e-12)

    def test_linearity_in_epsilon(self):
        base = compose(PrivacySpec(1.0, 1e-5), 500, 0.1)
        doubled = compose(PrivacySpec(2.0, 1e-5), 500, 0.1)
        assert doubled.eps_prime == pytest.approx(2 * base.eps_prime, rel=1e-12)
        assert doubled.delta_prime == base.delta_prime

    def test_linearity_in_batch_fraction(self):
        base = compose(PrivacySpec(1.0, 1e-5), 500, 0.05)
        doubled = compose(PrivacySpec(1.0, 1e-5), 500, 0.10)
        assert doubled.eps_prime == pytest.approx(2 * base.eps_prime, rel=1e-12)
        assert doubled.delta_prime == pytest.approx(2 * base.delta_prime, rel=1e-12)

    def test_delta_prime_rule(self):
        result = compose(PrivacySpec(3.0, 1e-6), 1234, 0.25)
        assert result.delta_prime == 0.25 * 1234 * 1e-6


class TestPerturb:
    def test_huge_epsilon_returns_clipped_gradient(self):
        spec = PrivacySpec(epsilon=1e6, delta=1e-5, clip_norm=1.0)
        grad = np.array([3.0, 4.0])  # norm 5 -> clipped to norm 1
        out = dp_perturb(grad, spec, np.random.default_rng(0))
        np.testing.assert_allclose(out, grad / 5.0, atol=1e-4)

    def test_clipping_to_exact_norm(self):
        spec = PrivacySpec(epsilon=1e8, delta=1e-5, clip_norm=2.0)
        grad = np.array([0.0, 4.0])  # norm 2C
        out = dp_perturb(grad, spec, np.random.default_rng(1))
        assert np.linalg.norm(out) == pytest.approx(2.0, abs=1e-5)

    def test_small_gradient_not_rescaled(self):
        spec = PrivacySpec(epsilon=1e8, delta=1e-5, clip_norm=10.0)
        grad = np.array([0.1, -0.2])
        out = dp_perturb(grad, spec, np.random.default_rng(2))
        np.testing.assert_allclose(out, grad, atol=1e-6)

    def test_deterministic_given_stream(self):
        spec = PrivacySpec(epsilon=2.0, delta=1e-5)
        grad = np.ones(6)
        first = dp_perturb(grad, spec, np.random.default_rng(33))
        second = dp_perturb(grad, spec, np.random.default_rng(33))
        np.testing.assert_array_equal(first, second)

    def test_empirical_noise_variance(self):
        spec = PrivacySpec(epsilon=1.0, delta=1e-5, clip_norm=1.0)
        rng = np.random.default_rng(7)
        grad = np.array([0.3, -0.4, 0.1])
        draws = np.stack([dp_perturb(grad, spec, rng) for _ in range(100_000)])
        clipped = grad  # norm < 1, unchanged
        noise = draws - clipped
        sample_var = noise.var(axis=0)
        np.testing.assert_allclose(sample_var, spec.noise_variance, rtol=0.05)
