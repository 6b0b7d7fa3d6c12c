import numpy as np
import pytest

from blockdetail import (GaussianDenoiserU, GaussianMotionPrior,
                         NoiseSchedule, ancestral_sample)


def test_fixed_seed_bit_identical():
    sched = NoiseSchedule.cosine(200)
    prior = GaussianMotionPrior.from_kernel(np.zeros((6, 1, 1)))
    u = GaussianDenoiserU(prior, sched)
    a = ancestral_sample(u.evaluate, sched, (6, 1, 1), 99)
    b = ancestral_sample(u.evaluate, sched, (6, 1, 1), 99)
    assert np.array_equal(a, b)


def test_sampler_reproduces_prior_mean():
    """500 samples with the exact Gaussian denoiser: per-channel empirical
    mean within 3 standard errors of the prior mean."""
    sched = NoiseSchedule.cosine(250)
    rng = np.random.default_rng(4)
    mean = rng.standard_normal((8, 1, 1)) * 0.3
    prior = GaussianMotionPrior.from_kernel(mean)
    u = GaussianDenoiserU(prior, sched)
    samples = np.stack([ancestral_sample(u.evaluate, sched, (8, 1, 1), 1000 + i)
                        for i in range(500)])
    emp_mean = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / np.sqrt(samples.shape[0])
    assert np.all(np.abs(emp_mean - mean) < 3 * se)


def test_single_step_returns_prediction_exactly():
    """T=1 with a constant denoiser: the one ancestral step is deterministic
    and equals the prediction."""
    sched = NoiseSchedule(np.array([1.0, 5e-5]))
    target = np.full((4, 1, 1), 2.5)
    out = ancestral_sample(lambda y, t: target, sched, (4, 1, 1), 0)
    assert np.array_equal(out, target)
    # conditional mean over many seeds equals the constant (zero variance here)
    outs = np.stack([ancestral_sample(lambda y, t: target, sched, (4, 1, 1), s)
                     for s in range(100)])
    assert np.allclose(outs, target)


def test_no_nan_over_seeded_runs():
    sched = NoiseSchedule.cosine(100)
    prior = GaussianMotionPrior.from_kernel(np.zeros((8, 1, 1)))
    u = GaussianDenoiserU(prior, sched)
    for seed in range(1000):
        out = ancestral_sample(u.evaluate, sched, (8, 1, 1), seed)
        assert np.isfinite(out).all()


def test_hook_sees_every_step_and_cannot_mutate():
    sched = NoiseSchedule.cosine(50)
    prior = GaussianMotionPrior.from_kernel(np.zeros((4, 1, 1)))
    u = GaussianDenoiserU(prior, sched)
    seen = []

    def hook(t, y_t, x0):
        seen.append(t)
        with pytest.raises(ValueError):
            y_t[0] = 0.0
        with pytest.raises(ValueError):
            x0[0] = 0.0

    ancestral_sample(u.evaluate, sched, (4, 1, 1), 0, step_hook=hook)
    assert seen == list(range(50, 0, -1))


def test_hook_does_not_change_rng_stream():
    sched = NoiseSchedule.cosine(80)
    prior = GaussianMotionPrior.from_kernel(np.zeros((4, 1, 1)))
    u = GaussianDenoiserU(prior, sched)
    plain = ancestral_sample(u.evaluate, sched, (4, 1, 1), 5)
    hooked = ancestral_sample(u.evaluate, sched, (4, 1, 1), 5,
                              step_hook=lambda t, y, x: None)
    assert np.array_equal(plain, hooked)


def test_non_finite_prediction_raises():
    sched = NoiseSchedule.cosine(10)

    def bad(y, t):
        return np.full(y.shape, np.nan)

    with pytest.raises(FloatingPointError, match="non-finite"):
        ancestral_sample(bad, sched, (3, 1, 1), 0)


def test_wrong_shape_prediction_raises():
    sched = NoiseSchedule.cosine(10)
    with pytest.raises(ValueError, match="shape"):
        ancestral_sample(lambda y, t: np.zeros((2, 1, 1)), sched, (3, 1, 1), 0)
