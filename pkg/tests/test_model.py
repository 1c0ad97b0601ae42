import math

import numpy as np
import pytest

from nettrack.model import ModelParams, generate_world, observe, step_state, trial_rng


def test_params_validation():
    with pytest.raises(ValueError, match="variances"):
        ModelParams(a=1.0, sigma_r2=-0.1, sigma_w2=1.0)
    with pytest.raises(ValueError, match="variances"):
        ModelParams(a=1.0, sigma_r2=1.0, sigma_w2=1.0, x0_sigma2=-1.0)
    with pytest.raises(ValueError, match="noise"):
        ModelParams(a=1.0, sigma_r2=1.0, sigma_w2=1.0, noise="cauchy")


def test_noise_norm_caps():
    g = ModelParams(a=1.0, sigma_r2=2.0, sigma_w2=0.5)
    assert g.r_max == math.inf and g.w_max == math.inf
    u = ModelParams(a=1.0, sigma_r2=2.0, sigma_w2=0.5, noise="uniform")
    assert u.r_max == pytest.approx(math.sqrt(6.0), rel=1e-15)
    assert u.w_max == pytest.approx(math.sqrt(1.5), rel=1e-15)


@pytest.mark.parametrize("noise", ["gaussian", "uniform"])
def test_noise_moments(noise):
    params = ModelParams(a=1.0, sigma_r2=0.7, sigma_w2=1.3, noise=noise)
    world = generate_world(params, n=4, horizon=250_000, seed=11)
    r = world.x[1:] - params.a * world.x[:-1]
    w = world.y - world.x[None, :]
    for draws, sigma2 in ((r, params.sigma_r2), (w.ravel(), params.sigma_w2)):
        assert abs(float(draws.mean())) <= 4.0 * math.sqrt(sigma2 / draws.size)
        assert float(draws.var()) == pytest.approx(sigma2, rel=0.01)


def test_uniform_noise_is_bounded_and_fills_support():
    params = ModelParams(a=0.9, sigma_r2=1.0, sigma_w2=2.0, noise="uniform")
    world = generate_world(params, n=3, horizon=100_000, seed=5)
    r = world.x[1:] - params.a * world.x[:-1]
    w = world.y - world.x[None, :]
    assert np.max(np.abs(r)) <= params.r_max
    assert np.max(np.abs(w)) <= params.w_max
    assert np.max(np.abs(r)) >= 0.99 * params.r_max
    assert np.max(np.abs(w)) >= 0.99 * params.w_max


def test_world_shapes_and_recursion():
    params = ModelParams(a=0.8, sigma_r2=0.5, sigma_w2=1.0, x0=5.0)
    world = generate_world(params, n=6, horizon=40, seed=3, trial=2)
    assert world.x.shape == (41,)
    assert world.y.shape == (6, 41)
    assert world.horizon == 40 and world.n == 6
    assert world.x[0] == 5.0
    # the realized innovations are exactly the block-0 stream draws
    expected_r = trial_rng(3, 2, 0).normal(0.0, math.sqrt(0.5), 40)
    assert np.allclose(world.x[1:], params.a * world.x[:-1] + expected_r, atol=1e-12)
    # observation noise comes from block 1, one row per agent
    expected_w = trial_rng(3, 2, 1).normal(0.0, 1.0, (6, 41))
    assert np.array_equal(world.y, world.x[None, :] + expected_w)


def test_world_reproducible_and_trials_independent():
    params = ModelParams(a=1.0, sigma_r2=1.0, sigma_w2=1.0)
    w1 = generate_world(params, n=3, horizon=100, seed=42, trial=7)
    w2 = generate_world(params, n=3, horizon=100, seed=42, trial=7)
    assert w1.x.tobytes() == w2.x.tobytes()
    assert w1.y.tobytes() == w2.y.tobytes()
    other = generate_world(params, n=3, horizon=100, seed=42, trial=8)
    assert not np.array_equal(w1.x, other.x)
    corr = np.corrcoef(w1.x[1:] - w1.x[:-1], other.x[1:] - other.x[:-1])[0, 1]
    assert abs(corr) < 0.5


def test_random_initial_state():
    params = ModelParams(a=1.0, sigma_r2=1.0, sigma_w2=1.0, x0=10.0, x0_sigma2=4.0)
    starts = np.array(
        [generate_world(params, n=1, horizon=1, seed=9, trial=t).x[0] for t in range(2000)]
    )
    assert float(starts.mean()) == pytest.approx(10.0, abs=4.0 * 2.0 / math.sqrt(2000))
    assert float(starts.var()) == pytest.approx(4.0, rel=0.15)


def test_world_validation_and_read_only():
    params = ModelParams(a=1.0, sigma_r2=1.0, sigma_w2=1.0)
    with pytest.raises(ValueError, match="horizon"):
        generate_world(params, n=2, horizon=0, seed=0)
    with pytest.raises(ValueError, match="agent"):
        generate_world(params, n=0, horizon=5, seed=0)
    world = generate_world(params, n=2, horizon=5, seed=0)
    with pytest.raises(ValueError):
        world.x[0] = 1.0
    with pytest.raises(ValueError):
        world.y[0, 0] = 1.0


def test_single_step_helpers():
    params = ModelParams(a=2.0, sigma_r2=0.0, sigma_w2=0.0)
    rng = np.random.default_rng(0)
    assert step_state(3.0, params, rng) == 6.0
    assert np.array_equal(observe(1.5, 4, params, rng), np.full(4, 1.5))


def test_trial_rng_streams_are_keyed():
    a = trial_rng(1, 0, 0).normal(size=8)
    b = trial_rng(1, 0, 0).normal(size=8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, trial_rng(1, 0, 1).normal(size=8))
    assert not np.array_equal(a, trial_rng(1, 1, 0).normal(size=8))
    assert not np.array_equal(a, trial_rng(2, 0, 0).normal(size=8))
