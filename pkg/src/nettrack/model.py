"""Scalar hidden-state dynamics and noisy agent observations.

The state follows x_{t+1} = a * x_t + r_t and every agent sees
y_{i,t} = x_t + w_{i,t}.  Innovation and observation noises are zero mean,
independent over time and across agents, with variances sigma_r2 and
sigma_w2.  Two families are supported: gaussian, and uniform with matched
variance (half-width sqrt(3 * sigma2)), the latter giving the almost-sure
norm bounds the regret analysis needs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NOISE_FAMILIES = ("gaussian", "uniform")


@dataclass(frozen=True)
class ModelParams:
    a: float
    sigma_r2: float
    sigma_w2: float
    x0: float = 0.0
    x0_sigma2: float = 0.0
    noise: str = "gaussian"

    def __post_init__(self):
        if self.sigma_r2 < 0 or self.sigma_w2 < 0 or self.x0_sigma2 < 0:
            raise ValueError("variances must be nonnegative")
        if self.noise not in NOISE_FAMILIES:
            raise ValueError(f"noise must be one of {NOISE_FAMILIES}, got {self.noise!r}")

    @property
    def r_max(self) -> float:
        """Almost-sure bound on |r_t|; infinite for the gaussian family."""
        if self.noise == "uniform":
            return math.sqrt(3.0 * self.sigma_r2)
        return math.inf

    @property
    def w_max(self) -> float:
        """Almost-sure bound on |w_it|; infinite for the gaussian family."""
        if self.noise == "uniform":
            return math.sqrt(3.0 * self.sigma_w2)
        return math.inf


@dataclass(frozen=True)
class WorldTrace:
    """One realized trajectory: x has shape (T+1,), y has shape (n, T+1)."""

    x: np.ndarray
    y: np.ndarray
    seed: int
    trial: int

    @property
    def horizon(self) -> int:
        return self.x.shape[0] - 1

    @property
    def n(self) -> int:
        return self.y.shape[0]


def _draw(params: ModelParams, rng: np.random.Generator, sigma2: float, size) -> np.ndarray:
    if params.noise == "uniform":
        half = math.sqrt(3.0 * sigma2)
        return rng.uniform(-half, half, size)
    return rng.normal(0.0, math.sqrt(sigma2), size)


def step_state(x: float, params: ModelParams, rng: np.random.Generator) -> float:
    """One transition x -> a*x + r with a fresh innovation draw."""
    return params.a * x + float(_draw(params, rng, params.sigma_r2, None))


def observe(x: float, n: int, params: ModelParams, rng: np.random.Generator) -> np.ndarray:
    """Noisy snapshot of the state seen by each of n agents."""
    return x + _draw(params, rng, params.sigma_w2, n)


def trial_rng(seed: int, trial: int, block: int) -> np.random.Generator:
    """Counter-based stream keyed by (seed, trial, block); independent per key."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(seed, spawn_key=(trial, block)))
    )


def generate_world(
    params: ModelParams, n: int, horizon: int, seed: int, trial: int = 0
) -> WorldTrace:
    """Simulate a full trajectory reproducibly from (seed, trial).

    Stream layout: block 0 draws the initial state (when x0_sigma2 > 0)
    followed by the innovations r_0..r_{T-1}; block 1 draws the observation
    noise for all agents and steps at once.  Trials never share a stream,
    so Monte Carlo results do not depend on execution order.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if n < 1:
        raise ValueError(f"need at least one agent, got n={n}")
    rng_state = trial_rng(seed, trial, 0)
    rng_obs = trial_rng(seed, trial, 1)
    x0 = params.x0
    if params.x0_sigma2 > 0:
        x0 += float(rng_state.normal(0.0, math.sqrt(params.x0_sigma2)))
    r = _draw(params, rng_state, params.sigma_r2, horizon)
    xs = np.empty(horizon + 1)
    xs[0] = x0
    a = params.a
    x = float(x0)
    r_list = r.tolist()
    for t in range(horizon):
        x = a * x + r_list[t]
        xs[t + 1] = x
    w = _draw(params, rng_obs, params.sigma_w2, (n, horizon + 1))
    y = xs[None, :] + w
    xs.flags.writeable = False
    y.flags.writeable = False
    return WorldTrace(x=xs, y=y, seed=seed, trial=trial)
