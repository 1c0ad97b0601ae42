"""Monte Carlo harness for the tracking estimators.

Each trial owns its RNG streams (keyed by trial index), so results never
depend on execution order or on how many trials run per vectorized block.
Aggregation happens in fixed trial order.  The per-agent squared error
(1/N) ||xi_t||^2 is time-averaged after a geometric burn-in and then
averaged across trials.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .estimators import (
    UPDATES,
    EstimatorSpec,
    UnstableSystemError,
    build_error_system,
    is_stable,
)
from .graphs import CommMatrix
from .model import ModelParams, generate_world

RECORD_MODES = ("aggregate", "per_step", "full")
INIT_MODES = ("observation", "zeros")

# abort threshold on ||xi_t||
DIVERGENCE_NORM = 1e12
# per-block memory budget for stacked trajectories, in float64 counts
_BLOCK_BUDGET = 8_388_608


class SimulationDivergedError(RuntimeError):
    """A trial's error norm blew past the overflow guard."""


@dataclass(frozen=True)
class SimConfig:
    horizon: int
    trials: int
    seed: int
    burn_in: int | None = None  # None: ceil(log(1e-6)/log(rho)), capped at horizon/2
    record: str = "aggregate"
    allow_unstable: bool = False
    init: str = "observation"

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.seed < 0:
            raise ValueError(f"seed must be a nonnegative integer, got {self.seed}")
        if self.burn_in is not None and not 0 <= self.burn_in < self.horizon:
            raise ValueError(
                f"burn_in must lie in [0, horizon), got {self.burn_in} with horizon {self.horizon}"
            )
        if self.record not in RECORD_MODES:
            raise ValueError(f"record must be one of {RECORD_MODES}, got {self.record!r}")
        if self.init not in INIT_MODES:
            raise ValueError(f"init must be one of {INIT_MODES}, got {self.init!r}")


@dataclass(frozen=True)
class SimResult:
    empirical_msd: float
    stderr: float
    empirical_sigma: np.ndarray      # across-trial average of xi_T xi_T^T
    per_trial_msd: np.ndarray        # time-averaged MSD of each trial
    xi_final: np.ndarray             # (trials, n) error vectors at t = T
    per_step_msd: np.ndarray | None  # mean over trials of (1/N)||xi_t||^2, t = 0..T
    burn_in: int
    stable: bool


def default_burn_in(rho: float, horizon: int) -> int:
    """Steps until rho^t < 1e-6, capped at half the horizon."""
    cap = horizon // 2
    if rho <= 0.0:
        return 0
    if rho >= 1.0:
        return cap
    return min(cap, int(math.ceil(math.log(1e-6) / math.log(rho))))


def _block_size(trials: int, horizon: int, n: int) -> int:
    per_trial = (horizon + 1) * (n + 2)
    return max(1, min(trials, _BLOCK_BUDGET // max(per_trial, 1)))


def run_trials(
    comm: CommMatrix,
    spec: EstimatorSpec,
    params: ModelParams,
    sim: SimConfig,
    per_step_sink: Callable[[int, np.ndarray], None] | None = None,
) -> SimResult:
    """Run sim.trials independent trials and aggregate.

    per_step_sink, when given with record="full", receives each trial's
    instantaneous MSD series (trial index, array of length horizon+1) in
    trial order; nothing per-step is retained in memory for it.
    """
    sys = build_error_system(comm, spec, params)
    stable = is_stable(sys)
    if not stable and not sim.allow_unstable:
        raise UnstableSystemError(
            f"rho(Q) = {sys.rho:.6g} >= 1; pass allow_unstable to simulate anyway"
        )
    n, t_end = comm.n, sim.horizon
    burn = sim.burn_in if sim.burn_in is not None else default_burn_in(sys.rho, t_end)
    update = UPDATES[spec.kind]
    a, alpha = params.a, spec.alpha

    keep_steps = sim.record != "aggregate"
    per_trial = np.empty(sim.trials)
    xi_final = np.empty((sim.trials, n))
    sigma_acc = np.zeros((n, n))
    step_acc = np.zeros(t_end + 1) if keep_steps else None

    block = _block_size(sim.trials, t_end, n)
    for start in range(0, sim.trials, block):
        idx = range(start, min(start + block, sim.trials))
        worlds = [generate_world(params, n, t_end, sim.seed, trial) for trial in idx]
        xs = np.stack([w.x for w in worlds], axis=1)  # (T+1, B)
        ys = np.stack([w.y for w in worlds], axis=2)  # (n, T+1, B)
        if sim.init == "observation":
            beliefs = ys[:, 0, :].copy()
        else:
            beliefs = np.zeros((n, len(worlds)))
        inst = np.empty((t_end + 1, len(worlds)))
        xi = beliefs - xs[0][None, :]
        inst[0] = np.mean(xi * xi, axis=0)
        for t in range(t_end):
            beliefs = update(beliefs, ys[:, t, :], comm, a, alpha)
            xi = beliefs - xs[t + 1][None, :]
            m = np.mean(xi * xi, axis=0)
            inst[t + 1] = m
            if np.max(m) * n > DIVERGENCE_NORM ** 2:
                b = int(np.argmax(m))
                raise SimulationDivergedError(
                    f"trial {start + b} diverged at step {t + 1}: "
                    f"||xi|| = {math.sqrt(m[b] * n):.3e}"
                )
        per_trial[list(idx)] = inst[burn + 1 :, :].mean(axis=0)
        xi_final[list(idx)] = xi.T
        for b, trial in enumerate(idx):
            sigma_acc += np.outer(xi[:, b], xi[:, b])
            if per_step_sink is not None and sim.record == "full":
                per_step_sink(trial, inst[:, b])
        if keep_steps:
            step_acc += inst.sum(axis=1)

    stderr = (
        float(np.std(per_trial, ddof=1) / math.sqrt(sim.trials)) if sim.trials > 1 else 0.0
    )
    per_step = step_acc / sim.trials if keep_steps else None
    if per_step is not None:
        per_step.flags.writeable = False
    for arr in (per_trial, xi_final):
        arr.flags.writeable = False
    sigma = sigma_acc / sim.trials
    sigma.flags.writeable = False
    return SimResult(
        empirical_msd=float(per_trial.mean()),
        stderr=stderr,
        empirical_sigma=sigma,
        per_trial_msd=per_trial,
        xi_final=xi_final,
        per_step_msd=per_step,
        burn_in=burn,
        stable=stable,
    )


def empirical_covariance(xi_final: np.ndarray) -> np.ndarray:
    """Across-trial average of xi xi^T from final-step error vectors (trials, n)."""
    xi = np.asarray(xi_final, dtype=float)
    if xi.ndim != 2 or xi.shape[0] < 2:
        raise ValueError("need a (trials, n) array with at least two trials")
    return np.einsum("ti,tj->ij", xi, xi) / xi.shape[0]
