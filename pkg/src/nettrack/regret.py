"""Online-learning view of the tracking error: empirical regret and its bound.

Regret at horizon T compares the running error covariance against the
steady-state one:

    R_T = (1/N) tr( (1/T) sum_{t=1..T} xi_t xi_t^T  -  Sigma ),

bounded in magnitude by the spectral norm of the same difference.  For
noise with an almost-sure norm bound s, a four-term high-probability bound
holds with probability at least 1 - delta: three transient terms decaying
like 1/T plus a concentration term decaying like 1/sqrt(T).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .estimators import (
    UPDATES,
    ErrorSystem,
    EstimatorSpec,
    UnstableSystemError,
    build_error_system,
    is_stable,
)
from .graphs import CommMatrix
from .model import ModelParams, generate_world
from .msd import steady_state_sigma_oracle
from .simulate import _block_size


class EmpiricalRegret(NamedTuple):
    trace: float
    specnorm: float


@dataclass(frozen=True)
class RegretReport:
    horizon: int
    delta: float
    s_bound: float
    xi0_norm: float
    bound_terms: tuple[float, float, float, float]
    bound_total: float
    empirical_trace: float | None = None
    empirical_specnorm: float | None = None


@dataclass(frozen=True)
class RegretRow:
    horizon: int
    trial: int
    regret_trace: float
    regret_specnorm: float
    bound_total: float
    violated: bool


@dataclass(frozen=True)
class HorizonSummary:
    horizon: int
    violation_rate: float
    median_trace: float
    median_specnorm: float
    median_bound: float


@dataclass(frozen=True)
class RegretTable:
    rows: list[RegretRow]
    summaries: list[HorizonSummary]
    t_grid: tuple[int, ...]
    delta: float
    s_bound: float
    trials: int
    seed: int


def empirical_regret(xis: np.ndarray, sigma_closed: np.ndarray) -> EmpiricalRegret:
    """Trace-form regret and its spectral-norm majorant from an error
    trajectory xis of shape (T, n) holding xi_1..xi_T as rows."""
    xis = np.asarray(xis, dtype=float)
    if xis.ndim != 2 or xis.shape[0] < 1:
        raise ValueError("need a (T, n) trajectory with at least one step")
    t, n = xis.shape
    m = xis.T @ xis / t - sigma_closed
    vals = np.linalg.eigvalsh(m)
    return EmpiricalRegret(
        trace=float(np.trace(m)) / n, specnorm=float(np.max(np.abs(vals)))
    )


def regret_bound(
    sys: ErrorSystem, xi0_norm: float, s_bound: float, horizon: int, delta: float
) -> RegretReport:
    """High-probability bound on the spectral-norm regret at the given horizon."""
    if not is_stable(sys):
        raise UnstableSystemError(f"regret bound needs rho(Q) < 1, got {sys.rho:.6g}")
    if s_bound <= 0:
        raise ValueError(f"s_bound must be positive, got {s_bound}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if xi0_norm < 0:
        raise ValueError(f"xi0_norm must be nonnegative, got {xi0_norm}")
    rho = sys.rho
    one_minus_sq = 1.0 - rho * rho
    one_minus = 1.0 - rho
    t = float(horizon)
    term1 = xi0_norm ** 2 / one_minus_sq / t
    term2 = 2.0 * s_bound * xi0_norm / one_minus ** 2 / t
    term3 = s_bound ** 2 / one_minus_sq ** 2 / t
    term4 = (
        8.0
        * s_bound ** 2
        * math.sqrt(2.0 * math.log(sys.n / delta))
        / one_minus ** 2
        / math.sqrt(t)
    )
    terms = (term1, term2, term3, term4)
    return RegretReport(
        horizon=horizon,
        delta=delta,
        s_bound=s_bound,
        xi0_norm=xi0_norm,
        bound_terms=terms,
        bound_total=float(sum(terms)),
    )


def noise_norm_bound(params: ModelParams, comm: CommMatrix, spec: EstimatorSpec) -> float:
    """Almost-sure bound on ||s_t||: sqrt(N) (|a alpha| w_max + r_max).

    Valid for both variants: row-stochastic mixing keeps ||P w||_inf <= w_max.
    Requires the bounded (uniform) noise family.
    """
    if params.noise != "uniform":
        raise ValueError(
            "noise_norm_bound needs the bounded noise family; use noise='uniform' "
            "or pass an explicit truncation level instead"
        )
    return math.sqrt(comm.n) * (
        abs(params.a * spec.alpha) * params.w_max + params.r_max
    )


def verify_bound(
    comm: CommMatrix,
    spec: EstimatorSpec,
    params: ModelParams,
    t_grid: Sequence[int],
    delta: float,
    trials: int,
    seed: int,
    init: str = "zeros",
    s_override: float | None = None,
) -> RegretTable:
    """Monte Carlo check of the regret bound over a horizon grid.

    Each trial runs once to the largest horizon; the running covariance is
    accumulated streaming and snapshotted at every grid point, which is
    equivalent to running the shorter horizons separately with the same
    streams.  Rows come back grouped by horizon, trials ascending.
    """
    grid = sorted(set(int(t) for t in t_grid))
    if not grid or grid[0] < 1:
        raise ValueError(f"t_grid must hold positive horizons, got {t_grid!r}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if init not in ("zeros", "observation"):
        raise ValueError(f"init must be 'zeros' or 'observation', got {init!r}")
    sys = build_error_system(comm, spec, params)
    if not is_stable(sys):
        raise UnstableSystemError(f"rho(Q) = {sys.rho:.6g} >= 1; regret is unbounded")
    s_bound = s_override if s_override is not None else noise_norm_bound(params, comm, spec)
    if s_bound <= 0:
        raise ValueError(f"noise norm bound must be positive, got {s_bound}")
    sigma = steady_state_sigma_oracle(sys)
    n = comm.n
    t_max = grid[-1]
    update = UPDATES[spec.kind]
    a, alpha = params.a, spec.alpha

    n_grid = len(grid)
    trace = np.empty((n_grid, trials))
    specn = np.empty((n_grid, trials))
    bound = np.empty((n_grid, trials))
    grid_pos = {t: g for g, t in enumerate(grid)}

    block = _block_size(trials, t_max, n)
    for start in range(0, trials, block):
        idx = range(start, min(start + block, trials))
        worlds = [generate_world(params, n, t_max, seed, trial) for trial in idx]
        xs = np.stack([w.x for w in worlds], axis=1)
        ys = np.stack([w.y for w in worlds], axis=2)
        nb = len(worlds)
        if init == "observation":
            beliefs = ys[:, 0, :].copy()
        else:
            beliefs = np.zeros((n, nb))
        xi0 = beliefs - xs[0][None, :]
        xi0_norms = np.linalg.norm(xi0, axis=0)
        running = np.zeros((n, n, nb))
        for t in range(1, t_max + 1):
            beliefs = update(beliefs, ys[:, t - 1, :], comm, a, alpha)
            xi = beliefs - xs[t][None, :]
            running += xi[:, None, :] * xi[None, :, :]
            g = grid_pos.get(t)
            if g is not None:
                for b, trial in enumerate(idx):
                    m = running[:, :, b] / t - sigma
                    vals = np.linalg.eigvalsh(m)
                    trace[g, trial] = np.trace(m) / n
                    specn[g, trial] = np.max(np.abs(vals))
                    bound[g, trial] = regret_bound(
                        sys, float(xi0_norms[b]), s_bound, t, delta
                    ).bound_total

    rows = []
    summaries = []
    for g, t in enumerate(grid):
        violated = specn[g] > bound[g]
        for trial in range(trials):
            rows.append(
                RegretRow(
                    horizon=t,
                    trial=trial,
                    regret_trace=float(trace[g, trial]),
                    regret_specnorm=float(specn[g, trial]),
                    bound_total=float(bound[g, trial]),
                    violated=bool(violated[trial]),
                )
            )
        summaries.append(
            HorizonSummary(
                horizon=t,
                violation_rate=float(np.mean(violated)),
                median_trace=float(np.median(trace[g])),
                median_specnorm=float(np.median(specn[g])),
                median_bound=float(np.median(bound[g])),
            )
        )
    return RegretTable(
        rows=rows,
        summaries=summaries,
        t_grid=tuple(grid),
        delta=delta,
        s_bound=float(s_bound),
        trials=trials,
        seed=seed,
    )
