"""Consensus + innovation estimator updates and their error dynamics.

Two one-step updates share the mixing matrix P and gain alpha:

  hat   : each agent corrects with its own innovation y_i - xhat_i
  tilde : agents first average neighbor observations, then correct

Stacked errors xi_t = beliefs_t - x_t * 1 follow xi_{t+1} = Q xi_t + s_t
with Q = a (P - alpha I); the driving noise covariance S depends on the
variant.  Stability is governed by rho(Q) = |a| * max_i |lambda_i(P) - alpha|,
which we evaluate from P's spectrum rather than re-decomposing Q.
"""
from __future__ import annotations

from dataclasses import dataclass

import math

import numpy as np

from .graphs import CommMatrix
from .model import ModelParams

STABILITY_MARGIN = 1e-12

ESTIMATOR_KINDS = ("hat", "tilde")


class UnstableSystemError(ValueError):
    """Raised when a computation requires rho(Q) < 1 but the config violates it."""


@dataclass(frozen=True)
class EstimatorSpec:
    kind: str
    alpha: float

    def __post_init__(self):
        if self.kind not in ESTIMATOR_KINDS:
            raise ValueError(f"kind must be one of {ESTIMATOR_KINDS}, got {self.kind!r}")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")


def update_hat(beliefs: np.ndarray, y: np.ndarray, comm: CommMatrix, a: float, alpha: float) -> np.ndarray:
    """x_{t+1} = a (P x_t + alpha (y_t - x_t)), own-observation innovation.

    Works on a single belief vector (n,) or a batch of columns (n, B).
    """
    return a * (comm.p @ beliefs + alpha * (y - beliefs))


def update_tilde(beliefs: np.ndarray, y: np.ndarray, comm: CommMatrix, a: float, alpha: float) -> np.ndarray:
    """Variant that mixes neighbor observations before the innovation step."""
    return a * (comm.p @ beliefs + alpha * (comm.p @ y - beliefs))


UPDATES = {"hat": update_hat, "tilde": update_tilde}


@dataclass(frozen=True)
class ErrorSystem:
    """Error recursion xi_{t+1} = Q xi_t + s_t with E[s s^T] = S."""

    q: np.ndarray
    s: np.ndarray
    rho: float
    kind: str

    @property
    def n(self) -> int:
        return self.q.shape[0]


def rho_error(comm: CommMatrix, a: float, alpha: float) -> float:
    """Spectral radius of a (P - alpha I) from P's eigenvalues."""
    return abs(a) * float(np.max(np.abs(comm.eigenvalues - alpha)))


def build_error_system(comm: CommMatrix, spec: EstimatorSpec, params: ModelParams) -> ErrorSystem:
    a, alpha = params.a, spec.alpha
    n = comm.n
    q = a * (comm.p - alpha * np.eye(n))
    ones = np.ones((n, n))
    gain2 = a * a * alpha * alpha * params.sigma_w2
    if spec.kind == "hat":
        s = params.sigma_r2 * ones + gain2 * np.eye(n)
    else:
        s = params.sigma_r2 * ones + gain2 * (comm.p @ comm.p)
    q.flags.writeable = False
    s.flags.writeable = False
    return ErrorSystem(q=q, s=s, rho=rho_error(comm, a, alpha), kind=spec.kind)


def is_stable(sys: ErrorSystem) -> bool:
    return sys.rho < 1.0 - STABILITY_MARGIN


def unbiasedness_bound(comm: CommMatrix) -> float:
    """Largest |a| for which some alpha keeps the error mean convergent: 2/(1 - lambda_min)."""
    gap = 1.0 - comm.lambda_min
    if gap < 1e-15:
        return math.inf  # P = I: every mode sits at 1, any |a| < 1/(1-alpha) works
    return 2.0 / gap


def optimal_alpha_for_stability(comm: CommMatrix) -> float:
    """Gain minimizing max_i |lambda_i(P) - alpha|: midpoint (1 + lambda_min)/2."""
    return 0.5 * (1.0 + comm.lambda_min)


def stabilizing_alpha_grid(comm: CommMatrix, a: float, step: float = 1e-4):
    """Scan alpha over (0, 1] on a uniform grid; return (alpha, rho) at the
    grid minimum if it is stable, else None."""
    alphas = np.arange(step, 1.0 + step / 2, step)
    rhos = abs(a) * np.max(np.abs(comm.eigenvalues[None, :] - alphas[:, None]), axis=1)
    k = int(np.argmin(rhos))
    if rhos[k] < 1.0:
        return float(alphas[k]), float(rhos[k])
    return None
