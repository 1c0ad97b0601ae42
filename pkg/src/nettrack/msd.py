"""Steady-state mean-square deviation: closed forms, limits, and references.

The per-agent MSD of a stable error system splits into an innovation part
that only depends on the gain,

    R(alpha) = sigma_r2 / (1 - a^2 (1 - alpha)^2),

plus an observation part summed over the spectrum of P,

    W = (1/N) sum_i  a^2 alpha^2 sigma_w2 * m_i / (1 - a^2 (lambda_i - alpha)^2),

with mode weight m_i = 1 for the hat variant and m_i = lambda_i^2 for the
tilde variant.  A fixed-point iteration of the discrete Lyapunov equation
serves as the independent numeric oracle for the same quantity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .estimators import ErrorSystem, EstimatorSpec, UnstableSystemError
from .graphs import CommMatrix
from .model import ModelParams

# modes with 1 - a^2 (lambda - alpha)^2 below this are treated as unstable
MODE_DENOM_FLOOR = 1e-10

SIMPSON_PANELS = 2 ** 14
SIMPSON_RICHARDSON_TOL = 1e-9

NAMED_LIMITS = ("complete", "star", "cycle")


@dataclass(frozen=True)
class MsdReport:
    kind: str
    alpha: float
    a: float
    sigma_r2: float
    sigma_w2: float
    r_msd: float
    w_msd: float
    total: float
    per_mode: np.ndarray  # observation-part contribution of each mode; sums to w_msd
    rho: float


def innovation_msd(alpha: float, params: ModelParams) -> float:
    """R(alpha), the network-independent part of the MSD."""
    denom = 1.0 - params.a ** 2 * (1.0 - alpha) ** 2
    if denom < MODE_DENOM_FLOOR:
        raise UnstableSystemError(
            f"|a (1 - alpha)| = {abs(params.a) * abs(1 - alpha):.6g} leaves the "
            "innovation mode unstable"
        )
    return params.sigma_r2 / denom


def msd_from_eigenvalues(
    eigenvalues: np.ndarray, spec: EstimatorSpec, params: ModelParams
) -> MsdReport:
    """Closed-form MSD given the spectrum of P (descending order expected)."""
    lam = np.asarray(eigenvalues, dtype=float)
    a, alpha = params.a, spec.alpha
    n = lam.shape[0]
    denom = 1.0 - a ** 2 * (lam - alpha) ** 2
    bad = np.nonzero(denom < MODE_DENOM_FLOOR)[0]
    if bad.size:
        k = int(bad[0])
        raise UnstableSystemError(
            f"mode {k} (lambda = {lam[k]:.12g}) is unstable: "
            f"1 - a^2 (lambda - alpha)^2 = {denom[k]:.3e}"
        )
    r_msd = innovation_msd(alpha, params)
    weights = np.ones(n) if spec.kind == "hat" else lam ** 2
    per_mode = (a * a * alpha * alpha * params.sigma_w2) * weights / denom / n
    w_msd = float(per_mode.sum())
    rho = abs(a) * float(np.max(np.abs(lam - alpha)))
    per_mode.flags.writeable = False
    return MsdReport(
        kind=spec.kind,
        alpha=alpha,
        a=a,
        sigma_r2=params.sigma_r2,
        sigma_w2=params.sigma_w2,
        r_msd=r_msd,
        w_msd=w_msd,
        total=r_msd + w_msd,
        per_mode=per_mode,
        rho=rho,
    )


def msd_closed_form(comm: CommMatrix, spec: EstimatorSpec, params: ModelParams) -> MsdReport:
    """Closed-form MSD of the chosen estimator on communication matrix P."""
    return msd_from_eigenvalues(comm.eigenvalues, spec, params)


def steady_state_sigma_oracle(
    sys: ErrorSystem, tol: float = 1e-13, max_iter: int = 10 ** 6
) -> np.ndarray:
    """Fixed-point iteration of Sigma = Q Sigma Q^T + S from Sigma_0 = 0.

    Independent of the closed form on purpose: it touches the matrices, not
    the spectrum.  Stops when the Frobenius increment falls below
    tol * (1 + ||Sigma||_F); raises if the iteration fails to settle.
    """
    q, s = sys.q, sys.s
    sigma = np.zeros_like(s)
    with np.errstate(over="raise", invalid="raise"):
        for _ in range(max_iter):
            try:
                nxt = q @ sigma @ q.T + s
            except FloatingPointError:
                break  # iterates blew past float range: definitely divergent
            if np.linalg.norm(nxt - sigma) < tol * (1.0 + np.linalg.norm(sigma)):
                return nxt
            sigma = nxt
    raise UnstableSystemError(
        f"Lyapunov iteration did not converge in {max_iter} steps "
        f"(rho(Q) = {sys.rho:.6g}); the system is unstable or too close to it"
    )


def _cycle_limit_integrand(tau: np.ndarray, a: float, alpha: float, beta: float,
                           sigma_w2: float) -> np.ndarray:
    lam = 1.0 - beta * (2.0 - 2.0 * np.cos(tau))
    denom = 1.0 - a * a * (lam - alpha) ** 2
    if np.min(denom) < MODE_DENOM_FLOOR:
        k = int(np.argmin(denom))
        raise UnstableSystemError(
            f"cycle limit integrand is singular near tau = {tau[k]:.6g} "
            f"(denominator {denom[k]:.3e}); no stable large-N limit for this (a, alpha, beta)"
        )
    return (a * a * alpha * alpha * sigma_w2) / denom


def _simpson(values: np.ndarray, h: float) -> float:
    acc = values[0] + values[-1] + 4.0 * values[1:-1:2].sum() + 2.0 * values[2:-2:2].sum()
    return float(acc * h / 3.0)


def msd_limit_named(
    family: str, spec: EstimatorSpec, params: ModelParams, beta: float | None = None
) -> float:
    """Large-N MSD limit for the named constructions.

    complete/hat uses P = I - (1-alpha)/N * L, star/hat the scaled star,
    cycle/hat the fixed-beta ring (beta = 0 recovers the diminishing-beta
    case), and complete/tilde uses P = I - L/N.  Other combinations have no
    closed-form limit here.
    """
    a, alpha = params.a, spec.alpha
    r_msd = innovation_msd(alpha, params)  # also validates |a (1 - alpha)| < 1
    w_inf = a * a * alpha * alpha * params.sigma_w2
    if family == "complete" and spec.kind == "hat":
        return r_msd + w_inf
    if family == "star" and spec.kind == "hat":
        return r_msd + w_inf / (1.0 - a ** 2 * (1.0 - alpha) ** 2)
    if family == "complete" and spec.kind == "tilde":
        return r_msd
    if family == "cycle" and spec.kind == "hat":
        if beta is None:
            raise ValueError("cycle limit needs the Laplacian scale beta")
        if beta < 0:
            raise ValueError(f"beta must be nonnegative, got {beta}")
        tau = np.linspace(0.0, 2.0 * math.pi, SIMPSON_PANELS + 1)
        vals = _cycle_limit_integrand(tau, a, alpha, beta, params.sigma_w2)
        h = 2.0 * math.pi / SIMPSON_PANELS
        fine = _simpson(vals, h)
        half = _simpson(vals[::2], 2.0 * h)
        if abs(fine - half) >= SIMPSON_RICHARDSON_TOL:
            raise ArithmeticError(
                f"cycle-limit quadrature did not converge: refining changed the "
                f"integral by {abs(fine - half):.3e}"
            )
        return r_msd + fine / (2.0 * math.pi)
    raise ValueError(
        f"no closed-form limit implemented for family={family!r}, kind={spec.kind!r}"
    )


def kalman_steady_state(params: ModelParams, n: int) -> float:
    """Steady-state predictive variance of the centralized Kalman filter
    fusing all n observations; tends to sigma_r2 as n grows."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if params.sigma_w2 <= 0:
        raise ValueError("kalman_steady_state needs sigma_w2 > 0")
    a2, sw, sr = params.a ** 2, params.sigma_w2, params.sigma_r2
    b = a2 * sw - sw + n * sr
    return (b + math.sqrt(b * b + 4.0 * n * sw * sr)) / (2.0 * n)


def msd_bound_reference(alpha: float, params: ModelParams) -> float:
    """Reference curve (sigma_r2 + alpha^2 sigma_w2) / alpha for the a = 1 comparison."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    return (params.sigma_r2 + alpha ** 2 * params.sigma_w2) / alpha


def connectivity_ratio(alpha: float, params: ModelParams) -> float:
    """Limit MSD of the complete graph over the disconnected network, hat variant."""
    a = params.a
    d = 1.0 - a * a * (1.0 - alpha) ** 2
    if d < MODE_DENOM_FLOOR:
        raise UnstableSystemError(
            f"|a (1 - alpha)| = {abs(a) * abs(1 - alpha):.6g} >= 1: ratio undefined"
        )
    g = a * a * alpha * alpha * params.sigma_w2
    denom = params.sigma_r2 + g
    if denom <= 0:
        raise ValueError("need sigma_r2 + a^2 alpha^2 sigma_w2 > 0")
    return (params.sigma_r2 + g * d) / denom


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _objective_fn(
    objective, params: ModelParams, beta: float | None
) -> Callable[[float], float]:
    if callable(objective):
        base = objective
    elif objective == "bound":
        base = lambda alpha: msd_bound_reference(alpha, params)
    elif objective in ("complete_hat", "star_hat", "cycle_hat", "complete_tilde"):
        family, kind = objective.rsplit("_", 1)
        base = lambda alpha: msd_limit_named(
            family, EstimatorSpec(kind=kind, alpha=alpha), params, beta=beta
        )
    else:
        raise ValueError(f"unknown objective {objective!r}")

    def safe(alpha: float) -> float:
        try:
            v = base(alpha)
        except (UnstableSystemError, ArithmeticError):
            return math.inf
        return v if math.isfinite(v) else math.inf

    return safe


def optimize_alpha(
    objective,
    params: ModelParams,
    beta: float | None = None,
    lo: float = 1e-9,
    hi: float = 1.0,
    tol: float = 1e-6,
    grid: int = 512,
) -> tuple[float, float]:
    """Minimize a closed-form MSD expression over the gain.

    objective is either a callable alpha -> value or one of the named
    curves: "complete_hat", "star_hat", "cycle_hat" (needs beta),
    "complete_tilde", "bound".  A coarse grid brackets the minimum and a
    golden-section refinement narrows it to |delta alpha| <= tol.  Unstable
    gains evaluate to infinity; if every grid point is infeasible the search
    reports failure.
    """
    f = _objective_fn(objective, params, beta)
    alphas = np.linspace(lo, hi, grid + 1)
    vals = np.array([f(float(al)) for al in alphas])
    k = int(np.argmin(vals))
    if not math.isfinite(vals[k]):
        raise UnstableSystemError("no stable alpha in the search range")
    a_lo = float(alphas[max(k - 1, 0)])
    a_hi = float(alphas[min(k + 1, grid)])
    x1 = a_hi - _GOLDEN * (a_hi - a_lo)
    x2 = a_lo + _GOLDEN * (a_hi - a_lo)
    f1, f2 = f(x1), f(x2)
    while a_hi - a_lo > tol:
        if f1 <= f2:
            a_hi, x2, f2 = x2, x1, f1
            x1 = a_hi - _GOLDEN * (a_hi - a_lo)
            f1 = f(x1)
        else:
            a_lo, x1, f1 = x1, x2, f2
            x2 = a_lo + _GOLDEN * (a_hi - a_lo)
            f2 = f(x2)
    best = 0.5 * (a_lo + a_hi)
    return best, f(best)
