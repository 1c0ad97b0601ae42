"""Where to add an edge: first-order MSD response of the tilde estimator.

Adding weight eps on a non-edge {i, j} perturbs P by eps * D with
D = -(e_i - e_j)(e_i - e_j)^T.  To first order each eigenvalue moves by
z_k = -eps (v_k[i] - v_k[j])^2, and the observation part of the MSD moves by
(a^2 alpha^2 sigma_w2 / N) * sum_k h_k with

    h_k = z_k (2 (1 - alpha^2 a^2) lambda_k + 2 a^2 alpha lambda_k^2)
          / (1 - a^2 (lambda_k - alpha)^2)^2.

The sum is the ranking score (lower is better); a spectrum-free lower bound
on it needs only the entries of P and P^2 at the candidate pair.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .estimators import EstimatorSpec, UnstableSystemError
from .graphs import CommMatrix, EdgePerturbation, perturb
from .model import ModelParams
from .msd import MODE_DENOM_FLOOR, msd_closed_form

DEFAULT_EPS_CAP = 1e-2
PSD_TOL = -1e-10


@dataclass(frozen=True)
class EdgeCandidate:
    i: int
    j: int
    eps: float
    score_first_order: float
    lower_bound: float
    delta_msd_exact: float | None = None


def z_scores(comm: CommMatrix, i: int, j: int, eps: float) -> np.ndarray:
    """First-order eigenvalue shifts for adding weight eps on {i, j}.

    The consensus mode never moves (the perturbation annihilates the ones
    vector), so z[0] is pinned to zero exactly.
    """
    if i == j:
        raise ValueError("candidate needs two distinct nodes")
    if eps < 0:
        raise ValueError(f"eps must be nonnegative, got {eps}")
    v = comm.eigenvectors
    z = -eps * (v[i, :] - v[j, :]) ** 2
    z[0] = 0.0
    return z


def _mode_denoms(comm: CommMatrix, spec: EstimatorSpec, params: ModelParams) -> np.ndarray:
    lam = comm.eigenvalues
    denom = 1.0 - params.a ** 2 * (lam - spec.alpha) ** 2
    if np.min(denom) < MODE_DENOM_FLOOR:
        k = int(np.argmin(denom))
        raise UnstableSystemError(
            f"mode {k} is unstable (denominator {denom[k]:.3e}); "
            "first-order analysis needs a stable base system"
        )
    return denom


def first_order_score(
    comm: CommMatrix, spec: EstimatorSpec, params: ModelParams, i: int, j: int, eps: float
) -> float:
    """sum_k h_k for the candidate pair; more negative means a better edge."""
    a, alpha = params.a, spec.alpha
    lam = comm.eigenvalues
    denom = _mode_denoms(comm, spec, params)
    z = z_scores(comm, i, j, eps)
    numer = 2.0 * (1.0 - alpha * alpha * a * a) * lam + 2.0 * a * a * alpha * lam ** 2
    return float(np.sum(z * numer / denom ** 2))


def first_order_delta_msd(
    comm: CommMatrix, spec: EstimatorSpec, params: ModelParams, i: int, j: int, eps: float
) -> float:
    """Predicted tilde-MSD change: the score rescaled by a^2 alpha^2 sigma_w2 / N."""
    a, alpha = params.a, spec.alpha
    scale = a * a * alpha * alpha * params.sigma_w2 / comm.n
    return scale * first_order_score(comm, spec, params, i, j, eps)


def exact_delta_msd(
    comm: CommMatrix, spec: EstimatorSpec, params: ModelParams, i: int, j: int, eps: float
) -> float:
    """MSD(P + eps D) - MSD(P) via a fresh eigendecomposition of the perturbed matrix."""
    if eps == 0.0:
        return 0.0
    before = msd_closed_form(comm, spec, params).total
    after_comm = perturb(comm, EdgePerturbation(i=i, j=j, eps=eps), "add")
    after = msd_closed_form(after_comm, spec, params).total
    return after - before


def lower_bound(
    comm: CommMatrix,
    spec: EstimatorSpec,
    params: ModelParams,
    i: int,
    j: int,
    eps: float,
    p_squared: np.ndarray | None = None,
) -> float:
    """Spectrum-free lower bound on the first-order score.

    Guaranteed to sit below the score when P is PSD and |a| < 1/|alpha|;
    it is evaluated unconditionally, but outside that regime the ordering
    is not promised.
    """
    a, alpha = params.a, spec.alpha
    lam = comm.eigenvalues
    zeta = float(np.max(np.abs(lam[1:] - alpha))) if comm.n > 1 else 0.0
    d = 1.0 - a * a * zeta * zeta
    if d < MODE_DENOM_FLOOR:
        raise UnstableSystemError(
            f"non-consensus modes are unstable (1 - a^2 zeta^2 = {d:.3e})"
        )
    p2 = comm.p @ comm.p if p_squared is None else p_squared
    p = comm.p
    quad = (1.0 - alpha * alpha * a * a) * (p[i, i] + p[j, j]) + a * a * alpha * (
        p2[i, i] + p2[j, j] - 2.0 * p2[i, j]
    )
    return -2.0 * eps * quad / d ** 2


def default_eps(comm: CommMatrix) -> float:
    """One tenth of the smallest self-weight, capped at 1e-2."""
    min_diag = float(np.min(np.diag(comm.p)))
    return min(DEFAULT_EPS_CAP, 0.1 * min_diag)


def optimal_edge_search(
    comm: CommMatrix,
    spec: EstimatorSpec,
    params: ModelParams,
    eps: float | None = None,
    top_k: int = 10,
) -> list[EdgeCandidate]:
    """Score every absent edge and rank ascending (ties broken by node pair).

    exact_delta_msd is evaluated for the top_k candidates whose perturbation
    is feasible (eps below both self-weights); the rest carry None.  Returns
    an empty list when the graph is already complete.
    """
    pairs = comm.graph.non_edges()
    if not pairs:
        return []
    if eps is None:
        eps = default_eps(comm)
        if eps <= 0:
            raise ValueError(
                "a self-weight is zero, so no default perturbation size exists; "
                "pass eps explicitly"
            )
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if top_k < 0:
        raise ValueError(f"top_k must be nonnegative, got {top_k}")
    p2 = comm.p @ comm.p
    scored = []
    for i, j in pairs:
        scored.append(
            (
                first_order_score(comm, spec, params, i, j, eps),
                lower_bound(comm, spec, params, i, j, eps, p_squared=p2),
                i,
                j,
            )
        )
    scored.sort(key=lambda rec: (rec[0], rec[2], rec[3]))
    out = []
    diag = np.diag(comm.p)
    for rank, (score, lb, i, j) in enumerate(scored):
        exact = None
        if rank < top_k and eps < min(diag[i], diag[j]):
            exact = exact_delta_msd(comm, spec, params, i, j, eps)
        out.append(
            EdgeCandidate(
                i=i,
                j=j,
                eps=eps,
                score_first_order=score,
                lower_bound=lb,
                delta_msd_exact=exact,
            )
        )
    return out
