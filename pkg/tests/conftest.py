import numpy as np
import pytest

from nettrack.estimators import EstimatorSpec, rho_error
from nettrack.graphs import (
    CommMatrix,
    Graph,
    comm_from_laplacian,
    comm_matrix,
    comm_metropolis,
    laplacian,
    make_graph,
)
from nettrack.model import ModelParams


def random_connected_graph(rng: np.random.Generator, n: int, extra: float = 0.3) -> Graph:
    """Random spanning tree plus independent extra edges."""
    edges = []
    order = rng.permutation(n)
    for k in range(1, n):
        attach = order[rng.integers(0, k)]
        edges.append((int(order[k]), int(attach)))
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < extra:
                edges.append((i, j))
    return make_graph(n, edges)


def random_comm(rng: np.random.Generator, g: Graph, method: str) -> CommMatrix:
    """Metropolis weights, or I - beta*L with beta kept inside the valid range."""
    if method == "metropolis":
        return comm_metropolis(g)
    d_max = int(g.degrees().max())
    beta = float(rng.uniform(0.2, 0.95)) / max(d_max, 1)
    return comm_from_laplacian(g, beta)


def psd_comm(comm: CommMatrix) -> CommMatrix:
    """(P + I)/2 keeps the sparsity pattern and moves the spectrum into [0, 1]."""
    p = (comm.p + np.eye(comm.n)) / 2.0
    return comm_matrix(p, comm.graph)


def random_stable_config(
    rng: np.random.Generator,
    n_max: int = 16,
    rho_cap: float = 0.95,
    method: str | None = None,
):
    """Random (comm, spec, params) with rho(Q) below rho_cap."""
    while True:
        n = int(rng.integers(2, n_max + 1))
        g = random_connected_graph(rng, n, extra=float(rng.uniform(0.1, 0.6)))
        pick = method if method is not None else ("metropolis", "laplacian")[int(rng.integers(2))]
        comm = random_comm(rng, g, pick)
        alpha = float(rng.uniform(0.05, 1.0))
        kind = "hat" if rng.random() < 0.5 else "tilde"
        a_limit = 1.0 / max(np.abs(comm.eigenvalues - alpha))
        a = float(rng.choice([-1.0, 1.0])) * a_limit * float(rng.uniform(0.2, rho_cap))
        if abs(a) < 1e-3:
            continue
        spec = EstimatorSpec(kind=kind, alpha=alpha)
        params = ModelParams(
            a=a,
            sigma_r2=float(rng.uniform(0.1, 2.0)),
            sigma_w2=float(rng.uniform(0.1, 2.0)),
        )
        if rho_error(comm, a, alpha) <= rho_cap:
            return comm, spec, params


@pytest.fixture
def rng():
    return np.random.default_rng(20250817)
