"""Undirected graphs and symmetric doubly stochastic communication matrices."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .spectral import eig_sym

# eigenvalue slack: lambda_1 must sit within EIG_TOL of 1, lambda_N above -1 + EIG_TOL
EIG_TOL = 1e-9
# tiny negative entries from float cancellation get clamped to zero
ENTRY_CLAMP = -1e-12
ROW_SUM_TOL = 1e-9
ONES_ALIGN_TOL = 1e-8

NAMED_FAMILIES = ("complete", "star", "cycle", "path")


class GraphError(ValueError):
    """Invalid graph construction."""


class CommMatrixError(ValueError):
    """Matrix fails the symmetric doubly stochastic contract."""


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on nodes 0..n-1; edges stored as sorted pairs."""

    n: int
    edges: frozenset[tuple[int, int]]

    def _edge_array(self) -> np.ndarray:
        if not self.edges:
            return np.zeros((0, 2), dtype=int)
        return np.array(list(self.edges), dtype=int)

    def degrees(self) -> np.ndarray:
        e = self._edge_array()
        return np.bincount(e.ravel(), minlength=self.n)

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        e = self._edge_array()
        a[e[:, 0], e[:, 1]] = 1.0
        a[e[:, 1], e[:, 0]] = 1.0
        return a

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges

    def non_edges(self) -> list[tuple[int, int]]:
        """Unordered node pairs not joined by an edge, lexicographic order."""
        return [
            (i, j)
            for i in range(self.n)
            for j in range(i + 1, self.n)
            if (i, j) not in self.edges
        ]

    def with_edge(self, i: int, j: int) -> "Graph":
        return Graph(self.n, self.edges | {(min(i, j), max(i, j))})

    def without_edge(self, i: int, j: int) -> "Graph":
        return Graph(self.n, self.edges - {(min(i, j), max(i, j))})


def make_graph(n: int, edge_list: Iterable[Sequence[int]]) -> Graph:
    """Build a Graph from an iterable of node pairs, validating endpoints."""
    if n < 1:
        raise GraphError(f"graph needs at least one node, got n={n}")
    edges = set()
    for pair in edge_list:
        if len(pair) != 2:
            raise GraphError(f"edge {pair!r} is not a pair")
        i, j = int(pair[0]), int(pair[1])
        if i == j:
            raise GraphError(f"self-loop at node {i} is not allowed")
        if not (0 <= i < n and 0 <= j < n):
            raise GraphError(f"edge ({i}, {j}) has an endpoint outside 0..{n - 1}")
        edges.add((min(i, j), max(i, j)))
    return Graph(n, frozenset(edges))


def build_named_graph(family: str, n: int) -> Graph:
    """One of the standard families: complete, star (hub 0), cycle, path."""
    if family == "complete":
        if n < 1:
            raise GraphError("complete graph needs n >= 1")
        edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    elif family == "star":
        if n < 2:
            raise GraphError("star needs n >= 2")
        edges = [(0, j) for j in range(1, n)]
    elif family == "cycle":
        if n < 3:
            raise GraphError("cycle needs n >= 3")
        edges = [(i, (i + 1) % n) for i in range(n)]
    elif family == "path":
        if n < 1:
            raise GraphError("path needs n >= 1")
        edges = [(i, i + 1) for i in range(n - 1)]
    else:
        raise GraphError(f"unknown graph family {family!r}; pick one of {NAMED_FAMILIES}")
    return make_graph(n, edges)


def laplacian(g: Graph) -> np.ndarray:
    """Combinatorial Laplacian D - A."""
    a = g.adjacency()
    return np.diag(a.sum(axis=1)) - a


@dataclass(frozen=True)
class CommMatrix:
    """Validated communication matrix with its spectrum attached.

    p is symmetric doubly stochastic with eigenvalues in (-1, 1]; eigenvalues
    are sorted descending with eigenvalues[0] = 1 and eigenvectors[:, 0] the
    normalized all-ones vector.
    """

    p: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    graph: Graph

    @property
    def n(self) -> int:
        return self.p.shape[0]

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[-1])


def _align_ones_eigenvector(vals: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """Rotate the top eigenspace so column 0 is the all-ones direction.

    The ones vector is always an eigenvector at eigenvalue 1, but when that
    eigenvalue is degenerate (e.g. P = I) the solver returns an arbitrary
    basis.  A Householder rotation inside the near-1 eigenspace fixes the
    representative without disturbing the decomposition.
    """
    n = vecs.shape[0]
    ones = np.full(n, 1.0 / np.sqrt(n))
    k = int(np.sum(vals > vals[0] - EIG_TOL))
    if k <= 1:
        v0 = vecs[:, 0]
        if abs(abs(float(v0 @ ones)) - 1.0) > ONES_ALIGN_TOL * n:
            raise CommMatrixError("top eigenvector is not the constant vector")
        if float(v0 @ ones) < 0:
            vecs = vecs.copy()
            vecs[:, 0] = -v0
        return vecs
    u = vecs[:, :k]
    c = u.T @ ones
    c = c / np.linalg.norm(c)
    # Householder within eigenspace coordinates mapping e_1 -> c
    h = c.copy()
    h[0] -= 1.0
    out = vecs.copy()
    if np.linalg.norm(h) > 1e-14:
        gram = np.eye(k) - 2.0 * np.outer(h, h) / float(h @ h)
        out[:, :k] = u @ gram
    out[:, 0] = ones  # exact representative; same span up to 1e-15
    return out


def comm_matrix(p: np.ndarray, graph: Graph) -> CommMatrix:
    """Validate a dense candidate against the doubly stochastic contract."""
    p = np.array(p, dtype=float)
    n = graph.n
    if p.shape != (n, n):
        raise CommMatrixError(f"matrix shape {p.shape} does not match n={n}")
    if not np.array_equal(p, p.T):
        raise CommMatrixError("matrix is not exactly symmetric as stored")
    if np.min(p) < ENTRY_CLAMP:
        i, j = np.unravel_index(int(np.argmin(p)), p.shape)
        raise CommMatrixError(f"entry ({i},{j}) = {p[i, j]:.3e} is negative")
    p[(p < 0)] = 0.0  # clamp the in-tolerance negatives
    rows = p.sum(axis=1)
    if np.max(np.abs(rows - 1.0)) > ROW_SUM_TOL:
        i = int(np.argmax(np.abs(rows - 1.0)))
        raise CommMatrixError(f"row {i} sums to {rows[i]!r}, expected 1")
    allowed = graph.adjacency().astype(bool)
    np.fill_diagonal(allowed, True)
    stray = (p > 0.0) & ~allowed
    if stray.any():
        i, j = map(int, np.argwhere(stray)[0])
        raise CommMatrixError(f"entry ({i},{j}) > 0 but {{{i},{j}}} is not an edge")
    dec = eig_sym(p)
    vals = np.array(dec.eigenvalues)
    if abs(vals[0] - 1.0) > EIG_TOL:
        raise CommMatrixError(f"largest eigenvalue {vals[0]!r} is not 1")
    if vals[-1] <= -1.0 + EIG_TOL:
        raise CommMatrixError(
            f"smallest eigenvalue {vals[-1]!r} violates the lambda_min > -1 requirement"
        )
    vecs = _align_ones_eigenvector(vals, np.array(dec.eigenvectors))
    p.flags.writeable = False
    vals.flags.writeable = False
    vecs.flags.writeable = False
    return CommMatrix(p=p, eigenvalues=vals, eigenvectors=vecs, graph=graph)


def comm_from_laplacian(g: Graph, beta: float) -> CommMatrix:
    """P = I - beta * L.

    beta must be positive and small enough that no diagonal entry goes
    negative and the spectrum stays above -1.
    """
    if beta <= 0:
        raise CommMatrixError(f"beta must be positive, got {beta}")
    lap = laplacian(g)
    p = np.eye(g.n) - beta * lap
    diag = np.diag(p)
    if np.min(diag) < ENTRY_CLAMP:
        i = int(np.argmin(diag))
        raise CommMatrixError(
            f"beta={beta} drives diagonal entry ({i},{i}) to {diag[i]:.3e} < 0"
        )
    return comm_matrix(p, g)


def comm_metropolis(g: Graph) -> CommMatrix:
    """Metropolis weights: p_ij = 1 / (1 + max(d_i, d_j)) on edges."""
    d = g.degrees()
    p = np.zeros((g.n, g.n))
    for i, j in sorted(g.edges):
        w = 1.0 / (1.0 + max(d[i], d[j]))
        p[i, j] = w
        p[j, i] = w
    np.fill_diagonal(p, 1.0 - p.sum(axis=1))
    return comm_matrix(p, g)


def comm_complete(n: int, alpha: float | None = None) -> CommMatrix:
    """Complete-graph matrix I - beta*L with beta = (1-alpha)/n, or 1/n if alpha is None."""
    g = build_named_graph("complete", n)
    if alpha is None:
        return comm_from_laplacian(g, 1.0 / n)
    if not 0 < alpha <= 1:
        raise CommMatrixError(f"alpha must be in (0, 1], got {alpha}")
    if alpha == 1.0:
        # beta -> 0 means P = I; build it directly on the complete graph
        return comm_matrix(np.eye(n), g)
    return comm_from_laplacian(g, (1.0 - alpha) / n)


@dataclass(frozen=True)
class EdgePerturbation:
    """Symmetric weight shift of size eps on the pair {i, j}."""

    i: int
    j: int
    eps: float

    def __post_init__(self):
        if self.i == self.j:
            raise GraphError(f"perturbation needs two distinct nodes, got {self.i}")
        if self.eps <= 0:
            raise GraphError(f"perturbation size must be positive, got {self.eps}")

    @property
    def pair(self) -> tuple[int, int]:
        return (min(self.i, self.j), max(self.i, self.j))


def perturb(comm: CommMatrix, pert: EdgePerturbation, sign: str) -> CommMatrix:
    """Add or remove an edge by moving eps between the pair and its diagonals.

    "add" requires p_ij = 0 and eps < min(p_ii, p_jj); "remove" requires
    eps to equal the current weight p_ij exactly.  Only four entries change.
    """
    i, j = pert.pair
    eps = pert.eps
    p = comm.p
    n = comm.n
    if not (0 <= i < n and 0 <= j < n):
        raise GraphError(f"pair ({i},{j}) outside 0..{n - 1}")
    if sign == "add":
        if p[i, j] != 0.0:
            raise CommMatrixError(
                f"cannot add ({i},{j}): entry already holds weight {p[i, j]!r}"
            )
        if eps >= min(p[i, i], p[j, j]):
            raise CommMatrixError(
                f"eps={eps} must stay below min(p[{i},{i}], p[{j},{j}]) = "
                f"{min(p[i, i], p[j, j])!r}"
            )
        q = np.array(p)
        q[i, i] -= eps
        q[j, j] -= eps
        q[i, j] = eps
        q[j, i] = eps
        return comm_matrix(q, comm.graph.with_edge(i, j))
    if sign == "remove":
        if p[i, j] <= 0.0:
            raise CommMatrixError(f"cannot remove ({i},{j}): no weight stored there")
        if eps != p[i, j]:
            raise CommMatrixError(
                f"removal eps={eps!r} must equal the stored weight {p[i, j]!r}"
            )
        q = np.array(p)
        q[i, i] += eps
        q[j, j] += eps
        q[i, j] = 0.0
        q[j, i] = 0.0
        return comm_matrix(q, comm.graph.without_edge(i, j))
    raise ValueError(f"sign must be 'add' or 'remove', got {sign!r}")
