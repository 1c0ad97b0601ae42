"""Scenario files: one TOML document describing graph, weights, model,
estimator, and per-subcommand settings.

Validation is strict: unknown keys are hard errors, and every diagnostic
names the offending field path (e.g. "estimator.alpha").  Omitted sections
fall back to documented defaults, and the fully resolved scenario (defaults
expanded) is embedded in every output artifact.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .estimators import EstimatorSpec
from .graphs import (
    CommMatrix,
    Graph,
    build_named_graph,
    comm_from_laplacian,
    comm_matrix,
    comm_metropolis,
    make_graph,
)
from .model import NOISE_FAMILIES, ModelParams
from .simulate import INIT_MODES, RECORD_MODES, SimConfig

WEIGHT_METHODS = ("metropolis", "laplacian", "explicit")

DEFAULT_REGRET_HORIZONS = (256, 512, 1024, 2048, 4096)


class ScenarioError(ValueError):
    """Invalid scenario file; message carries the field path."""


@dataclass(frozen=True)
class WeightsCfg:
    method: str = "metropolis"
    beta: float | None = None
    matrix: tuple[tuple[float, ...], ...] | None = None


@dataclass(frozen=True)
class RegretCfg:
    delta: float = 0.05
    horizons: tuple[int, ...] = DEFAULT_REGRET_HORIZONS
    trials: int = 100
    init: str = "zeros"
    s_override: float | None = None


@dataclass(frozen=True)
class DesignCfg:
    eps: float | None = None  # None: 0.1 * min self-weight, capped at 1e-2
    top_k: int = 10


@dataclass(frozen=True)
class SweepCfg:
    points: int = 512
    alpha_min: float | None = None  # None: 1/points
    alpha_max: float = 1.0


@dataclass(frozen=True)
class Scenario:
    graph: Graph
    graph_family: str | None  # None when built from an explicit edge list
    weights: WeightsCfg
    model: ModelParams
    estimator: EstimatorSpec
    sim: SimConfig
    regret: RegretCfg
    design: DesignCfg
    sweep: SweepCfg

    def resolved(self) -> dict:
        """Plain dict of the full configuration, defaults expanded."""
        if self.weights.method == "explicit":
            weights = {
                "method": "explicit",
                "matrix": [list(row) for row in self.weights.matrix],
            }
        elif self.weights.method == "laplacian":
            weights = {"method": "laplacian", "beta": self.weights.beta}
        else:
            weights = {"method": "metropolis"}
        if self.graph_family is not None:
            graph = {"family": self.graph_family, "n": self.graph.n}
        else:
            graph = {"edges": [list(e) for e in sorted(self.graph.edges)], "n": self.graph.n}
        out = {
            "graph": graph,
            "weights": weights,
            "model": {
                "a": self.model.a,
                "sigma_r2": self.model.sigma_r2,
                "sigma_w2": self.model.sigma_w2,
                "x0": self.model.x0,
                "x0_sigma2": self.model.x0_sigma2,
                "noise": self.model.noise,
            },
            "estimator": {"kind": self.estimator.kind, "alpha": self.estimator.alpha},
            "sim": {
                "horizon": self.sim.horizon,
                "trials": self.sim.trials,
                "seed": self.sim.seed,
                "burn_in": self.sim.burn_in,
                "record": self.sim.record,
                "allow_unstable": self.sim.allow_unstable,
                "init": self.sim.init,
            },
            "regret": {
                "delta": self.regret.delta,
                "horizons": list(self.regret.horizons),
                "trials": self.regret.trials,
                "init": self.regret.init,
                "s_override": self.regret.s_override,
            },
            "design": {"eps": self.design.eps, "top_k": self.design.top_k},
            "sweep": {
                "points": self.sweep.points,
                "alpha_min": self.sweep.alpha_min,
                "alpha_max": self.sweep.alpha_max,
            },
        }
        return out


def _check_keys(table: dict, allowed: tuple[str, ...], path: str) -> None:
    for key in table:
        if key not in allowed:
            raise ScenarioError(f"{path}.{key}: unknown key")


def _as_float(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _as_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{path}: expected an integer, got {value!r}")
    return value


def _as_str(value, path: str, choices: tuple[str, ...] | None = None) -> str:
    if not isinstance(value, str):
        raise ScenarioError(f"{path}: expected a string, got {value!r}")
    if choices is not None and value not in choices:
        raise ScenarioError(f"{path}: must be one of {choices}, got {value!r}")
    return value


def _as_bool(value, path: str) -> bool:
    if not isinstance(value, bool):
        raise ScenarioError(f"{path}: expected a boolean, got {value!r}")
    return value


def _parse_graph(table: dict) -> tuple[Graph, str | None]:
    _check_keys(table, ("family", "edges", "n"), "graph")
    family = table.get("family")
    edges = table.get("edges")
    if (family is None) == (edges is None):
        raise ScenarioError("graph: give exactly one of 'family' or 'edges'")
    if family is not None:
        family = _as_str(family, "graph.family")
        if "n" not in table:
            raise ScenarioError("graph.n: required with a named family")
        n = _as_int(table["n"], "graph.n")
        try:
            return build_named_graph(family, n), family
        except ValueError as e:
            raise ScenarioError(f"graph: {e}") from e
    if not isinstance(edges, list) or not all(
        isinstance(p, list) and len(p) == 2 and all(isinstance(v, int) for v in p)
        for p in edges
    ):
        raise ScenarioError("graph.edges: expected a list of [i, j] integer pairs")
    n = _as_int(table["n"], "graph.n") if "n" in table else (
        max((max(p) for p in edges), default=0) + 1
    )
    try:
        return make_graph(n, edges), None
    except ValueError as e:
        raise ScenarioError(f"graph.edges: {e}") from e


def _parse_weights(table: dict) -> WeightsCfg:
    _check_keys(table, ("method", "beta", "matrix"), "weights")
    method = _as_str(table.get("method", "metropolis"), "weights.method", WEIGHT_METHODS)
    beta = None
    matrix = None
    if method == "laplacian":
        if "beta" not in table:
            raise ScenarioError("weights.beta: required for the laplacian method")
        beta = _as_float(table["beta"], "weights.beta")
        if beta <= 0:
            raise ScenarioError(f"weights.beta: must be positive, got {beta}")
    elif "beta" in table:
        raise ScenarioError("weights.beta: only valid with method = 'laplacian'")
    if method == "explicit":
        raw = table.get("matrix")
        if raw is None:
            raise ScenarioError("weights.matrix: required for the explicit method")
        if not isinstance(raw, list) or not all(isinstance(row, list) for row in raw):
            raise ScenarioError("weights.matrix: expected a list of rows")
        matrix = tuple(
            tuple(_as_float(v, f"weights.matrix[{r}][{c}]") for c, v in enumerate(row))
            for r, row in enumerate(raw)
        )
        if any(len(row) != len(matrix) for row in matrix):
            raise ScenarioError("weights.matrix: must be square")
    elif "matrix" in table:
        raise ScenarioError("weights.matrix: only valid with method = 'explicit'")
    return WeightsCfg(method=method, beta=beta, matrix=matrix)


def _parse_model(table: dict) -> ModelParams:
    _check_keys(table, ("a", "sigma_r2", "sigma_w2", "x0", "x0_sigma2", "noise"), "model")
    a = _as_float(table.get("a", 1.0), "model.a")
    sigma_r2 = _as_float(table.get("sigma_r2", 1.0), "model.sigma_r2")
    sigma_w2 = _as_float(table.get("sigma_w2", 1.0), "model.sigma_w2")
    if sigma_r2 < 0:
        raise ScenarioError(f"model.sigma_r2: must be nonnegative, got {sigma_r2}")
    if sigma_w2 < 0:
        raise ScenarioError(f"model.sigma_w2: must be nonnegative, got {sigma_w2}")
    x0 = _as_float(table.get("x0", 0.0), "model.x0")
    x0_sigma2 = _as_float(table.get("x0_sigma2", 0.0), "model.x0_sigma2")
    if x0_sigma2 < 0:
        raise ScenarioError(f"model.x0_sigma2: must be nonnegative, got {x0_sigma2}")
    noise = _as_str(table.get("noise", "gaussian"), "model.noise", NOISE_FAMILIES)
    return ModelParams(
        a=a, sigma_r2=sigma_r2, sigma_w2=sigma_w2, x0=x0, x0_sigma2=x0_sigma2, noise=noise
    )


def _parse_estimator(table: dict) -> EstimatorSpec:
    _check_keys(table, ("kind", "alpha"), "estimator")
    kind = _as_str(table.get("kind", "hat"), "estimator.kind", ("hat", "tilde"))
    alpha = _as_float(table.get("alpha", 0.5), "estimator.alpha")
    if not 0.0 < alpha <= 1.0:
        raise ScenarioError(f"estimator.alpha: must be in (0, 1], got {alpha}")
    return EstimatorSpec(kind=kind, alpha=alpha)


def _parse_sim(table: dict) -> SimConfig:
    _check_keys(
        table,
        ("horizon", "trials", "seed", "burn_in", "record", "allow_unstable", "init"),
        "sim",
    )
    horizon = _as_int(table.get("horizon", 1000), "sim.horizon")
    trials = _as_int(table.get("trials", 32), "sim.trials")
    seed = _as_int(table.get("seed", 0), "sim.seed")
    burn_in = _as_int(table["burn_in"], "sim.burn_in") if "burn_in" in table else None
    record = _as_str(table.get("record", "aggregate"), "sim.record", RECORD_MODES)
    allow_unstable = _as_bool(table.get("allow_unstable", False), "sim.allow_unstable")
    init = _as_str(table.get("init", "observation"), "sim.init", INIT_MODES)
    try:
        return SimConfig(
            horizon=horizon,
            trials=trials,
            seed=seed,
            burn_in=burn_in,
            record=record,
            allow_unstable=allow_unstable,
            init=init,
        )
    except ValueError as e:
        raise ScenarioError(f"sim: {e}") from e


def _parse_regret(table: dict) -> RegretCfg:
    _check_keys(table, ("delta", "horizons", "trials", "init", "s_override"), "regret")
    delta = _as_float(table.get("delta", 0.05), "regret.delta")
    if not 0.0 < delta < 1.0:
        raise ScenarioError(f"regret.delta: must be in (0, 1), got {delta}")
    horizons = table.get("horizons", list(DEFAULT_REGRET_HORIZONS))
    if not isinstance(horizons, list) or not horizons:
        raise ScenarioError("regret.horizons: expected a nonempty list of integers")
    horizons = tuple(_as_int(t, f"regret.horizons[{k}]") for k, t in enumerate(horizons))
    if any(t < 1 for t in horizons):
        raise ScenarioError("regret.horizons: horizons must be >= 1")
    trials = _as_int(table.get("trials", 100), "regret.trials")
    if trials < 1:
        raise ScenarioError(f"regret.trials: must be >= 1, got {trials}")
    init = _as_str(table.get("init", "zeros"), "regret.init", INIT_MODES)
    s_override = (
        _as_float(table["s_override"], "regret.s_override") if "s_override" in table else None
    )
    if s_override is not None and s_override <= 0:
        raise ScenarioError(f"regret.s_override: must be positive, got {s_override}")
    return RegretCfg(
        delta=delta, horizons=horizons, trials=trials, init=init, s_override=s_override
    )


def _parse_design(table: dict) -> DesignCfg:
    _check_keys(table, ("eps", "top_k"), "design")
    eps = _as_float(table["eps"], "design.eps") if "eps" in table else None
    if eps is not None and eps <= 0:
        raise ScenarioError(f"design.eps: must be positive, got {eps}")
    top_k = _as_int(table.get("top_k", 10), "design.top_k")
    if top_k < 0:
        raise ScenarioError(f"design.top_k: must be nonnegative, got {top_k}")
    return DesignCfg(eps=eps, top_k=top_k)


def _parse_sweep(table: dict) -> SweepCfg:
    _check_keys(table, ("points", "alpha_min", "alpha_max"), "sweep")
    points = _as_int(table.get("points", 512), "sweep.points")
    if points < 2:
        raise ScenarioError(f"sweep.points: must be >= 2, got {points}")
    alpha_min = (
        _as_float(table["alpha_min"], "sweep.alpha_min") if "alpha_min" in table else None
    )
    alpha_max = _as_float(table.get("alpha_max", 1.0), "sweep.alpha_max")
    if alpha_min is not None and not 0.0 < alpha_min <= 1.0:
        raise ScenarioError(f"sweep.alpha_min: must be in (0, 1], got {alpha_min}")
    if not 0.0 < alpha_max <= 1.0:
        raise ScenarioError(f"sweep.alpha_max: must be in (0, 1], got {alpha_max}")
    if alpha_min is not None and alpha_min >= alpha_max:
        raise ScenarioError("sweep: alpha_min must be below alpha_max")
    return SweepCfg(points=points, alpha_min=alpha_min, alpha_max=alpha_max)


def parse_scenario(doc: dict) -> Scenario:
    """Validate a parsed TOML document into a Scenario."""
    if not isinstance(doc, dict):
        raise ScenarioError("scenario: top level must be a table")
    _check_keys(
        doc,
        ("graph", "weights", "model", "estimator", "sim", "regret", "design", "sweep"),
        "scenario",
    )
    if "graph" not in doc:
        raise ScenarioError("graph: section is required")
    for name in ("graph", "weights", "model", "estimator", "sim", "regret", "design", "sweep"):
        if name in doc and not isinstance(doc[name], dict):
            raise ScenarioError(f"{name}: expected a table")
    graph, family = _parse_graph(doc["graph"])
    weights = _parse_weights(doc.get("weights", {}))
    if weights.method == "explicit" and weights.matrix is not None:
        if len(weights.matrix) != graph.n:
            raise ScenarioError(
                f"weights.matrix: size {len(weights.matrix)} does not match graph.n = {graph.n}"
            )
    model = _parse_model(doc.get("model", {}))
    estimator = _parse_estimator(doc.get("estimator", {}))
    sim = _parse_sim(doc.get("sim", {}))
    regret_cfg = _parse_regret(doc.get("regret", {}))
    design = _parse_design(doc.get("design", {}))
    sweep = _parse_sweep(doc.get("sweep", {}))
    return Scenario(
        graph=graph,
        graph_family=family,
        weights=weights,
        model=model,
        estimator=estimator,
        sim=sim,
        regret=regret_cfg,
        design=design,
        sweep=sweep,
    )


def load_scenario(path: str | Path) -> Scenario:
    """Parse and validate a scenario TOML file."""
    with open(path, "rb") as fh:
        try:
            doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as e:
            raise ScenarioError(f"{path}: TOML parse error: {e}") from e
    return parse_scenario(doc)


def build_comm(scenario: Scenario) -> CommMatrix:
    """Construct the communication matrix the scenario describes."""
    w = scenario.weights
    try:
        if w.method == "metropolis":
            return comm_metropolis(scenario.graph)
        if w.method == "laplacian":
            return comm_from_laplacian(scenario.graph, w.beta)
        p = np.array(w.matrix, dtype=float)
        return comm_matrix(p, _graph_from_matrix(p, scenario.graph))
    except ValueError as e:
        raise ScenarioError(f"weights: {e}") from e


def _graph_from_matrix(p: np.ndarray, declared: Graph) -> Graph:
    """Explicit matrices define their own edge set via positive off-diagonals,
    which must be a subset of the declared graph's edges."""
    n = p.shape[0]
    edges = [
        (i, j) for i in range(n) for j in range(i + 1, n) if p[i, j] > 0 or p[j, i] > 0
    ]
    g = make_graph(n, edges)
    extra = g.edges - declared.edges
    if extra:
        i, j = sorted(extra)[0]
        raise ScenarioError(
            f"weights.matrix: positive entry ({i},{j}) has no corresponding graph edge"
        )
    return g


def with_overrides(
    scenario: Scenario,
    seed: int | None = None,
    trials: int | None = None,
    horizon: int | None = None,
) -> Scenario:
    """Apply CLI flag overrides; trials also applies to the regret section."""
    sim = scenario.sim
    if seed is not None:
        sim = replace(sim, seed=seed)
    if trials is not None:
        sim = replace(sim, trials=trials)
    if horizon is not None:
        burn = sim.burn_in if sim.burn_in is not None and sim.burn_in < horizon else None
        sim = replace(sim, horizon=horizon, burn_in=burn)
    regret_cfg = scenario.regret
    if trials is not None:
        regret_cfg = replace(regret_cfg, trials=trials)
    return replace(scenario, sim=sim, regret=regret_cfg)
