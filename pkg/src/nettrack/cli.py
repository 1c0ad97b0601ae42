"""Command-line front end.

    nettrack <subcommand> --scenario <file.toml> --out <dir>
                          [--seed <u64>] [--trials <n>] [--horizon <T>]

Subcommands: analyze, simulate, regret, design-edge, sweep-alpha.  Exit
codes: 0 success, 2 scenario validation failure, 3 unstable configuration.
Warnings (unbiasedness violations, non-PSD P) go to standard error;
artifacts land in the output directory with the resolved scenario embedded.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import Scenario, ScenarioError, build_comm, load_scenario, with_overrides
from .estimators import (
    EstimatorSpec,
    UnstableSystemError,
    rho_error,
    unbiasedness_bound,
)
from .msd import msd_closed_form, msd_from_eigenvalues
from .netdesign import PSD_TOL, optimal_edge_search
from .output import scenario_preamble, write_csv, write_json
from .regret import verify_bound
from .simulate import SimulationDivergedError, run_trials

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_UNSTABLE = 3

SUBCOMMANDS = ("analyze", "simulate", "regret", "design-edge", "sweep-alpha")


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _check_unbiasedness(scenario: Scenario, comm) -> None:
    bound = unbiasedness_bound(comm)
    if abs(scenario.model.a) >= bound:
        _warn(
            f"|a| = {abs(scenario.model.a):.6g} reaches the unbiasedness bound "
            f"2/(1 - lambda_min) = {bound:.6g}; no gain can stabilize the error mean"
        )


def _cmd_analyze(scenario: Scenario, out: Path) -> int:
    comm = build_comm(scenario)
    _check_unbiasedness(scenario, comm)
    report = msd_closed_form(comm, scenario.estimator, scenario.model)
    resolved = scenario.resolved()
    seed = scenario.sim.seed
    write_json(
        out / "analyze.json",
        {
            "scenario": resolved,
            "seed": seed,
            "report": {
                "kind": report.kind,
                "alpha": report.alpha,
                "a": report.a,
                "sigma_r2": report.sigma_r2,
                "sigma_w2": report.sigma_w2,
                "rho": report.rho,
                "unbiasedness_bound": unbiasedness_bound(comm),
                "r_msd": report.r_msd,
                "w_msd": report.w_msd,
                "total": report.total,
                "per_mode": list(report.per_mode),
            },
        },
    )
    write_csv(
        out / "analyze_modes.csv",
        ("mode", "lambda_p", "w_term"),
        (
            (k, comm.eigenvalues[k], report.per_mode[k])
            for k in range(comm.n)
        ),
        scenario_preamble(resolved, seed),
    )
    return EXIT_OK


def _cmd_simulate(scenario: Scenario, out: Path) -> int:
    comm = build_comm(scenario)
    _check_unbiasedness(scenario, comm)
    resolved = scenario.resolved()
    seed = scenario.sim.seed
    preamble = scenario_preamble(resolved, seed)
    sink = None
    steps_fh = None
    if scenario.sim.record == "full":
        steps_fh = open(out / "simulate_steps.csv", "w", encoding="utf-8", newline="\n")
        for line in preamble:
            steps_fh.write(f"# {line}\n")
        steps_fh.write("trial,t,msd_instant\n")

        def sink(trial: int, series: np.ndarray) -> None:
            from .output import fmt_float

            for t, v in enumerate(series.tolist()):
                steps_fh.write(f"{trial},{t},{fmt_float(v)}\n")

    try:
        result = run_trials(comm, scenario.estimator, scenario.model, scenario.sim, sink)
    finally:
        if steps_fh is not None:
            steps_fh.close()
    closed = None
    if result.stable:
        closed = msd_closed_form(comm, scenario.estimator, scenario.model).total
    write_json(
        out / "simulate.json",
        {
            "scenario": resolved,
            "seed": seed,
            "empirical_msd": result.empirical_msd,
            "stderr": result.stderr,
            "closed_form_msd": closed,
            "n": comm.n,
            "T": scenario.sim.horizon,
            "trials": scenario.sim.trials,
            "burn_in": result.burn_in,
            "stable": result.stable,
        },
    )
    return EXIT_OK


def _cmd_regret(scenario: Scenario, out: Path) -> int:
    comm = build_comm(scenario)
    _check_unbiasedness(scenario, comm)
    cfg = scenario.regret
    table = verify_bound(
        comm,
        scenario.estimator,
        scenario.model,
        cfg.horizons,
        cfg.delta,
        cfg.trials,
        scenario.sim.seed,
        init=cfg.init,
        s_override=cfg.s_override,
    )
    resolved = scenario.resolved()
    write_csv(
        out / "regret.csv",
        ("T", "trial", "regret_trace", "regret_specnorm", "bound_total", "violated"),
        (
            (r.horizon, r.trial, r.regret_trace, r.regret_specnorm, r.bound_total, r.violated)
            for r in table.rows
        ),
        scenario_preamble(resolved, table.seed),
    )
    write_json(
        out / "regret.json",
        {
            "scenario": resolved,
            "seed": table.seed,
            "delta": table.delta,
            "s_bound": table.s_bound,
            "trials": table.trials,
            "t_grid": list(table.t_grid),
            "summaries": [
                {
                    "T": s.horizon,
                    "violation_rate": s.violation_rate,
                    "median_trace": s.median_trace,
                    "median_specnorm": s.median_specnorm,
                    "median_bound": s.median_bound,
                }
                for s in table.summaries
            ],
        },
    )
    return EXIT_OK


def _cmd_design_edge(scenario: Scenario, out: Path) -> int:
    comm = build_comm(scenario)
    _check_unbiasedness(scenario, comm)
    if comm.lambda_min < PSD_TOL:
        _warn(
            f"P is not positive semidefinite (lambda_min = {comm.lambda_min:.6g}); "
            "first-order ordering guarantees do not apply"
        )
    candidates = optimal_edge_search(
        comm,
        scenario.estimator,
        scenario.model,
        eps=scenario.design.eps,
        top_k=scenario.design.top_k,
    )
    if not candidates:
        print("graph is complete: no candidate edges to rank", file=sys.stderr)
    write_csv(
        out / "design_edges.csv",
        ("i", "j", "score_first_order", "lower_bound", "delta_msd_exact"),
        (
            (c.i, c.j, c.score_first_order, c.lower_bound, c.delta_msd_exact)
            for c in candidates
        ),
        scenario_preamble(scenario.resolved(), scenario.sim.seed),
    )
    return EXIT_OK


def _cmd_sweep_alpha(scenario: Scenario, out: Path) -> int:
    comm = build_comm(scenario)
    _check_unbiasedness(scenario, comm)
    cfg = scenario.sweep
    lo = cfg.alpha_min if cfg.alpha_min is not None else 1.0 / cfg.points
    alphas = np.linspace(lo, cfg.alpha_max, cfg.points)
    rows = []
    for alpha in alphas.tolist():
        rho = rho_error(comm, scenario.model.a, alpha)
        vals = {}
        for kind in ("hat", "tilde"):
            try:
                vals[kind] = msd_from_eigenvalues(
                    comm.eigenvalues, EstimatorSpec(kind=kind, alpha=alpha), scenario.model
                ).total
            except UnstableSystemError:
                vals[kind] = None
        rows.append((alpha, rho, vals["hat"], vals["tilde"]))
    write_csv(
        out / "sweep_alpha.csv",
        ("alpha", "rho", "msd_hat", "msd_tilde"),
        rows,
        scenario_preamble(scenario.resolved(), scenario.sim.seed),
    )
    return EXIT_OK


_HANDLERS = {
    "analyze": _cmd_analyze,
    "simulate": _cmd_simulate,
    "regret": _cmd_regret,
    "design-edge": _cmd_design_edge,
    "sweep-alpha": _cmd_sweep_alpha,
}


def run_subcommand(command: str, scenario: Scenario, out_dir: str | Path) -> int:
    """Execute one subcommand against a loaded scenario; returns the exit code."""
    if command not in _HANDLERS:
        raise ValueError(f"unknown subcommand {command!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        return _HANDLERS[command](scenario, out)
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except (UnstableSystemError, SimulationDivergedError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_UNSTABLE
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="nettrack",
        description="Distributed tracking over a network: analysis, simulation, design.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--scenario", required=True, help="scenario TOML file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override sim.seed")
        p.add_argument("--trials", type=int, default=None, help="override trial count")
        p.add_argument("--horizon", type=int, default=None, help="override sim.horizon")
    args = parser.parse_args(argv)
    try:
        scenario = load_scenario(args.scenario)
        scenario = with_overrides(
            scenario, seed=args.seed, trials=args.trials, horizon=args.horizon
        )
    except (ScenarioError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    return run_subcommand(args.command, scenario, args.out)


if __name__ == "__main__":
    sys.exit(main())
