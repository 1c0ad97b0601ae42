"""Regret-bound coverage over a horizon grid.

Runs the Monte Carlo bound check on a ring network with bounded noise and
prints per-horizon coverage plus the median empirical regret, which should
shrink roughly like 1/sqrt(T) while the bound holds essentially always.
"""
import argparse

from nettrack.estimators import EstimatorSpec, optimal_alpha_for_stability
from nettrack.graphs import build_named_graph, comm_metropolis
from nettrack.model import ModelParams
from nettrack.regret import verify_bound


def main():
    parser = argparse.ArgumentParser(description="regret bound Monte Carlo sweep")
    parser.add_argument("--n", type=int, default=8, help="ring size")
    parser.add_argument("--a", type=float, default=1.0)
    parser.add_argument("--alpha", type=float, default=None, help="default: optimal")
    parser.add_argument("--kind", choices=("hat", "tilde"), default="hat")
    parser.add_argument("--x0", type=float, default=10.0)
    parser.add_argument("--delta", type=float, default=0.05)
    parser.add_argument("--trials", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--horizons", type=int, nargs="*", default=[2 ** k for k in range(8, 13)]
    )
    args = parser.parse_args()

    comm = comm_metropolis(build_named_graph("cycle", args.n))
    alpha = args.alpha if args.alpha is not None else optimal_alpha_for_stability(comm)
    spec = EstimatorSpec(kind=args.kind, alpha=alpha)
    params = ModelParams(
        a=args.a, sigma_r2=1.0, sigma_w2=1.0, x0=args.x0, noise="uniform"
    )
    table = verify_bound(
        comm,
        spec,
        params,
        t_grid=args.horizons,
        delta=args.delta,
        trials=args.trials,
        seed=args.seed,
        init="zeros",
    )
    print(
        f"ring N = {args.n}, kind = {args.kind}, alpha = {alpha:.6f}, "
        f"s = {table.s_bound:.6f}, delta = {args.delta:g}, trials = {args.trials}"
    )
    print(f"{'T':>7s} {'coverage':>9s} {'med |R_T|':>12s} {'med trace':>12s} {'med bound':>12s}")
    for s in table.summaries:
        print(
            f"{s.horizon:7d} {1.0 - s.violation_rate:9.4f} {s.median_specnorm:12.5f} "
            f"{s.median_trace:12.5f} {s.median_bound:12.2f}"
        )


if __name__ == "__main__":
    main()