"""Finite-N MSD against the large-N limits and the Kalman floor.

Two experiments in one: (1) closed-form MSD of the named families at
increasing N next to their analytic limits, (2) the flat-averaging tilde
estimator against the centralized Kalman steady state.
"""
import argparse

from nettrack.estimators import EstimatorSpec
from nettrack.graphs import build_named_graph, comm_complete, comm_from_laplacian
from nettrack.model import ModelParams
from nettrack.msd import kalman_steady_state, msd_closed_form, msd_limit_named


def family_comm(family, n, alpha, beta):
    if family == "complete":
        return comm_complete(n, alpha=alpha)
    g = build_named_graph(family, n)
    if family == "star":
        return comm_from_laplacian(g, (1.0 - alpha) / n)
    return comm_from_laplacian(g, beta)


def main():
    parser = argparse.ArgumentParser(description="MSD convergence in network size")
    parser.add_argument("--a", type=float, default=1.0)
    parser.add_argument("--alpha", type=float, default=0.6)
    parser.add_argument("--beta", type=float, default=0.2, help="ring Laplacian scale")
    parser.add_argument("--sigma-r2", type=float, default=1.0)
    parser.add_argument("--sigma-w2", type=float, default=1.0)
    parser.add_argument(
        "--sizes", type=int, nargs="*", default=[8, 16, 32, 64, 128, 256]
    )
    args = parser.parse_args()

    params = ModelParams(a=args.a, sigma_r2=args.sigma_r2, sigma_w2=args.sigma_w2)
    hat = EstimatorSpec(kind="hat", alpha=args.alpha)

    for family in ("complete", "star", "cycle"):
        beta = args.beta if family == "cycle" else None
        limit = msd_limit_named(family, hat, params, beta=beta)
        print(f"{family} / hat, limit = {limit:.9f}")
        for n in args.sizes:
            if family != "complete" and n < 3:
                continue
            comm = family_comm(family, n, args.alpha, args.beta)
            msd = msd_closed_form(comm, hat, params).total
            print(f"  N = {n:5d}  msd = {msd:.9f}  gap = {msd - limit:+.3e}")

    # flat averaging vs the centralized filter: the gap closes like 1/N
    tilde = EstimatorSpec(kind="tilde", alpha=1.0)
    flat_params = ModelParams(
        a=0.9, sigma_r2=args.sigma_r2, sigma_w2=args.sigma_w2
    )
    print("flat averaging (tilde, alpha = 1, a = 0.9) vs Kalman")
    for n in args.sizes:
        msd = msd_closed_form(comm_complete(n), tilde, flat_params).total
        kf = kalman_steady_state(flat_params, n)
        print(f"  N = {n:5d}  msd = {msd:.9f}  kalman = {kf:.9f}  gap = {msd - kf:.3e}")


if __name__ == "__main__":
    main()