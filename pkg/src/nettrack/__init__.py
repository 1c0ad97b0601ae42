"""Distributed tracking of a scalar random walk over a communication network.

Consensus + innovation estimators, closed-form steady-state MSD, Kalman and
reference comparisons, regret bounds for the time-averaged error, and
first-order network design.
"""

from .config import Scenario, ScenarioError, build_comm, load_scenario, parse_scenario
from .estimators import (
    ErrorSystem,
    EstimatorSpec,
    UnstableSystemError,
    build_error_system,
    is_stable,
    optimal_alpha_for_stability,
    rho_error,
    unbiasedness_bound,
    update_hat,
    update_tilde,
)
from .graphs import (
    CommMatrix,
    CommMatrixError,
    EdgePerturbation,
    Graph,
    GraphError,
    build_named_graph,
    comm_complete,
    comm_from_laplacian,
    comm_matrix,
    comm_metropolis,
    laplacian,
    make_graph,
    perturb,
)
from .model import ModelParams, WorldTrace, generate_world, observe, step_state
from .msd import (
    MsdReport,
    connectivity_ratio,
    innovation_msd,
    kalman_steady_state,
    msd_bound_reference,
    msd_closed_form,
    msd_from_eigenvalues,
    msd_limit_named,
    optimize_alpha,
    steady_state_sigma_oracle,
)
from .netdesign import (
    EdgeCandidate,
    exact_delta_msd,
    first_order_delta_msd,
    first_order_score,
    lower_bound,
    optimal_edge_search,
    z_scores,
)
from .regret import (
    RegretReport,
    RegretTable,
    empirical_regret,
    noise_norm_bound,
    regret_bound,
    verify_bound,
)
from .simulate import (
    SimConfig,
    SimResult,
    SimulationDivergedError,
    empirical_covariance,
    run_trials,
)
from .spectral import SpectralDecomp, eig_sym, spectral_norm

__version__ = "0.1.0"

__all__ = [
    "CommMatrix",
    "CommMatrixError",
    "EdgeCandidate",
    "EdgePerturbation",
    "ErrorSystem",
    "EstimatorSpec",
    "Graph",
    "GraphError",
    "ModelParams",
    "MsdReport",
    "RegretReport",
    "RegretTable",
    "Scenario",
    "ScenarioError",
    "SimConfig",
    "SimResult",
    "SimulationDivergedError",
    "SpectralDecomp",
    "UnstableSystemError",
    "WorldTrace",
    "build_comm",
    "build_error_system",
    "build_named_graph",
    "comm_complete",
    "comm_from_laplacian",
    "comm_matrix",
    "comm_metropolis",
    "connectivity_ratio",
    "eig_sym",
    "empirical_covariance",
    "empirical_regret",
    "exact_delta_msd",
    "first_order_delta_msd",
    "first_order_score",
    "generate_world",
    "innovation_msd",
    "is_stable",
    "kalman_steady_state",
    "laplacian",
    "load_scenario",
    "lower_bound",
    "make_graph",
    "msd_bound_reference",
    "msd_closed_form",
    "msd_from_eigenvalues",
    "msd_limit_named",
    "noise_norm_bound",
    "observe",
    "optimal_alpha_for_stability",
    "optimal_edge_search",
    "optimize_alpha",
    "parse_scenario",
    "perturb",
    "regret_bound",
    "rho_error",
    "run_trials",
    "spectral_norm",
    "steady_state_sigma_oracle",
    "step_state",
    "unbiasedness_bound",
    "update_hat",
    "update_tilde",
    "verify_bound",
    "z_scores",
]
