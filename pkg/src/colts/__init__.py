"""Safe linear bandit toolkit: sampled perturbed-program agents with scaling,
resampling, and exploration variants, a cone-pessimism baseline, and a seeded
simulation harness with CSV reporting."""

from .algorithms import (
    EColtsAgent,
    Gamma0Estimator,
    RColtsAgent,
    SafeLtsAgent,
    SColtsAgent,
    build_spanner,
    exploration_policy,
    gamma0_step,
    lil_bound,
    make_agent,
)
from .estimator import (
    Estimates,
    SufficientStats,
    confidence_radius,
    consistency_holds,
    current_estimates,
    delta_t,
    update,
    width,
)
from .events import EventFlags, detect_global, detect_local, detect_unsaturated
from .instance import (
    InstanceSolution,
    Polytope,
    SlbInstance,
    builtin_box_instance,
    builtin_instance,
    builtin_polygon_instance,
    load_instance,
    optimal_action,
    reward_gap,
    safety_margin,
    save_instance,
)
from .linalg import SingularMatrixError, inv_and_inv_sqrt, mahalanobis, rank1_update
from .noise import (
    PerturbationLaw,
    PerturbedParams,
    b_factor,
    concentration_B,
    perturb,
    practical_law,
    sample_base,
    sample_noise,
    theory_law,
)
from .optim import (
    LpResult,
    SimplexCycleError,
    UnboundedProgramError,
    feasible_point,
    max_scaling_rho,
    solve_lp,
    solve_soc,
    validate_polytope,
)
from .sim import AlgoConfig, RoundRecord, RunSummary, run_batch, run_episode

__version__ = "0.1.0"
