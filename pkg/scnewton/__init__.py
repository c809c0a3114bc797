"""
scnewton - Second-order methods for self-concordant functions.

This package provides:
- The omega/omega_star calculus and (beta, gamma) admissibility checks
- Oracles for self-concordant functions, barriers, conjugates and restrictions
- Damped Newton, path-following and predictor-corrector schemes
- Barrier predictor-corrector methods for linear objectives and feasibility
- Cubic regularized Newton with multi-stage restarts
- A problem zoo, invariant audits and a LangGraph experiment runner
"""

from .scalar import (
    omega,
    omega_star,
    omega_inverse,
    omega_star_inverse,
    validate_constants,
)

from .linops import (
    LocalGeometry,
    local_geometry,
    primal_norm,
    dual_norm,
    solve_direction,
)

from .oracles import (
    ScOracle,
    FunctionOracle,
    BarrierOracle,
    ConjugateOracle,
    LinearImageOracle,
    AffineRestrictedOracle,
    lambda_f,
    shifted_oracle,
    normalize_to_standard,
)

from .newton import (
    standard_newton_step,
    damped_newton_step,
    dnm_solve,
)

from .pathfollow import (
    pfs_iterate,
    adaptive_pfs_iterate,
    pfs_solve,
)

from .predcorr import (
    predictor_bound,
    pcpfs_iterate,
    adaptive_pcpfs_iterate,
    pcpfs_solve,
)

from .barrier_methods import (
    PrimalBarrierProblem,
    DualBarrierProblem,
    primal_pc_solve,
    dual_pc_solve,
    dual_t_of_u,
    recover_primal,
)

from .feasibility import (
    FeasibilityInstance,
    feasibility_via_dual,
    dual_pathfollow_exact,
    strategy_comparison,
    lp_to_feasibility,
    solve_lp_via_embedding,
)

from .cubic import (
    LipschitzStrongOracle,
    sc_constant_from_lipschitz,
    cubic_step,
    crnm_solve,
    multistage_solve,
)

from .state import (
    PathConstants,
    PFS_CONSTANTS,
    PCPFS_CONSTANTS,
    BARRIER_PC_CONSTANTS,
    SolveTrace,
    CenteredPair,
    ExperimentSpec,
    RowResult,
)

from .configuration import (
    SolverConfiguration,
    BenchConfiguration,
    MethodType,
    ConstantsVariant,
)

from .zoo import (
    ProblemInstance,
    zoo,
    known_problems,
)

from .bench import (
    experiment_graph,
    run_experiment,
    run_method,
    param_search,
)

__version__ = "0.1.0"
__all__ = [
    # Scalar calculus
    "omega",
    "omega_star",
    "omega_inverse",
    "omega_star_inverse",
    "validate_constants",
    # Local geometry
    "LocalGeometry",
    "local_geometry",
    "primal_norm",
    "dual_norm",
    "solve_direction",
    # Oracles
    "ScOracle",
    "FunctionOracle",
    "BarrierOracle",
    "ConjugateOracle",
    "LinearImageOracle",
    "AffineRestrictedOracle",
    "lambda_f",
    "shifted_oracle",
    "normalize_to_standard",
    # Newton and path-following
    "standard_newton_step",
    "damped_newton_step",
    "dnm_solve",
    "pfs_iterate",
    "adaptive_pfs_iterate",
    "pfs_solve",
    "predictor_bound",
    "pcpfs_iterate",
    "adaptive_pcpfs_iterate",
    "pcpfs_solve",
    # Barrier methods and feasibility
    "PrimalBarrierProblem",
    "DualBarrierProblem",
    "primal_pc_solve",
    "dual_pc_solve",
    "dual_t_of_u",
    "recover_primal",
    "FeasibilityInstance",
    "feasibility_via_dual",
    "dual_pathfollow_exact",
    "strategy_comparison",
    "lp_to_feasibility",
    "solve_lp_via_embedding",
    # Cubic regularization
    "LipschitzStrongOracle",
    "sc_constant_from_lipschitz",
    "cubic_step",
    "crnm_solve",
    "multistage_solve",
    # State models
    "PathConstants",
    "PFS_CONSTANTS",
    "PCPFS_CONSTANTS",
    "BARRIER_PC_CONSTANTS",
    "SolveTrace",
    "CenteredPair",
    "ExperimentSpec",
    "RowResult",
    # Configuration
    "SolverConfiguration",
    "BenchConfiguration",
    "MethodType",
    "ConstantsVariant",
    # Problems and experiments
    "ProblemInstance",
    "zoo",
    "known_problems",
    "experiment_graph",
    "run_experiment",
    "run_method",
    "param_search",
]
