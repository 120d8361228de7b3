"""Optimal and heuristic diagonal preconditioning of full-rank matrices.

The package minimizes the condition number kappa(D1^{1/2} A D2^{-1/2}) over
positive diagonal scalings, via bisection over SDP feasibility, potential
reduction interior point methods with Nesterov-Todd steps, dual-SDP barrier
path following, and projected subgradient descent, and benchmarks the effect
on preconditioned conjugate gradient convergence.
"""

from .linalg import (
    SymMatrix,
    EigDecomp,
    CholFactor,
    NotPositiveDefiniteError,
    sym_eig,
    cholesky,
    condition_number,
    psd_inverse,
    psd_sqrt,
    proximity_delta,
    log_det,
    trace_product,
)
from .matrixio import (
    RectMatrix,
    GramSpec,
    SolveReport,
    MatrixMarketError,
    read_matrix_market,
    gram_matrix,
    regularize_cap,
    sample_rows,
    render_reports,
    write_report,
)
from .heuristics import (
    DiagScaling,
    apply_scaling,
    apply_pair,
    scaled_condition,
    jacobi_scaling,
    column_norm_scaling,
    ruiz_equilibrate,
)
from .barrier import (
    BarrierPoint,
    FeasibilityResult,
    PhaseIConfig,
    InfeasiblePointError,
    CenteringError,
    barrier_value,
    barrier_gradient,
    barrier_hessian,
    compute_center,
    initial_feasible_point,
    feasibility_margin,
    two_sided_feasibility,
)
from .potential import (
    CenterState,
    NTScalings,
    PRConfig,
    delta_kappa,
    shift_state,
    nt_step,
    solve_right_pr,
)
from .dsdp import (
    DsdpProblem,
    DsdpConfig,
    PathState,
    build_right,
    build_left,
    barrier_path_solve,
)
from .optimal import (
    OptimalRequest,
    optimal_right,
    optimal_left,
    bisect_two_sided,
    alternate_two_sided,
)
from .subgradient import (
    SubgradConfig,
    logcond_subgradient,
    projected_subgradient_solve,
)
from .bench import (
    PcgResult,
    SamplingPoint,
    pcg,
    pcg_compare,
    sampling_sweep,
    concentration_experiment,
)

__version__ = "0.1.0"
