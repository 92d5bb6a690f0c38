"""Channel capacity via the Arimoto fixed-point iteration, with analytic
convergence-rate prediction and empirical verification."""

from .channel import (
    Channel,
    Distribution,
    entropy,
    kl_divergence,
    mutual_information,
    output_distribution,
    row_divergences,
    uniform,
    validate_channel,
)
from .curves import (
    RateCurve,
    RateReport,
    compare,
    exponential_curve,
    mu_series,
    one_over_n_curve,
)
from .iteration import (
    StoppingRule,
    Trace,
    arimoto_map,
    capacity_estimate,
    estimate_gap_bound,
    iterate,
)
from .local import (
    EXPONENTIAL,
    ONE_OVER_N,
    DivergenceDerivatives,
    RatePrediction,
    SpectrumResult,
    divergence_derivatives,
    hessians,
    jacobian,
    predict_rate,
    spectrum,
)
from .oracles import (
    FDSettings,
    GridCapacityResult,
    charpoly_eigen,
    extended_map,
    fd_hessian,
    fd_jacobian,
    grid_capacity,
)
from .slowrate import (
    SlowRateConstants,
    fit_decay_coefficient,
    project_mu12,
    reduced_jacobian,
    slow_constants,
)
from .solver import (
    CapacitySolution,
    IndexClassification,
    SolverOptions,
    boundary_projection,
    classify_indices,
    kkt_residual,
    solution_at,
    solve_capacity,
)

__version__ = "0.1.0"
