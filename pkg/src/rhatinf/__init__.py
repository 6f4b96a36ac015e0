"""Quantile-resolved MCMC convergence diagnostics.

The central quantity is the scale-reduction statistic of the indicator
1{theta <= x}, scanned over all thresholds x (and, for multivariate chains,
over orthant directions).  Its supremum detects any difference between the
chains' stationary distributions, comes with a simulated null calibration,
and has closed-form population values for several analytic chain families.
"""

from .chains import (
    ChainSet,
    generate_ar1,
    generate_iid,
    generate_mvn,
    load_chains,
    random_unitdiag_covariance,
    save_chains,
    split_chains,
)
from .counterexamples import GpdPair, demo_false_negative, f_xi, solve_counterexample
from .diagnostics import (
    DiagnosticReport,
    LocalCurve,
    diagnose,
    local_ess,
    local_rhat,
    rank_rhat,
    rhat_curve,
    rhat_infinity,
    trad_split_rhat,
)
from .multivariate import (
    Copula,
    Direction,
    MvReport,
    all_directions,
    canonical_directions,
    copula_population_r_infinity,
    frechet_r_infinity_bound,
    gaussian_copula,
    independence_copula,
    lower_frechet_bound,
    mv_local_rhat,
    mv_rhat_infinity,
    nlod_bound,
    pairwise_bound,
    plod_bound,
    rhat_max_infinity,
    rule_of_thumb_thresholds,
    two_step_diagnosis,
    upper_frechet_copula,
)
from .population import (
    PopulationModel,
    laplace_uniform_r,
    laplace_uniform_r_infinity,
    pareto_r,
    pareto_r_infinity,
    population_local_r,
    population_r_infinity,
    uniform_r,
    uniform_r_infinity,
)
from .simulate import SimulationResult, run_custom, run_experiment
from .statdist import (
    DistributionSpec,
    cauchy,
    cdf,
    chi_square,
    exponential,
    gpd,
    laplace,
    normal,
    pareto,
    quantile,
    sample,
    uniform,
)
from .thresholds import (
    ThresholdSpec,
    mc_null_quantile,
    mc_pvalue,
    mv_thresholds,
    null_rinf_samples,
    r_lim,
    type1_error,
)

__version__ = "0.1.0"

__all__ = [
    "ChainSet",
    "generate_ar1",
    "generate_iid",
    "generate_mvn",
    "load_chains",
    "random_unitdiag_covariance",
    "save_chains",
    "split_chains",
    "GpdPair",
    "demo_false_negative",
    "f_xi",
    "solve_counterexample",
    "DiagnosticReport",
    "LocalCurve",
    "diagnose",
    "local_ess",
    "local_rhat",
    "rank_rhat",
    "rhat_curve",
    "rhat_infinity",
    "trad_split_rhat",
    "Copula",
    "Direction",
    "MvReport",
    "all_directions",
    "canonical_directions",
    "copula_population_r_infinity",
    "frechet_r_infinity_bound",
    "gaussian_copula",
    "independence_copula",
    "lower_frechet_bound",
    "mv_local_rhat",
    "mv_rhat_infinity",
    "nlod_bound",
    "pairwise_bound",
    "plod_bound",
    "rhat_max_infinity",
    "rule_of_thumb_thresholds",
    "two_step_diagnosis",
    "upper_frechet_copula",
    "PopulationModel",
    "laplace_uniform_r",
    "laplace_uniform_r_infinity",
    "pareto_r",
    "pareto_r_infinity",
    "population_local_r",
    "population_r_infinity",
    "uniform_r",
    "uniform_r_infinity",
    "SimulationResult",
    "run_custom",
    "run_experiment",
    "DistributionSpec",
    "cauchy",
    "cdf",
    "chi_square",
    "exponential",
    "gpd",
    "laplace",
    "normal",
    "pareto",
    "quantile",
    "sample",
    "uniform",
    "ThresholdSpec",
    "mc_null_quantile",
    "mc_pvalue",
    "mv_thresholds",
    "null_rinf_samples",
    "r_lim",
    "type1_error",
    "__version__",
]
