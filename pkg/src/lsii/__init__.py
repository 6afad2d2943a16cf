"""Local indirect inference (L-II) for locally stationary time-series models.

Simulate structural models with slowly time-varying parameters, fit
simple auxiliary models locally on observed data, and recover the
parameter path by matching observed against simulated auxiliary
estimates on a grid of rescaled time points, with local block bootstrap
bands and a Monte Carlo harness.
"""

from .auxiliary import (
    RhoAr1,
    RhoGjr,
    TauGrid,
    gjr_qmle,
    gjr_quasi_loglik,
    global_ar1_estimate,
    local_ar1_estimate,
    local_least_squares,
    local_loglevel_estimate,
    multiplicative_gjr_fit,
    normalize_tau,
    pseudo_true_rho_ma1,
    simulated_gjr_fit,
)
from .bootstrap import BandTable, LbbConfig, lbb_confidence_bands, lbb_resample, lbb_window
from .diagnostics import (
    ArchTestResult,
    GapDecayTable,
    arch_lm_test,
    local_stationarity_probe,
    sv_moment_oracle,
)
from .errors import (
    ConvergenceFailure,
    DegenerateInputError,
    InvalidArgumentError,
    LsiiError,
    OutOfBoundsError,
    StudyFailure,
)
from .kernels import KernelSpec, WeightVector, kernel_eval, local_weights, rule_of_thumb_bandwidth
from .lii import (
    DEFAULT_GRID,
    LiiConfig,
    LiiFit,
    LiiFitPoint,
    ThetaPath,
    ThetaPoint,
    WeightMatrix,
    estimate_path,
    estimate_point,
    lii_objective,
    simulated_binding,
)
from .montecarlo import McDesign, McSummary, quantile_bands, run_study
from .processes import (
    LsMaParams,
    LsSvParams,
    NoiseStream,
    Series,
    approximation_gap,
    simulate_gjr_garch,
    simulate_ls_ma1,
    simulate_ls_sv,
    simulate_stationary_ma1,
    simulate_stationary_sv,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
