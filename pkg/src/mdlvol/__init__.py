"""Numerical toolkit for MDL code lengths and information-manifold volumes.

Covers Monte Carlo Gaussian channel capacity with analytic sandwich bounds,
log-volumes for isotropic linear regression (exact, regularized, and
design-averaged), statistical lattice models with Fisher metric volumes,
stochastic sigmoid perceptron volumes, and deterministic double-descent
experiment artifacts. Every Monte Carlo routine takes an explicit seeded
stream and reproduces byte-identical results for a given seed.
"""

from ._kernels import BACKEND, backends
from .capacity import (
    LOW_SNR_THRESHOLD,
    CapacityEstimate,
    awgn_packing_count,
    capacity_limit,
    capacity_lower_bound,
    capacity_mc,
    capacity_upper_bound,
    expected_wishart_logdet,
)
from .errors import (
    MdlvolError,
    NonPositiveCoefficientError,
    NotALatticeError,
    RejectionRateError,
    SingularError,
)
from .experiments import (
    ExperimentConfig,
    RiskCurve,
    RiskRecord,
    emit_results,
    kfold_curve,
    mdl_score,
    read_risk_csv,
)
from .lattice import (
    EtaCoordinates,
    Lattice,
    build_boolean_lattice,
    build_lattice_from_covers,
    eta_from_distribution,
    hadamard_upper_majorant,
    lattice_from_json,
    lattice_log_volume_mc,
    lattice_volume_bounds,
    limiting_volume_check,
    load_lattice,
    log_simplex_volume,
    metric_tensor,
    sample_eta,
)
from .numerics import (
    MC_BATCH,
    RngStream,
    SymmetricMatrix,
    VolumeEstimate,
    digamma,
    log_det_psd,
    log_gamma,
    log_mean_exp,
    log_mean_exp_with_stderr,
)
from .perceptron import (
    PerceptronSpec,
    c_coefficients,
    metric_log_det,
    perceptron_log_volume,
    sigmoid_derivative,
)
from .regression import (
    DesignMatrix,
    RegressionModelSpec,
    classical_regime_bound,
    log_ball_volume,
    log_volume,
    mdl_upper_bound,
    mean_regularized_log_volume,
    modern_regime_bound,
    regularized_log_volume,
    shifted_log_det,
    sphere_packing_log_ratio,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "backends",
    "LOW_SNR_THRESHOLD",
    "CapacityEstimate",
    "awgn_packing_count",
    "capacity_limit",
    "capacity_lower_bound",
    "capacity_mc",
    "capacity_upper_bound",
    "expected_wishart_logdet",
    "MdlvolError",
    "NonPositiveCoefficientError",
    "NotALatticeError",
    "RejectionRateError",
    "SingularError",
    "ExperimentConfig",
    "RiskCurve",
    "RiskRecord",
    "emit_results",
    "kfold_curve",
    "mdl_score",
    "read_risk_csv",
    "EtaCoordinates",
    "Lattice",
    "build_boolean_lattice",
    "build_lattice_from_covers",
    "eta_from_distribution",
    "hadamard_upper_majorant",
    "lattice_from_json",
    "lattice_log_volume_mc",
    "lattice_volume_bounds",
    "limiting_volume_check",
    "load_lattice",
    "log_simplex_volume",
    "metric_tensor",
    "sample_eta",
    "MC_BATCH",
    "RngStream",
    "SymmetricMatrix",
    "VolumeEstimate",
    "digamma",
    "log_det_psd",
    "log_gamma",
    "log_mean_exp",
    "log_mean_exp_with_stderr",
    "PerceptronSpec",
    "c_coefficients",
    "metric_log_det",
    "perceptron_log_volume",
    "sigmoid_derivative",
    "DesignMatrix",
    "RegressionModelSpec",
    "classical_regime_bound",
    "log_ball_volume",
    "log_volume",
    "mdl_upper_bound",
    "mean_regularized_log_volume",
    "modern_regime_bound",
    "regularized_log_volume",
    "shifted_log_det",
    "sphere_packing_log_ratio",
    "__version__",
]
