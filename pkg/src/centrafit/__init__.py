"""Fit parametric densities to histograms by maximizing Holder or Lehmer
centralities of the per-observation density values, a family of
estimators that contains plain maximum likelihood as the Holder
order-zero member."""

from .centrality import (
    CentralityQuery,
    Kind,
    LogCentralityValue,
    central_observation,
    log_centrality,
    log_centrality_grid,
    log_holder,
    log_lehmer,
    log_power_sum,
    tilt_weights,
)
from .data import (
    Histogram,
    WeightedSample,
    dct_abs_histogram,
    exponential_draws,
    histogram_to_sample,
    read_histogram_csv,
    read_pgm,
    synth_exponential,
    write_histogram_csv,
    write_pgm,
)
from .errors import (
    AllFitsFailed,
    DegenerateSample,
    EmptyHistogram,
    FitError,
    ImageTooSmall,
    MissingDensities,
    NoConvergence,
    NotACriticalPoint,
    NotAMaximum,
    PointOutsideSupport,
)
from .estimate import (
    Classification,
    CriticalPoint,
    SolverConfig,
    SolverKind,
    centrality_slope,
    curvature_at_critical,
    find_critical_points,
    fixed_point_exponential,
    observed_fisher,
    suggest_theta_bracket,
    tilted_variance,
)
from .models import ExponentialModel, PdfModel, exponential_inverse, get_model
from .residuals import (
    FitEntry,
    FitReport,
    ResidualQuery,
    abs_error_power_moments,
    default_alpha_grid,
    holder_residual,
    holder_residual_pdf,
    lehmer_residual,
    lehmer_residual_pdf,
    residual_value,
    sweep_alpha,
)

__version__ = "0.1.0"
