"""Quantile-based spectral analysis of stationary time series.

Harmonic quantile regression turns level crossings of a series into a
cross-periodogram between pairs of quantiles; smoothing that table over
neighbouring Fourier frequencies estimates the quantile (copula) spectral
density kernel.  The package covers the full pipeline: interior-point
quantile regression with an optimality certificate, raw and rank-based
periodogram tables, repeated Daniell smoothing, oracle values of the
population kernel, simulation designs, and replication studies.
"""

__version__ = "0.1.0"

from .estimators import DaniellSmoother, QuantilePeriodogram
from .io import (
    OutputRow,
    load_series,
    read_output_rows,
    table_output_rows,
    write_json_report,
    write_output_rows,
    write_series,
)
from .experiments import (
    ExperimentConfig,
    RmseReport,
    equivalence_study,
    reversibility_study,
    rmse_study,
    unbiasedness_study,
)
from .periodogram import (
    KernelValue,
    PeriodogramTable,
    clipped_periodogram,
    ordinary_periodogram,
    periodogram_kernel,
    periodogram_table,
)
from .regression import (
    ConvergenceError,
    DegenerateDesignError,
    HarmonicFitBatch,
    HarmonicQuantileFit,
    QuantileFit,
    batch_harmonic_fits,
    harmonic_design,
    harmonic_ols_fit,
    harmonic_quantile_fit,
    knight_gap,
    quantile_fit,
)
from .series import (
    FourierGrid,
    check_loss,
    empirical_quantile,
    fourier_frequencies,
    nearest_fourier,
    nearest_fourier_index,
    normalized_ranks,
    validate_series,
    validate_tau,
)
from .simulate import (
    Ar1Spec,
    apply_monotone,
    ar1_path,
    iid_path,
    replication_stream,
    simulate_ar1,
    simulate_iid,
)
from .smoothing import (
    SmoothedTable,
    WeightSequence,
    daniell_weights,
    smooth_at,
    smooth_table,
)
from .truth import (
    CopulaCrossCovTable,
    SpectralTruth,
    bvn_cdf,
    bvn_orthant,
    copula_crosscov,
    copula_crosscov_table,
    copula_sdk,
    copula_sdk_grid,
    marginal_density_at_quantile,
    scaled_sdk,
    spectral_truth,
)
