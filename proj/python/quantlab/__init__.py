"""Quantizer sequences, distortion and discrepancy functionals."""

from ._quantlab import (
    ConfigError,
    IoError,
    MetricValue,
    NumericError,
    PointSet,
    ResourceError,
    RunError,
    check_sandwich,
    derive_seeds,
    deviation_between,
    deviation_from_uniform,
    discrepancy_2d,
    dp_optimal_means,
    evaluate_metric,
    extent_discrepancy,
    farey,
    farey_size,
    fit_power_law,
    gap_stats,
    iid_density,
    iid_uniform,
    lacunary,
    lloyd,
    max_distortion,
    mean_distortion,
    optimal_uniform_means,
    point_distortion,
    star_discrepancy,
    sweep,
    sweep_csv,
    torus_orbit,
    weyl,
)

__version__ = "0.1.0"
