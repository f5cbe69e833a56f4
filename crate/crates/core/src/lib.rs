//! Generalized tempered stable (GTS) distributions for return-series tail
//! analysis.

pub mod bilateral;
pub mod emit;
pub mod error;
pub mod estimation;
pub mod gof;
pub mod interp;
pub mod levy;
pub mod params;
pub mod qq;
pub mod quantile;
pub mod returns;
pub mod special;
pub mod spectral;

pub use error::{Error, ErrorKind, Result};
pub use levy::{
    characteristic_exponent, characteristic_function, cumulant, levy_density, Exponent,
    path_classification, Activity, PathClassification, Variation,
};
pub use params::{restricted_model, validate_params, GtsParams, RestrictedKind, PARAM_NAMES};
pub use spectral::{
    build_grid, cdf_table, direct_quadrature_oracle, frft, pdf_table, spectral_tables, CdfTable,
    DensityTable, GridConfig, SpectralGrid,
};
pub use quantile::{quantile, sample, solve_quartic_unit, QuantileQuery, QuarticCoeffs};
pub use returns::{load_price_csv, log_returns, summary_stats, PriceSeries, ReturnSeries};
pub use estimation::{
    fit_mle, fit_normal, information_criteria, log_likelihood, standard_errors, FitOptions,
    FitResult, Model, NormalFit,
};
pub use gof::{gof_ad, gof_chi2, gof_ks, gof_report, GofReport};
pub use qq::{qq_gts, qq_normal, qq_points, tail_verdict, QQData, Reference, Shape, TailComparison, TailVerdict};
