//! Density and distribution-function tables by Fourier inversion of the
//! characteristic function.

mod frft;
mod grid;
mod oracle;
mod tables;

pub use frft::{frft, FrftKernel, FrftPlan};
pub use grid::{build_grid, frequency_cutoff, grid_on, GridConfig, SpectralGrid, CUTOFF_HARD_LIMIT};
pub use oracle::{direct_quadrature_oracle, ORACLE_TOL};
pub use tables::{
    cdf_table, pdf_table, spectral_tables, CdfTable, DensityTable, Quadrature, RawTables,
    SpectralEngine, DENSITY_CLAMP, DENSITY_HARD_FLOOR, MONOTONE_SLACK, NORMALIZATION_TOL,
};
