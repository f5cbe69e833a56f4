use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::frft::{FrftKernel, FrftPlan};
use super::grid::SpectralGrid;
use crate::error::{Error, Result};
use crate::interp::{lagrange5_eval, Pchip};
use crate::levy::{cumulant, Exponent};
use crate::params::GtsParams;

/// Values in `[-CLAMP, 0)` are roundoff and get clamped to zero.
pub const DENSITY_CLAMP: f64 = 1e-12;
/// Anything below `-DENSITY_HARD_FLOOR` means the grid is misconfigured.
pub const DENSITY_HARD_FLOOR: f64 = 1e-9;
pub const NORMALIZATION_TOL: f64 = 1e-6;
pub const MONOTONE_SLACK: f64 = 1e-10;

/// Closed composite Newton–Cotes weights for the frequency nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quadrature {
    Trapezoid,
    #[default]
    Simpson,
}

impl Quadrature {
    /// Weights for `n` nodes at spacing `h`. Simpson covers nodes
    /// `0..=n-2` (an even number of panels); the last node gets weight zero.
    pub fn weights(self, n: usize, h: f64) -> Vec<f64> {
        match self {
            Quadrature::Trapezoid => {
                let mut w = vec![h; n];
                w[0] = 0.5 * h;
                w[n - 1] = 0.5 * h;
                w
            }
            Quadrature::Simpson => {
                let last = if (n - 1).is_multiple_of(2) { n - 1 } else { n - 2 };
                let mut w = vec![0.0; n];
                for (k, wk) in w.iter_mut().enumerate().take(last + 1) {
                    *wk = if k == 0 || k == last {
                        h / 3.0
                    } else if k % 2 == 1 {
                        4.0 * h / 3.0
                    } else {
                        2.0 * h / 3.0
                    };
                }
                w
            }
        }
    }
}

/// Inverts the characteristic function on a fixed grid.
///
/// The density is `(1/pi) Re int_0^inf cf(xi) e^{-i xi x} dxi`. The CDF uses
/// `F(x) = 1/2 - (1/pi) int_0^inf Im[e^{-i xi x} cf(xi)] / xi dxi`; the
/// integrand's pole at zero cancels and its value there is `kappa_1 - x`,
/// which is filled in analytically. Both sums over frequency nodes are
/// evaluated for every `x_j` at once with one fractional transform each.
pub struct SpectralEngine {
    grid: SpectralGrid,
    weights: Vec<f64>,
    /// `w_k exp(-i xi_k x_min)`.
    phase: Vec<Complex64>,
    plan: FrftPlan,
    kernel: FrftKernel,
}

/// Raw (unchecked) density and CDF samples on the grid.
#[derive(Debug, Clone)]
pub struct RawTables {
    pub pdf: Vec<f64>,
    pub cdf: Vec<f64>,
}

impl SpectralEngine {
    pub fn new(grid: SpectralGrid) -> Result<Self> {
        Self::with_quadrature(grid, Quadrature::default())
    }

    pub fn with_quadrature(grid: SpectralGrid, rule: Quadrature) -> Result<Self> {
        let weights = rule.weights(grid.n_freq, grid.freq_step);
        let phase = weights
            .iter()
            .enumerate()
            .map(|(k, &w)| w * Complex64::from_polar(1.0, -(k as f64 * grid.freq_step) * grid.x_min))
            .collect();
        let plan = FrftPlan::new(grid.m)?;
        let kernel = plan.kernel(grid.freq_step * grid.dx / (2.0 * PI));
        Ok(Self {
            weights,
            phase,
            plan,
            kernel,
            grid,
        })
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    /// `w_k cf(xi_k) e^{-i xi_k x_min}` for every frequency node.
    fn weighted_cf(&self, p: &GtsParams) -> Vec<Complex64> {
        let h = self.grid.freq_step;
        let psi = Exponent::new(p);
        self.phase
            .par_iter()
            .enumerate()
            .map(|(k, &ph)| {
                if ph == Complex64::new(0.0, 0.0) {
                    return ph;
                }
                ph * psi.cf(k as f64 * h)
            })
            .collect()
    }

    pub fn density(&self, p: &GtsParams) -> Result<Vec<f64>> {
        let a = self.weighted_cf(p);
        Ok(self
            .plan
            .transform_with(&self.kernel, &a)?
            .iter()
            .map(|g| g.re / PI)
            .collect())
    }

    pub fn tables(&self, p: &GtsParams) -> Result<RawTables> {
        let a = self.weighted_cf(p);
        let h = self.grid.freq_step;
        // the k = 0 term is the analytic limit, added separately below
        let b: Vec<Complex64> = a
            .iter()
            .enumerate()
            .map(|(k, &v)| if k == 0 { Complex64::new(0.0, 0.0) } else { v / (k as f64 * h) })
            .collect();
        let pdf = self
            .plan
            .transform_with(&self.kernel, &a)?
            .iter()
            .map(|g| g.re / PI)
            .collect();
        let k1 = cumulant(p, 1)?;
        let w0 = self.weights[0];
        let cdf = self
            .plan
            .transform_with(&self.kernel, &b)?
            .iter()
            .enumerate()
            .map(|(j, g)| 0.5 - (w0 * (k1 - self.grid.x(j)) + g.im) / PI)
            .collect();
        Ok(RawTables { pdf, cdf })
    }
}

/// Tabulated density `f(x_j)`.
#[derive(Debug, Clone)]
pub struct DensityTable {
    pub grid: SpectralGrid,
    pub values: Vec<f64>,
}

/// Tabulated distribution function `F(x_j)`.
#[derive(Debug, Clone)]
pub struct CdfTable {
    pub grid: SpectralGrid,
    pub values: Vec<f64>,
}

fn trapezoid(values: &[f64], dx: f64) -> f64 {
    let inner: f64 = values.iter().sum();
    dx * (inner - 0.5 * (values[0] + values[values.len() - 1]))
}

impl DensityTable {
    /// Clamps roundoff negatives and checks normalization.
    pub fn from_raw(grid: SpectralGrid, mut values: Vec<f64>) -> Result<Self> {
        let worst = values.iter().copied().fold(f64::INFINITY, f64::min);
        if worst < -DENSITY_HARD_FLOOR {
            return Err(Error::NumericalFailure(format!(
                "density dips to {worst:e}; grid is misconfigured"
            )));
        }
        for v in values.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let table = Self { grid, values };
        let mass = table.integral();
        if (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NumericalFailure(format!(
                "density integrates to {mass}, not 1"
            )));
        }
        Ok(table)
    }

    pub fn integral(&self) -> f64 {
        trapezoid(&self.values, self.grid.dx)
    }

    /// Monotone cubic interpolant, used where shape preservation matters.
    pub fn interpolant(&self) -> Pchip {
        Pchip::new(self.grid.x_min, self.grid.dx, self.values.clone())
    }

    /// Five-point Lagrange interpolant, accurate to the table itself on a
    /// smooth density. Clamped to the end values outside the grid.
    pub fn eval(&self, x: f64) -> f64 {
        lagrange5_eval(self.grid.x_min, self.grid.dx, &self.values, x)
    }
}

impl CdfTable {
    /// Checks monotonicity within [`MONOTONE_SLACK`].
    pub fn from_raw(grid: SpectralGrid, values: Vec<f64>) -> Result<Self> {
        if let Some(j) = values
            .windows(2)
            .position(|w| w[1] < w[0] - MONOTONE_SLACK)
        {
            return Err(Error::NumericalFailure(format!(
                "cdf decreases between nodes {j} and {}",
                j + 1
            )));
        }
        Ok(Self { grid, values })
    }

    /// Five-point Lagrange interpolant of the table (the same stencil the
    /// quantile solver inverts). Clamped to the end values outside the grid.
    pub fn eval(&self, x: f64) -> f64 {
        lagrange5_eval(self.grid.x_min, self.grid.dx, &self.values, x)
    }

    pub fn lower_mass(&self) -> f64 {
        self.values[0]
    }

    pub fn upper_mass(&self) -> f64 {
        1.0 - self.values[self.values.len() - 1]
    }
}

pub fn pdf_table(p: &GtsParams, g: &SpectralGrid) -> Result<DensityTable> {
    let engine = SpectralEngine::new(*g)?;
    DensityTable::from_raw(*g, engine.density(p)?)
}

pub fn cdf_table(p: &GtsParams, g: &SpectralGrid) -> Result<CdfTable> {
    let engine = SpectralEngine::new(*g)?;
    CdfTable::from_raw(*g, engine.tables(p)?.cdf)
}

/// Both tables from one pass over the characteristic function.
pub fn spectral_tables(p: &GtsParams, g: &SpectralGrid) -> Result<(DensityTable, CdfTable)> {
    let engine = SpectralEngine::new(*g)?;
    let raw = engine.tables(p)?;
    Ok((
        DensityTable::from_raw(*g, raw.pdf)?,
        CdfTable::from_raw(*g, raw.cdf)?,
    ))
}
