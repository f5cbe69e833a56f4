//! Log-likelihood from the tabulated density.

use crate::bilateral::{is_bilateral_gamma, BilateralGamma};
use crate::error::{Error, Result};
use crate::levy::{characteristic_exponent, mean_sd};
use crate::params::GtsParams;
use crate::returns::ReturnSeries;
use crate::spectral::{build_grid, grid_on, pdf_table, GridConfig, SpectralEngine, SpectralGrid};
use crate::interp::Pchip;

/// Densities below this are floored before taking logs.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// How many offending observations an [`Error::OutOfGrid`] carries.
const OUT_OF_GRID_SAMPLE: usize = 10;

fn sum_log_density(f: &Pchip, sorted: &[f64]) -> f64 {
    sorted.iter().map(|&x| f.eval(x).max(DENSITY_FLOOR).ln()).sum()
}

fn sorted_copy(data: &[f64]) -> Vec<f64> {
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn bilateral_log_likelihood(p: &GtsParams, sorted: &[f64]) -> Result<f64> {
    let d = BilateralGamma::new(p)?;
    let floor = DENSITY_FLOOR.ln();
    Ok(sorted.iter().map(|&x| d.ln_pdf(x).max(floor)).sum())
}

/// `sum_k ln f(x_k)` with `f` tabulated on the default grid for `p` and
/// interpolated by monotone cubics. Observations are summed in sorted order,
/// so the result does not depend on the input order. Bilateral gamma laws
/// are evaluated directly instead, see [`crate::bilateral`].
pub fn log_likelihood(p: &GtsParams, data: &ReturnSeries, cfg: &GridConfig) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    if is_bilateral_gamma(p) {
        return bilateral_log_likelihood(p, &sorted_copy(&data.values));
    }
    let g = build_grid(p, cfg)?;
    let outside: Vec<f64> = data.values.iter().copied().filter(|&x| !g.contains(x)).collect();
    if !outside.is_empty() {
        return Err(Error::OutOfGrid {
            count: outside.len(),
            first: outside.into_iter().take(OUT_OF_GRID_SAMPLE).collect(),
        });
    }
    let f = pdf_table(p, &g)?.interpolant();
    Ok(sum_log_density(&f, &sorted_copy(&data.values)))
}

/// Likelihood evaluator that keeps one grid across calls.
///
/// The grid spans both the data and the model's own window. It is rebuilt
/// only when a parameter set's window leaves it or its characteristic
/// function is no longer negligible at the cutoff, so that nearby parameter
/// sets are compared on identical nodes.
pub struct Likelihood {
    sorted: Vec<f64>,
    cfg: GridConfig,
    engine: Option<SpectralEngine>,
    rebuilds: usize,
}

/// Extra room added around the model window on a rebuild.
const WINDOW_SLACK: f64 = 1.2;
/// A rebuild is forced once `|cf|` at the cutoff exceeds this multiple of
/// the configured target.
const CUTOFF_SLACK: f64 = 1e3;
/// Largest tolerated mass defect on the fixed grid.
const MASS_TOL: f64 = 1e-4;

impl Likelihood {
    pub fn new(data: &[f64], cfg: GridConfig) -> Self {
        Self {
            sorted: sorted_copy(data),
            cfg,
            engine: None,
            rebuilds: 0,
        }
    }

    pub fn n_obs(&self) -> usize {
        self.sorted.len()
    }

    pub fn rebuilds(&self) -> usize {
        self.rebuilds
    }

    pub fn grid(&self) -> Option<&SpectralGrid> {
        self.engine.as_ref().map(|e| e.grid())
    }

    fn model_window(&self, p: &GtsParams, slack: f64) -> (f64, f64) {
        let (k1, sd) = mean_sd(p);
        let half = slack * (self.cfg.width_sds * sd).max(self.cfg.min_half_width);
        (k1 - half, k1 + half)
    }

    fn covers(&self, p: &GtsParams) -> bool {
        let Some(e) = &self.engine else {
            return false;
        };
        let g = e.grid();
        let (lo, hi) = self.model_window(p, 1.0);
        let tail = characteristic_exponent(p, g.freq_cutoff).re.exp();
        g.x_min <= lo && hi <= g.x_max && tail <= CUTOFF_SLACK * self.cfg.freq_eps
    }

    /// Builds a fresh grid for `p`; a no-op for bilateral gamma laws, which
    /// are evaluated without one.
    pub fn rebuild(&mut self, p: &GtsParams) -> Result<()> {
        if is_bilateral_gamma(p) {
            return Ok(());
        }
        let (lo, hi) = self.model_window(p, WINDOW_SLACK);
        let (dlo, dhi) = (self.sorted[0], self.sorted[self.sorted.len() - 1]);
        let g = grid_on(p, &self.cfg, lo.min(dlo), hi.max(dhi))?;
        self.engine = Some(SpectralEngine::new(g)?);
        self.rebuilds += 1;
        Ok(())
    }

    /// Log-likelihood, rebuilding the grid first if `p` needs it.
    pub fn eval(&mut self, p: &GtsParams) -> Result<f64> {
        if is_bilateral_gamma(p) {
            return bilateral_log_likelihood(p, &self.sorted);
        }
        if !self.covers(p) {
            self.rebuild(p)?;
        }
        self.eval_fixed(p)
    }

    /// Log-likelihood on the current grid, which must exist.
    pub fn eval_fixed(&self, p: &GtsParams) -> Result<f64> {
        if is_bilateral_gamma(p) {
            return bilateral_log_likelihood(p, &self.sorted);
        }
        let e = self
            .engine
            .as_ref()
            .ok_or_else(|| Error::Config("likelihood grid not built".into()))?;
        let g = e.grid();
        let mut f = e.density(p)?;
        let worst = f.iter().copied().fold(f64::INFINITY, f64::min);
        let mass = g.dx * (f.iter().sum::<f64>() - 0.5 * (f[0] + f[g.m - 1]));
        if worst < -1e-6 || (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::NumericalFailure(format!(
                "density unusable on the fixed grid (mass {mass}, min {worst:e})"
            )));
        }
        for v in f.iter_mut() {
            *v = v.max(0.0);
        }
        let interp = Pchip::new(g.x_min, g.dx, f);
        Ok(sum_log_density(&interp, &self.sorted))
    }
}
