//! Maximum-likelihood fitting with inverse-Hessian standard errors.
//!
//! The search runs over unconstrained coordinates: `mu` scaled by the sample
//! standard deviation, `beta` through a logit, `alpha` and `lambda` through
//! logs. Standard errors come from a central-difference Hessian in those
//! coordinates, mapped back with the delta method.

mod likelihood;
mod simplex;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;

pub use likelihood::{log_likelihood, Likelihood, DENSITY_FLOOR};
pub use simplex::{nelder_mead, SimplexOptions, SimplexResult};

use crate::error::{Error, Result};
use crate::params::{restricted_model, validate_params, GtsParams, RestrictedKind, PARAM_NAMES};
use crate::returns::ReturnSeries;
use crate::special::{gamma, two_sided_p};
use crate::spectral::GridConfig;

/// Fewest observations accepted by [`fit_mle`].
pub const MIN_OBS: usize = 100;
/// Relative finite-difference step per transformed coordinate.
pub const HESSIAN_STEP: f64 = 1e-4;
/// Largest tolerated `max |H_ij - H_ji| / max |H|`.
pub const HESSIAN_SYMMETRY_TOL: f64 = 1e-6;

/// Parameter family being fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Model {
    #[default]
    Full,
    Restricted(RestrictedKind),
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Full => f.write_str("full"),
            Model::Restricted(k) => write!(f, "{k}"),
        }
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" | "gts" => Ok(Model::Full),
            other => Ok(Model::Restricted(other.parse()?)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Coord {
    Location,
    Unit,
    Positive,
}

impl Model {
    pub fn free_names(self) -> &'static [&'static str] {
        match self {
            Model::Full => &PARAM_NAMES,
            Model::Restricted(k) => k.free_names(),
        }
    }

    pub fn n_free(self) -> usize {
        self.free_names().len()
    }

    pub fn to_free(self, p: &GtsParams) -> Vec<f64> {
        match self {
            Model::Full => p.to_array().to_vec(),
            Model::Restricted(k) => k.to_free(p),
        }
    }

    pub fn from_free(self, free: &[f64]) -> Result<GtsParams> {
        match self {
            Model::Full => {
                let raw: [f64; 7] = free.try_into().map_err(|_| {
                    Error::Domain(format!("full model takes 7 parameters, got {}", free.len()))
                })?;
                validate_params(raw)
            }
            Model::Restricted(k) => restricted_model(k, free),
        }
    }

    /// For each of the seven natural parameters, the free coordinate that
    /// drives it; `None` when it is pinned by the family.
    pub fn slots(self) -> [Option<usize>; 7] {
        match self {
            Model::Full => std::array::from_fn(Some),
            Model::Restricted(RestrictedKind::Kobol) => {
                [Some(0), Some(1), Some(1), Some(2), Some(3), Some(4), Some(5)]
            }
            Model::Restricted(RestrictedKind::Cgmy) => {
                [Some(0), Some(1), Some(1), Some(2), Some(3), Some(4), Some(4)]
            }
            Model::Restricted(RestrictedKind::BilateralGamma) => {
                [Some(0), None, None, Some(1), Some(2), Some(3), Some(4)]
            }
        }
    }

    fn coords(self) -> Vec<Coord> {
        self.free_names()
            .iter()
            .map(|n| match *n {
                "mu" => Coord::Location,
                b if b.starts_with("beta") => Coord::Unit,
                _ => Coord::Positive,
            })
            .collect()
    }
}

/// Map between natural free parameters and the optimizer's coordinates.
#[derive(Debug, Clone)]
struct Transform {
    model: Model,
    coords: Vec<Coord>,
    mu_scale: f64,
}

impl Transform {
    fn new(model: Model, mu_scale: f64) -> Self {
        Self {
            model,
            coords: model.coords(),
            mu_scale,
        }
    }

    fn to_theta(&self, p: &GtsParams) -> Vec<f64> {
        self.model
            .to_free(p)
            .iter()
            .zip(&self.coords)
            .map(|(&v, c)| match c {
                Coord::Location => v / self.mu_scale,
                Coord::Unit => {
                    let b = v.clamp(1e-6, 1.0 - 1e-6);
                    (b / (1.0 - b)).ln()
                }
                Coord::Positive => v.ln(),
            })
            .collect()
    }

    fn natural(&self, theta: &[f64]) -> Vec<f64> {
        theta
            .iter()
            .zip(&self.coords)
            .map(|(&t, c)| match c {
                Coord::Location => t * self.mu_scale,
                Coord::Unit => 1.0 / (1.0 + (-t).exp()),
                Coord::Positive => t.exp(),
            })
            .collect()
    }

    fn params(&self, theta: &[f64]) -> Result<GtsParams> {
        self.model.from_free(&self.natural(theta))
    }

    /// `d natural / d theta` for each free coordinate.
    fn jacobian(&self, theta: &[f64]) -> Vec<f64> {
        self.natural(theta)
            .iter()
            .zip(&self.coords)
            .map(|(&v, c)| match c {
                Coord::Location => self.mu_scale,
                Coord::Unit => v * (1.0 - v),
                Coord::Positive => v,
            })
            .collect()
    }
}

/// Settings for [`fit_mle`].
#[derive(Debug, Clone)]
pub struct FitOptions {
    pub grid: GridConfig,
    /// Number of built-in starting points (at least one).
    pub starts: usize,
    /// Simplex stopping tolerance on the log-likelihood spread.
    pub f_tol: f64,
    /// Evaluation budget per simplex run.
    pub max_evals: usize,
    /// Additional user-supplied starting points, tried after the built-in ones.
    pub extra_starts: Vec<GtsParams>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            grid: GridConfig::default(),
            starts: 5,
            f_tol: 1e-8,
            max_evals: 3000,
            extra_starts: Vec::new(),
        }
    }
}

/// Outcome of a fit, including standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: Model,
    pub params: GtsParams,
    pub loglik: f64,
    /// In [`PARAM_NAMES`] order; zero for parameters pinned by the model.
    pub std_errors: [f64; 7],
    /// Two-sided p-values of `estimate / std_error`; one for pinned parameters.
    pub z_pvalues: [f64; 7],
    pub aic: f64,
    pub bic: f64,
    pub n_obs: usize,
    pub n_free: usize,
    pub converged: bool,
    /// Covariance came from a pseudo-inverse because the Hessian was not
    /// positive definite.
    pub pseudo_inverse: bool,
    /// `max |H_ij - H_ji| / max |H|` of the finite-difference Hessian.
    pub hessian_asymmetry: f64,
    pub evaluations: usize,
}

/// `(aic, bic)` for a log-likelihood with `n_free` fitted parameters.
pub fn information_criteria(loglik: f64, n_free: usize, n_obs: usize) -> (f64, f64) {
    let k = n_free as f64;
    (2.0 * k - 2.0 * loglik, k * (n_obs as f64).ln() - 2.0 * loglik)
}

/// Two-parameter Normal baseline fitted by maximum likelihood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalFit {
    pub mean: f64,
    /// Maximum-likelihood standard deviation (divisor `n`).
    pub sd: f64,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub n_obs: usize,
}

pub fn fit_normal(data: &ReturnSeries) -> Result<NormalFit> {
    let n = data.len();
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    let nf = n as f64;
    let mean = data.values.iter().sum::<f64>() / nf;
    if data.values.iter().all(|&v| v == data.values[0]) {
        return Err(Error::DegenerateData);
    }
    let var = data.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / nf;
    let loglik = -0.5 * nf * ((2.0 * std::f64::consts::PI * var).ln() + 1.0);
    let (aic, bic) = information_criteria(loglik, 2, n);
    Ok(NormalFit {
        mean,
        sd: var.sqrt(),
        loglik,
        aic,
        bic,
        n_obs: n,
    })
}

/// Sample standard deviation of sorted data; constant data is degenerate.
fn spread(sorted: &[f64]) -> Result<f64> {
    let n = sorted.len();
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    if sorted[0] == sorted[n - 1] {
        return Err(Error::DegenerateData);
    }
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let var = sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    Ok(var.sqrt())
}

fn sample_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let i = h.floor() as usize;
    let j = (i + 1).min(sorted.len() - 1);
    sorted[i] + (h - i as f64) * (sorted[j] - sorted[i])
}

/// `alpha` on both legs so that the second cumulant equals `var`.
fn calibrate_alpha(var: f64, beta: f64, lp: f64, lm: f64) -> f64 {
    var / (gamma(2.0 - beta) * (lp.powf(beta - 2.0) + lm.powf(beta - 2.0)))
}

/// Heuristic starting point: `mu` at the sample median, `beta = 1/2`,
/// `lambda` from the distance of the 1% and 99% quantiles to the median,
/// and `alpha` matching the sample variance.
pub fn auto_init(data: &ReturnSeries) -> Result<GtsParams> {
    init_variant(data, 0.5, 1.0)
}

/// Scale on the inverse tail distance that gives the starting `lambda`.
const TAIL_RATE: f64 = 3.0;

fn init_variant(data: &ReturnSeries, beta: f64, lambda_scale: f64) -> Result<GtsParams> {
    let sorted = data.sorted();
    let sd = spread(&sorted)?;
    let var = sd * sd;
    let med = sample_quantile(&sorted, 0.5);
    // a collapsed tail falls back to the standard deviation
    let up = (sample_quantile(&sorted, 0.99) - med).max(0.1 * sd);
    let down = (med - sample_quantile(&sorted, 0.01)).max(0.1 * sd);
    let lp = lambda_scale * TAIL_RATE / up;
    let lm = lambda_scale * TAIL_RATE / down;
    let a = calibrate_alpha(var, beta, lp, lm);
    GtsParams::new(med, beta, beta, a, a, lp, lm)
}

const START_GRID: [(f64, f64); 5] = [(0.5, 1.0), (0.2, 1.5), (0.8, 0.7), (0.35, 0.85), (0.65, 1.25)];

fn builtin_starts(data: &ReturnSeries, count: usize, init: Option<&GtsParams>) -> Result<Vec<GtsParams>> {
    let mut out = Vec::with_capacity(count);
    if let Some(p) = init {
        out.push(*p);
    }
    let mut k = 0;
    while out.len() < count.max(1) {
        let (beta, scale) = START_GRID[k % START_GRID.len()];
        // past the table, shrink the tail rates further each lap
        let lap = (k / START_GRID.len()) as f64;
        out.push(init_variant(data, beta, scale * 0.8f64.powf(lap))?);
        k += 1;
    }
    Ok(out)
}

struct StartOutcome {
    theta: Vec<f64>,
    neg_loglik: f64,
    converged: bool,
    evals: usize,
}

fn run_start(
    sorted: &[f64],
    tr: &Transform,
    start: &GtsParams,
    opts: &FitOptions,
) -> StartOutcome {
    let mut lik = Likelihood::new(sorted, opts.grid);
    let mut objective = |theta: &[f64]| -> f64 {
        match tr.params(theta).and_then(|p| lik.eval(&p)) {
            Ok(v) if v.is_finite() => -v,
            _ => f64::INFINITY,
        }
    };
    let mut theta = tr.to_theta(start);
    let mut best = f64::INFINITY;
    let mut evals = 0;
    let mut converged = false;
    let mut step = 0.25;
    // restart from the incumbent until a fresh simplex stops improving
    for _ in 0..4 {
        let r = nelder_mead(
            &mut objective,
            &theta,
            &SimplexOptions {
                f_tol: opts.f_tol,
                max_evals: opts.max_evals,
                initial_step: step,
            },
        );
        evals += r.evals;
        let gain = best - r.f;
        if r.f < best {
            best = r.f;
            theta = r.x;
        }
        converged = r.converged;
        if !(gain > 1e-6) {
            break;
        }
        step = 0.05;
    }
    StartOutcome {
        theta,
        neg_loglik: best,
        converged,
        evals,
    }
}

/// Maximum-likelihood fit of `model` to `data`.
///
/// Every starting point runs an independent simplex search; the best final
/// log-likelihood wins. Failure to converge is reported through
/// [`FitResult::converged`] rather than an error.
pub fn fit_mle(
    data: &ReturnSeries,
    init: Option<&GtsParams>,
    model: Model,
    opts: &FitOptions,
) -> Result<FitResult> {
    let n = data.len();
    if n < MIN_OBS {
        return Err(Error::TooShort { needed: MIN_OBS, got: n });
    }
    let sorted = data.sorted();
    let tr = Transform::new(model, spread(&sorted)?);
    let mut starts = builtin_starts(data, opts.starts, init)?;
    starts.extend(opts.extra_starts.iter().copied());

    let outcomes: Vec<StartOutcome> = starts
        .par_iter()
        .map(|s| run_start(&sorted, &tr, s, opts))
        .collect();
    let evaluations = outcomes.iter().map(|o| o.evals).sum();
    let best = outcomes
        .into_iter()
        .min_by(|a, b| a.neg_loglik.total_cmp(&b.neg_loglik))
        .ok_or_else(|| Error::ConvergenceFailure("no starting points".into()))?;
    if !best.neg_loglik.is_finite() {
        return Err(Error::ConvergenceFailure(
            "no starting point produced a finite likelihood".into(),
        ));
    }
    let params = tr.params(&best.theta)?;
    let loglik = -best.neg_loglik;
    let n_free = model.n_free();
    let (aic, bic) = information_criteria(loglik, n_free, n);
    let se = hessian_errors(&sorted, &tr, &best.theta, &params, &opts.grid)?;
    Ok(FitResult {
        model,
        params,
        loglik,
        std_errors: se.std_errors,
        z_pvalues: se.z_pvalues,
        aic,
        bic,
        n_obs: n,
        n_free,
        converged: best.converged,
        pseudo_inverse: se.pseudo_inverse,
        hessian_asymmetry: se.asymmetry,
        evaluations,
    })
}

/// Standard errors and their by-products.
#[derive(Debug, Clone, PartialEq)]
pub struct StdErrors {
    pub std_errors: [f64; 7],
    pub z_pvalues: [f64; 7],
    pub pseudo_inverse: bool,
    pub asymmetry: f64,
    /// Finite-difference Hessian of `-loglik` in the search coordinates.
    pub hessian: Vec<Vec<f64>>,
}

/// Recomputes the standard errors of `fit` on `data`.
pub fn standard_errors(fit: &FitResult, data: &ReturnSeries, grid: &GridConfig) -> Result<StdErrors> {
    let sorted = data.sorted();
    let tr = Transform::new(fit.model, spread(&sorted)?);
    let theta = tr.to_theta(&fit.params);
    hessian_errors(&sorted, &tr, &theta, &fit.params, grid)
}

/// Symmetric finite-difference Hessian of `f` with per-coordinate steps,
/// plus the asymmetry measure of the two mixed-difference orderings.
fn fd_hessian<F>(f: F, theta: &[f64], steps: &[f64]) -> Result<(Vec<Vec<f64>>, f64)>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let k = theta.len();
    let at = |moves: &[(usize, f64)]| -> Result<f64> {
        let mut t = theta.to_vec();
        for &(i, s) in moves {
            t[i] += s * steps[i];
        }
        f(&t)
    };
    let f0 = f(theta)?;
    let mut h = vec![vec![0.0; k]; k];
    let mut hji = vec![vec![0.0; k]; k];
    for i in 0..k {
        let (fp, fm) = (at(&[(i, 1.0)])?, at(&[(i, -1.0)])?);
        h[i][i] = (fp - 2.0 * f0 + fm) / (steps[i] * steps[i]);
        hji[i][i] = h[i][i];
        for j in 0..i {
            let fpp = at(&[(i, 1.0), (j, 1.0)])?;
            let fpm = at(&[(i, 1.0), (j, -1.0)])?;
            let fmp = at(&[(i, -1.0), (j, 1.0)])?;
            let fmm = at(&[(i, -1.0), (j, -1.0)])?;
            let denom = 4.0 * steps[i] * steps[j];
            // difference in j of the i-derivative, and vice versa
            h[i][j] = ((fpp - fmp) - (fpm - fmm)) / denom;
            hji[i][j] = ((fpp - fpm) - (fmp - fmm)) / denom;
        }
    }
    let scale = h.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut worst = 0.0f64;
    for i in 0..k {
        for j in 0..i {
            worst = worst.max((h[i][j] - hji[i][j]).abs());
            let v = 0.5 * (h[i][j] + hji[i][j]);
            h[i][j] = v;
            h[j][i] = v;
        }
    }
    let asym = if scale > 0.0 { worst / scale } else { 0.0 };
    Ok((h, asym))
}

fn hessian_errors(
    sorted: &[f64],
    tr: &Transform,
    theta: &[f64],
    params: &GtsParams,
    grid: &GridConfig,
) -> Result<StdErrors> {
    let mut lik = Likelihood::new(sorted, *grid);
    lik.rebuild(params)?;
    let neg = |t: &[f64]| -> Result<f64> { Ok(-lik.eval_fixed(&tr.params(t)?)?) };
    let steps: Vec<f64> = theta.iter().map(|t| HESSIAN_STEP * t.abs().max(1.0)).collect();
    let (h, asymmetry) = fd_hessian(neg, theta, &steps)?;
    let k = theta.len();
    let hm = DMatrix::from_fn(k, k, |i, j| h[i][j]);
    let (cov, pseudo_inverse) = match hm.clone().cholesky() {
        Some(c) => (c.inverse(), false),
        None => {
            let eps = 1e-12 * hm.amax();
            let pinv = hm
                .pseudo_inverse(eps)
                .map_err(|e| Error::NumericalFailure(e.to_string()))?;
            (pinv, true)
        }
    };
    let jac = tr.jacobian(theta);
    let free_se: Vec<f64> = (0..k)
        .map(|i| jac[i].abs() * cov[(i, i)].max(0.0).sqrt())
        .collect();
    let values = params.to_array();
    let slots = tr.model.slots();
    let std_errors: [f64; 7] = std::array::from_fn(|i| slots[i].map_or(0.0, |s| free_se[s]));
    let z_pvalues: [f64; 7] = std::array::from_fn(|i| {
        if std_errors[i] > 0.0 {
            two_sided_p(values[i] / std_errors[i])
        } else {
            1.0
        }
    });
    Ok(StdErrors {
        std_errors,
        z_pvalues,
        pseudo_inverse,
        asymmetry,
        hessian: h,
    })
}
