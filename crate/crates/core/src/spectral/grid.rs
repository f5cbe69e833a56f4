use crate::error::{Error, Result};
use crate::levy::{characteristic_exponent, mean_sd};
use crate::params::GtsParams;

/// Knobs for [`build_grid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    /// Number of spatial points; rounded up to a power of two, at least 256.
    pub m: usize,
    /// Half-width of the spatial window in standard deviations.
    pub width_sds: f64,
    /// Lower bound on the half-width, in percent.
    pub min_half_width: f64,
    /// Target `|cf|` at the frequency cutoff.
    pub freq_eps: f64,
    /// The frequency step is chosen so the quadrature's alias period spans
    /// at least `alias_factor` times the spatial window.
    pub alias_factor: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            m: 1 << 14,
            width_sds: 20.0,
            min_half_width: 0.0,
            freq_eps: 1e-12,
            alias_factor: 1.25,
        }
    }
}

/// Past this `|cf|` at the cutoff the truncated integrand is unusable.
pub const CUTOFF_HARD_LIMIT: f64 = 1e-6;

/// Uniform spatial grid `x_j = x_min + j dx`, `j < m`, paired with the
/// frequency nodes `xi_k = k * freq_step`, `k < n_freq`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub m: usize,
    pub dx: f64,
    pub n_freq: usize,
    pub freq_cutoff: f64,
    pub freq_step: f64,
    /// `|cf(freq_cutoff)|`, kept for diagnostics.
    pub cf_at_cutoff: f64,
}

impl SpectralGrid {
    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.m).map(move |j| self.x(j))
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }
}

fn round_m(m: usize) -> usize {
    m.max(256).next_power_of_two()
}

/// Smallest frequency at which `|cf| <= eps`, by doubling then bisection on
/// `Re psi`, which is nonincreasing in `|xi|`.
pub fn frequency_cutoff(p: &GtsParams, eps: f64) -> Result<f64> {
    let target = eps.ln();
    let log_mod = |xi: f64| characteristic_exponent(p, xi).re;
    let (_, sd) = mean_sd(p);
    let mut hi = 1.0 / sd;
    let mut lo = 0.0;
    while log_mod(hi) > target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e9 {
            return Err(Error::Config(format!(
                "characteristic function does not reach {eps:e} below xi = 1e9"
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if log_mod(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Builds a grid centered at the mean with half-width
/// `max(width_sds * sd, min_half_width)`.
pub fn build_grid(p: &GtsParams, cfg: &GridConfig) -> Result<SpectralGrid> {
    let (k1, sd) = mean_sd(p);
    let half = (cfg.width_sds * sd).max(cfg.min_half_width);
    grid_on(p, cfg, k1 - half, k1 + half)
}

/// Builds a grid over an explicit window `[x_min, x_max]`.
///
/// The frequency cutoff comes from [`frequency_cutoff`]; the step is
/// `cutoff / (n_freq - 2)` unless that would alias, in which case the step is
/// capped and the cutoff shrinks with it. A cutoff where `|cf|` still exceeds
/// [`CUTOFF_HARD_LIMIT`] is a configuration error.
pub fn grid_on(p: &GtsParams, cfg: &GridConfig, x_min: f64, x_max: f64) -> Result<SpectralGrid> {
    if !(x_min < x_max) || !x_min.is_finite() || !x_max.is_finite() {
        return Err(Error::Config(format!("empty window [{x_min}, {x_max}]")));
    }
    let m = round_m(cfg.m);
    let n_freq = m;
    let width = x_max - x_min;
    let wanted = frequency_cutoff(p, cfg.freq_eps)?;
    let max_step = std::f64::consts::PI / (cfg.alias_factor * width);
    let span = (n_freq - 2) as f64;
    let (freq_cutoff, freq_step) = if wanted / span <= max_step {
        (wanted, wanted / span)
    } else {
        (max_step * span, max_step)
    };
    let cf_at_cutoff = characteristic_exponent(p, freq_cutoff).re.exp();
    if cf_at_cutoff >= CUTOFF_HARD_LIMIT {
        return Err(Error::Config(format!(
            "m = {m} cannot resolve the frequency content: |cf| = {cf_at_cutoff:e} at the cutoff"
        )));
    }
    Ok(SpectralGrid {
        x_min,
        x_max,
        m,
        dx: width / (m - 1) as f64,
        n_freq,
        freq_cutoff,
        freq_step,
        cf_at_cutoff,
    })
}
