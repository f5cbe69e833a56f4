//! Quantiles from a tabulated CDF and inverse-CDF sampling.
//!
//! Between two grid nodes with `F_i <= alpha < F_{i+1}`, `F` is replaced by the
//! quartic through the five nearest samples, written in the normalized
//! coordinate `y = (x - x_i) / dx`. The quantile is `x_i + y dx` where `y` is
//! the unique root of `b0 + b1 y + ... + b4 y^4 = 0` in `(0, 1)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interp::{lagrange5, poly_deriv, poly_eval, stencil_start};
use crate::returns::ReturnSeries;
use crate::spectral::CdfTable;

/// Levels closer than this to the tabulated mass limits are refused.
pub const EDGE_MARGIN: f64 = 1e-9;

/// Coefficients `b0..b4` of the quartic in `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticCoeffs(pub [f64; 5]);

impl QuarticCoeffs {
    pub fn eval(&self, y: f64) -> f64 {
        poly_eval(&self.0, y)
    }

    pub fn deriv(&self, y: f64) -> f64 {
        poly_deriv(&self.0, y)
    }
}

/// Root of a quartic on the unit interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitRoot {
    pub y: f64,
    /// More than one sign change was found; the root nearest the
    /// linear-interpolation seed was kept.
    pub multiple: bool,
}

/// A solved quantile with the intermediate quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileQuery {
    pub alpha: f64,
    /// Bracket index `i` with `F_i <= alpha < F_{i+1}`.
    pub bracket: usize,
    pub coeffs: QuarticCoeffs,
    pub y: f64,
    pub x_alpha: f64,
    pub multiple_roots: bool,
}

const SCAN_STEPS: usize = 32;

fn refine(b: &QuarticCoeffs, mut lo: f64, mut hi: f64, seed: f64) -> f64 {
    let f_lo = b.eval(lo);
    let rising = f_lo < 0.0;
    let mut y = seed.clamp(lo, hi);
    for _ in 0..200 {
        let f = b.eval(y);
        if f == 0.0 {
            return y;
        }
        if (f < 0.0) == rising {
            lo = y;
        } else {
            hi = y;
        }
        if hi - lo <= 4.0 * f64::EPSILON {
            break;
        }
        let d = b.deriv(y);
        let step = f / d;
        let newton = y - step;
        if d != 0.0 && newton > lo && newton < hi {
            y = newton;
            if step.abs() <= 1e-16 {
                break;
            }
        } else {
            y = 0.5 * (lo + hi);
        }
    }
    // take the better endpoint when the loop ended on a bracket collapse
    [y, lo, hi]
        .into_iter()
        .min_by(|a, c| b.eval(*a).abs().total_cmp(&b.eval(*c).abs()))
        .unwrap_or(y)
}

/// Solves the quartic on `[0, 1]` given a sign change between the endpoints.
pub fn solve_quartic_unit_detailed(b: &QuarticCoeffs) -> Result<UnitRoot> {
    let (f0, f1) = (b.eval(0.0), b.eval(1.0));
    if f0 == 0.0 {
        return Ok(UnitRoot { y: 0.0, multiple: false });
    }
    if f1 == 0.0 {
        return Ok(UnitRoot { y: 1.0, multiple: false });
    }
    if (f0 < 0.0) == (f1 < 0.0) {
        return Err(Error::NoBracket);
    }
    let seed = f0 / (f0 - f1);
    let mut brackets = Vec::new();
    let mut prev = (0.0, f0);
    for k in 1..=SCAN_STEPS {
        let y = k as f64 / SCAN_STEPS as f64;
        let f = if k == SCAN_STEPS { f1 } else { b.eval(y) };
        if f == 0.0 || (f < 0.0) != (prev.1 < 0.0) {
            brackets.push((prev.0, y));
        }
        prev = (y, f);
    }
    let multiple = brackets.len() > 1;
    let best = brackets
        .iter()
        .map(|&(lo, hi)| refine(b, lo, hi, seed.clamp(lo, hi)))
        .min_by(|a, c| (a - seed).abs().total_cmp(&(c - seed).abs()))
        .ok_or(Error::NoBracket)?;
    Ok(UnitRoot { y: best, multiple })
}

pub fn solve_quartic_unit(b: &QuarticCoeffs) -> Result<f64> {
    Ok(solve_quartic_unit_detailed(b)?.y)
}

/// Full quantile computation with diagnostics.
pub fn quantile_query(t: &CdfTable, alpha: f64) -> Result<QuantileQuery> {
    let values = &t.values;
    let m = values.len();
    let (lo, hi) = (values[0], values[m - 1]);
    if !(alpha > lo + EDGE_MARGIN && alpha < hi - EDGE_MARGIN) || !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::OutOfRange { alpha, lo, hi });
    }
    let above = values.partition_point(|&v| v <= alpha);
    let i = above.saturating_sub(1).min(m - 2);
    let g = &t.grid;
    if values[i] == alpha {
        return Ok(QuantileQuery {
            alpha,
            bracket: i,
            coeffs: QuarticCoeffs([0.0; 5]),
            y: 0.0,
            x_alpha: g.x(i),
            multiple_roots: false,
        });
    }
    if !(values[i] < alpha && alpha < values[i + 1]) {
        return Err(Error::BracketFailure(i));
    }
    let s = stencil_start(i, m);
    let window: [f64; 5] = std::array::from_fn(|k| values[s + k]);
    let mut c = lagrange5(window, s as f64 - i as f64);
    c[0] -= alpha;
    let coeffs = QuarticCoeffs(c);
    let root = solve_quartic_unit_detailed(&coeffs).map_err(|_| Error::BracketFailure(i))?;
    Ok(QuantileQuery {
        alpha,
        bracket: i,
        coeffs,
        y: root.y,
        x_alpha: g.x(i) + root.y * g.dx,
        multiple_roots: root.multiple,
    })
}

pub fn quantile(t: &CdfTable, alpha: f64) -> Result<f64> {
    Ok(quantile_query(t, alpha)?.x_alpha)
}

/// Quantiles for pre-drawn uniforms, evaluated in parallel; output order
/// matches input order regardless of thread count.
pub fn sample_from_uniforms(t: &CdfTable, uniforms: &[f64]) -> Result<Vec<f64>> {
    uniforms.par_iter().map(|&u| quantile(t, u)).collect()
}

/// Draws `n` uniforms from ChaCha8 seeded with `seed`, skipping any that fall
/// within [`EDGE_MARGIN`] of the tabulated mass limits.
pub fn seeded_uniforms(t: &CdfTable, n: usize, seed: u64) -> Vec<f64> {
    let lo = t.values[0] + EDGE_MARGIN;
    let hi = t.values[t.values.len() - 1] - EDGE_MARGIN;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let u: f64 = rng.random();
        if u > lo && u < hi {
            out.push(u);
        }
    }
    out
}

/// Inverse-CDF sample of size `n`. Identical `(n, seed)` give identical output.
pub fn sample(t: &CdfTable, n: usize, seed: u64) -> Result<ReturnSeries> {
    if n == 0 {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    let values = sample_from_uniforms(t, &seeded_uniforms(t, n, seed))?;
    ReturnSeries::new(values, format!("gts-sample(seed={seed})"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::GtsParams;
    use crate::spectral::{build_grid, cdf_table, GridConfig};

    fn bisect(b: &QuarticCoeffs) -> f64 {
        let (mut lo, mut hi) = (0.0, 1.0);
        let rising = b.eval(0.0) < 0.0;
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if (b.eval(mid) < 0.0) == rising {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn linear_and_pure_quartic() {
        let y = solve_quartic_unit(&QuarticCoeffs([-0.25, 0.5, 0.0, 0.0, 0.0])).unwrap();
        assert!((y - 0.5).abs() < 1e-15);
        let y = solve_quartic_unit(&QuarticCoeffs([-0.0625, 0.0, 0.0, 0.0, 1.0])).unwrap();
        assert!((y - 0.5).abs() < 1e-15);
    }

    #[test]
    fn no_bracket() {
        assert!(matches!(
            solve_quartic_unit(&QuarticCoeffs([1.0, 1.0, 0.0, 0.0, 0.0])),
            Err(Error::NoBracket)
        ));
    }

    #[test]
    fn wiggly_quartic_prefers_seed() {
        // roots at 0.1, 0.5, 0.9 (and 3): linear seed is 0.5
        let r = [0.1, 0.5, 0.9, 3.0];
        let mut c = [1.0, 0.0, 0.0, 0.0, 0.0];
        for &root in &r {
            let mut next = [0.0; 5];
            for d in 0..5 {
                next[d] = -root * c[d] + if d > 0 { c[d - 1] } else { 0.0 };
            }
            c = next;
        }
        let q = QuarticCoeffs(c);
        let root = solve_quartic_unit_detailed(&q).unwrap();
        assert!(root.multiple);
        let seed = q.eval(0.0) / (q.eval(0.0) - q.eval(1.0));
        let nearest = r[..3]
            .iter()
            .copied()
            .min_by(|a, b| (a - seed).abs().total_cmp(&(b - seed).abs()))
            .unwrap();
        assert!((root.y - nearest).abs() < 1e-12);
    }

    #[test]
    fn quartics_from_cdf_brackets_match_bisection() {
        let p = GtsParams::bitcoin();
        let g = build_grid(&p, &GridConfig { m: 1 << 12, ..GridConfig::default() }).unwrap();
        let t = cdf_table(&p, &g).unwrap();
        for &alpha in &[0.003, 0.2, 0.5, 0.77, 0.995] {
            let q = quantile_query(&t, alpha).unwrap();
            assert!(q.coeffs.eval(q.y).abs() <= 1e-12);
            assert!((q.y - bisect(&q.coeffs)).abs() <= 1e-12);
            assert!(q.y > 0.0 && q.y < 1.0);
        }
    }

    #[test]
    fn node_coincidence_and_range() {
        let p = GtsParams::ethereum();
        let g = build_grid(&p, &GridConfig { m: 1 << 12, ..GridConfig::default() }).unwrap();
        let t = cdf_table(&p, &g).unwrap();
        let j = g.m / 2 + 17;
        assert_eq!(quantile(&t, t.values[j]).unwrap(), g.x(j));
        assert!(matches!(quantile(&t, 0.0), Err(Error::OutOfRange { .. })));
        assert!(matches!(quantile(&t, 1.0), Err(Error::OutOfRange { .. })));
        assert!(matches!(quantile(&t, t.values[0]), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn symmetric_median_and_deterministic_sampling() {
        let p = GtsParams::new(0.0, 0.3, 0.3, 0.8, 0.8, 0.4, 0.4).unwrap();
        let g = build_grid(&p, &GridConfig::default()).unwrap();
        let t = cdf_table(&p, &g).unwrap();
        assert!(quantile(&t, 0.5).unwrap().abs() < 1e-8);
        let one = sample_from_uniforms(&t, &[0.5]).unwrap();
        assert!(one[0].abs() < 1e-8);
        let a = sample(&t, 500, 11).unwrap();
        let b = sample(&t, 500, 11).unwrap();
        assert_eq!(a.values, b.values);
        assert_ne!(a.values, sample(&t, 500, 12).unwrap().values);
        assert!(sample(&t, 0, 1).is_err());
    }
}
