//! Slow pointwise inversion by adaptive Gauss–Kronrod quadrature.
//!
//! Independent of the grid/transform path: it picks its own frequency cutoff
//! and panels, and evaluates the same two inversion integrals directly. Meant
//! for verification, not production use (tens of milliseconds per point).

use std::f64::consts::PI;

use super::grid::frequency_cutoff;
use crate::error::{Error, Result};
use crate::levy::{characteristic_exponent, cumulant};
use crate::params::GtsParams;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 40;

/// Target absolute tolerance of each integral.
pub const ORACLE_TOL: f64 = 1e-10;

/// Integrand pair at frequency `xi > 0`: `(Re[cf e^{-i xi x}], Im[cf e^{-i xi x}] / xi)`.
fn integrands(p: &GtsParams, x: f64, xi: f64) -> (f64, f64) {
    let z = characteristic_exponent(p, xi);
    let modulus = z.re.exp();
    let phase = z.im - xi * x;
    let (s, c) = phase.sin_cos();
    (modulus * c, modulus * s / xi)
}

fn gk15(p: &GtsParams, x: f64, a: f64, b: f64) -> ((f64, f64), f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = integrands(p, x, center);
    let mut kron = (WGK[7] * fc.0, WGK[7] * fc.1);
    let mut gauss = (WG[3] * fc.0, WG[3] * fc.1);
    for k in 0..7 {
        let dx = half * XGK[k];
        let f1 = integrands(p, x, center - dx);
        let f2 = integrands(p, x, center + dx);
        kron.0 += WGK[k] * (f1.0 + f2.0);
        kron.1 += WGK[k] * (f1.1 + f2.1);
        if k % 2 == 1 {
            gauss.0 += WG[k / 2] * (f1.0 + f2.0);
            gauss.1 += WG[k / 2] * (f1.1 + f2.1);
        }
    }
    let err = ((kron.0 - gauss.0).abs()).max((kron.1 - gauss.1).abs()) * half;
    ((kron.0 * half, kron.1 * half), err)
}

fn adaptive(p: &GtsParams, x: f64, a: f64, b: f64, tol: f64, depth: u32) -> Result<(f64, f64)> {
    let (val, err) = gk15(p, x, a, b);
    // the relative floor stops refinement once the estimate is pure roundoff
    if err <= tol || err <= 1e-14 * (val.0.abs() + val.1.abs()) {
        return Ok(val);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::ConvergenceFailure(format!(
            "panel [{a}, {b}] still has error {err:e} at depth {depth}"
        )));
    }
    let mid = 0.5 * (a + b);
    let l = adaptive(p, x, a, mid, 0.5 * tol, depth + 1)?;
    let r = adaptive(p, x, mid, b, 0.5 * tol, depth + 1)?;
    Ok((l.0 + r.0, l.1 + r.1))
}

/// Density and distribution function at a single point.
pub fn direct_quadrature_oracle(p: &GtsParams, x: f64) -> Result<(f64, f64)> {
    // |cf| < 1e-17 beyond the cutoff: both tails are far below tolerance
    let cutoff = frequency_cutoff(p, 1e-17)?;
    let k1 = cumulant(p, 1)?;
    // panels short enough to hold about one oscillation of e^{-i xi x}
    let scale = (x - k1).abs() + p.mu.abs() + 1.0;
    let panel = (PI / scale).min(0.5);
    let n_panels = (cutoff / panel).ceil() as usize;
    let panel = cutoff / n_panels as f64;
    let tol = ORACLE_TOL / n_panels as f64;
    let mut pdf = 0.0;
    let mut gp = 0.0;
    for k in 0..n_panels {
        let a = k as f64 * panel;
        let (re, im) = adaptive(p, x, a, a + panel, tol, 0)?;
        pdf += re;
        gp += im;
    }
    Ok((pdf / PI, 0.5 - gp / PI))
}
