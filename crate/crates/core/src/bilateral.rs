//! Bilateral gamma density by direct quadrature.
//!
//! With `beta_plus = beta_minus = 0` the law is `mu + G+ - G-` for
//! independent `G± ~ Gamma(alpha±, rate lambda±)`. Its characteristic
//! function decays only like `|xi|^-(alpha+ + alpha-)`, far too slowly for a
//! truncated Fourier inversion, so the density is computed from the
//! convolution instead. For `z = x - mu > 0`,
//!
//! `f = c+ c- e^{-lambda+ z} z^{a-1} int_0^inf t^{alpha- - 1} (1+t)^{alpha+ - 1} e^{-s t} dt`
//!
//! with `a = alpha+ + alpha-`, `s = (lambda+ + lambda-) z` and
//! `c± = lambda±^alpha± / Gamma(alpha±)`; `z < 0` mirrors it. The integral is
//! evaluated by the trapezoid rule after `t = exp(w - exp(-w))`, which has
//! uniform resolution in `ln t` for large `t` and decays double
//! exponentially as `t -> 0`.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::params::GtsParams;
use crate::special::ln_gamma;

/// Step of the trapezoid rule in `w`.
const STEP: f64 = 0.125;
/// Node range in `w`.
const W_MIN: f64 = -5.0;
const W_MAX: f64 = 40.0;
/// Nodes past `s t = CUTOFF` contribute below `e^-CUTOFF` relative.
const CUTOFF: f64 = 80.0;

/// `ln t`, `ln(1 + t)`, `t` and `ln(h dt/dw / t)` at each node.
struct Node {
    ln_t: f64,
    ln1p_t: f64,
    t: f64,
    ln_w: f64,
}

fn nodes() -> &'static [Node] {
    static NODES: OnceLock<Vec<Node>> = OnceLock::new();
    NODES.get_or_init(|| {
        let n = ((W_MAX - W_MIN) / STEP).round() as usize;
        (0..=n)
            .map(|k| {
                let w = W_MIN + k as f64 * STEP;
                let e = (-w).exp();
                let ln_t = w - e;
                let t = ln_t.exp();
                Node {
                    ln_t,
                    ln1p_t: t.ln_1p(),
                    t,
                    ln_w: (STEP * (1.0 + e)).ln(),
                }
            })
            .collect()
    })
}

/// One side of the density, `z` measured away from `mu`.
#[derive(Debug, Clone)]
struct Side {
    /// Tempering of the exponential factor.
    lambda: f64,
    c: f64,
    d: f64,
    /// `c ln t + (d - 1) ln(1 + t) + ln w` per node.
    base: Vec<f64>,
    /// `c ln t + ln w` per node.
    base_scaled: Vec<f64>,
}

impl Side {
    fn new(c: f64, d: f64, lambda: f64) -> Self {
        let base = nodes()
            .iter()
            .map(|n| c * n.ln_t + (d - 1.0) * n.ln1p_t + n.ln_w)
            .collect();
        let base_scaled = nodes().iter().map(|n| c * n.ln_t + n.ln_w).collect();
        Self {
            lambda,
            c,
            d,
            base,
            base_scaled,
        }
    }

    /// `ln int_0^inf t^{c-1} (1+t)^{d-1} e^{-s t} dt`. For `s > 1` the mass
    /// sits near `t = 1/s`, so the rule is applied to `tau = s t` instead.
    fn ln_integral(&self, s: f64, scratch: &mut Vec<f64>) -> f64 {
        scratch.clear();
        if s <= 1.0 {
            for (b, n) in self.base.iter().zip(nodes()) {
                let st = s * n.t;
                scratch.push(b - st);
                if st > CUTOFF {
                    break;
                }
            }
        } else {
            let inv = 1.0 / s;
            for (b, n) in self.base_scaled.iter().zip(nodes()) {
                scratch.push(b + (self.d - 1.0) * (n.t * inv).ln_1p() - n.t);
                if n.t > CUTOFF {
                    break;
                }
            }
        }
        let shift = if s <= 1.0 { 0.0 } else { -self.c * s.ln() };
        let top = scratch.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        shift + top + scratch.iter().map(|v| (v - top).exp()).sum::<f64>().ln()
    }
}

/// Density of a bilateral gamma law with its parameter-only work done once.
#[derive(Debug, Clone)]
pub struct BilateralGamma {
    mu: f64,
    /// `ln(c+ c-)`.
    ln_norm: f64,
    /// `a - 1`.
    shape: f64,
    /// `lambda+ + lambda-`.
    rate: f64,
    plus: Side,
    minus: Side,
    /// Density at `mu`, infinite when `a <= 1`.
    ln_peak: f64,
}

/// Whether `p` has both stability indices at zero.
pub fn is_bilateral_gamma(p: &GtsParams) -> bool {
    p.beta_plus == 0.0 && p.beta_minus == 0.0
}

impl BilateralGamma {
    pub fn new(p: &GtsParams) -> Result<Self> {
        if !is_bilateral_gamma(p) {
            return Err(Error::Domain("bilateral gamma density needs beta_plus = beta_minus = 0".into()));
        }
        let (ap, am, lp, lm) = (p.alpha_plus, p.alpha_minus, p.lambda_plus, p.lambda_minus);
        let ln_norm = ap * lp.ln() + am * lm.ln() - ln_gamma(ap) - ln_gamma(am);
        let a = ap + am;
        let rate = lp + lm;
        let ln_peak = if a > 1.0 {
            ln_norm + ln_gamma(a - 1.0) - (a - 1.0) * rate.ln()
        } else {
            f64::INFINITY
        };
        Ok(Self {
            mu: p.mu,
            ln_norm,
            shape: a - 1.0,
            rate,
            plus: Side::new(am, ap, lp),
            minus: Side::new(ap, am, lm),
            ln_peak,
        })
    }

    fn ln_pdf_with(&self, x: f64, scratch: &mut Vec<f64>) -> f64 {
        let z = x - self.mu;
        if z == 0.0 {
            return self.ln_peak;
        }
        let side = if z > 0.0 { &self.plus } else { &self.minus };
        let w = z.abs();
        self.ln_norm - side.lambda * w + self.shape * w.ln() + side.ln_integral(self.rate * w, scratch)
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        self.ln_pdf_with(x, &mut Vec::with_capacity(self.plus.base.len()))
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    /// `sum ln f(x)` in the order given.
    pub fn sum_ln_pdf(&self, xs: &[f64]) -> f64 {
        let mut scratch = Vec::with_capacity(self.plus.base.len());
        xs.iter().map(|&x| self.ln_pdf_with(x, &mut scratch)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_grid, pdf_table, GridConfig};

    fn bg(mu: f64, ap: f64, am: f64, lp: f64, lm: f64) -> GtsParams {
        GtsParams::new(mu, 0.0, 0.0, ap, am, lp, lm).unwrap()
    }

    #[test]
    fn unit_shapes_give_the_asymmetric_laplace() {
        let (lp, lm) = (0.7, 1.9);
        let d = BilateralGamma::new(&bg(0.3, 1.0, 1.0, lp, lm)).unwrap();
        let c = lp * lm / (lp + lm);
        for z in [-300.0, -20.0, -3.0, -0.5, -1e-9, 0.0, 1e-9, 0.1, 0.6, 2.0, 15.0, 60.0, 500.0] {
            let exact = if z >= 0.0 { c * (-lp * z).exp() } else { c * (lm * z).exp() };
            let got = d.pdf(0.3 + z);
            assert!((got - exact).abs() <= 1e-13 * exact, "z={z} {got} {exact}");
        }
    }

    #[test]
    fn agrees_with_fourier_inversion_for_fast_decay() {
        // shapes large enough that the characteristic function decays fast
        let p = bg(-0.4, 2.5, 3.5, 1.3, 0.8);
        let d = BilateralGamma::new(&p).unwrap();
        let t = pdf_table(&p, &build_grid(&p, &GridConfig::default()).unwrap()).unwrap();
        let worst = t
            .grid
            .xs()
            .zip(&t.values)
            .step_by(37)
            .map(|(x, f)| (d.pdf(x) - f).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn integrates_to_one_with_a_cusp() {
        let p = bg(0.0, 0.4, 0.45, 0.4, 0.3);
        let d = BilateralGamma::new(&p).unwrap();
        assert!(d.pdf(0.0).is_infinite());
        // substitute z = w^k on each side to flatten the z^{a-1} singularity
        let k = 8.0;
        let n = 20000;
        let w_max = 200f64.powf(1.0 / k);
        let h = w_max / n as f64;
        let mut mass = 0.0;
        for i in 0..n {
            let w = (i as f64 + 0.5) * h;
            let z = w.powf(k);
            let jac = k * w.powf(k - 1.0);
            mass += h * jac * (d.pdf(z) + d.pdf(-z));
        }
        assert!((mass - 1.0).abs() < 1e-6, "{mass}");
    }

    #[test]
    fn rejects_nonzero_beta() {
        assert!(BilateralGamma::new(&GtsParams::bitcoin()).is_err());
    }
}
