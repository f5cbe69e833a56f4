//! Lévy measure primitives and the closed-form characteristic exponent.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::GtsParams;
use crate::special::gamma;

/// `exp(w) - 1` without cancellation for small `|w|`.
fn expm1_c(w: Complex64) -> Complex64 {
    let (s, c) = w.im.sin_cos();
    let half = (0.5 * w.im).sin();
    Complex64::new(w.re.exp_m1() * c - 2.0 * half * half, w.re.exp() * s)
}

/// One tempered stable leg with its parameter-only factors evaluated once:
/// `alpha * Gamma(-beta) * ((lambda + i*s*lambda)^beta - lambda^beta)`,
/// written as `alpha Gamma(-beta) lambda^beta expm1(beta Log(1 + i s))`.
/// At `beta = 0` this is the limit `-alpha Log(1 + i s)`.
#[derive(Debug, Clone, Copy)]
struct Leg {
    alpha: f64,
    beta: f64,
    inv_lambda: f64,
    scale: f64,
}

impl Leg {
    fn new(alpha: f64, beta: f64, lambda: f64) -> Self {
        let scale = if beta == 0.0 {
            0.0
        } else {
            alpha * gamma(-beta) * lambda.powf(beta)
        };
        Self {
            alpha,
            beta,
            inv_lambda: 1.0 / lambda,
            scale,
        }
    }

    fn eval(&self, s: f64) -> Complex64 {
        let log_z = Complex64::new(0.5 * (s * s).ln_1p(), s.atan());
        if self.beta == 0.0 {
            -self.alpha * log_z
        } else {
            self.scale * expm1_c(self.beta * log_z)
        }
    }
}

/// The characteristic exponent of one parameter set, prepared for
/// evaluation at many frequencies.
#[derive(Debug, Clone, Copy)]
pub struct Exponent {
    mu: f64,
    plus: Leg,
    minus: Leg,
}

impl Exponent {
    pub fn new(p: &GtsParams) -> Self {
        Self {
            mu: p.mu,
            plus: Leg::new(p.alpha_plus, p.beta_plus, p.lambda_plus),
            minus: Leg::new(p.alpha_minus, p.beta_minus, p.lambda_minus),
        }
    }

    pub fn eval(&self, xi: f64) -> Complex64 {
        if xi == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(0.0, self.mu * xi)
            + self.plus.eval(-xi * self.plus.inv_lambda)
            + self.minus.eval(xi * self.minus.inv_lambda)
    }

    pub fn cf(&self, xi: f64) -> Complex64 {
        self.eval(xi).exp()
    }
}

/// The characteristic exponent `psi(xi) = log E[exp(i xi Y)]` on the principal
/// branch.
pub fn characteristic_exponent(p: &GtsParams, xi: f64) -> Complex64 {
    Exponent::new(p).eval(xi)
}

pub fn characteristic_function(p: &GtsParams, xi: f64) -> Complex64 {
    characteristic_exponent(p, xi).exp()
}

/// Density of the Lévy measure at `x != 0`.
pub fn levy_density(p: &GtsParams, x: f64) -> Result<f64> {
    if x == 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!("levy density undefined at x = {x}")));
    }
    let (alpha, beta, lambda) = if x > 0.0 {
        (p.alpha_plus, p.beta_plus, p.lambda_plus)
    } else {
        (p.alpha_minus, p.beta_minus, p.lambda_minus)
    };
    let ax = x.abs();
    Ok(alpha * (-lambda * ax).exp() / ax.powf(1.0 + beta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activity {
    Finite,
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variation {
    Finite,
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathClassification {
    pub activity: Activity,
    pub variation: Variation,
}

/// Classifies one leg `alpha e^{-lambda x} / x^{1+beta}` near the origin.
/// The total mass diverges iff `beta >= 0`, and the first absolute moment on
/// `[-1, 1]` converges iff `beta < 1`. Tempering only matters at infinity,
/// where both integrals converge for `lambda > 0`.
fn leg_classification(alpha: f64, beta: f64) -> (Activity, Variation) {
    if alpha == 0.0 {
        return (Activity::Finite, Variation::Finite);
    }
    let activity = if beta >= 0.0 {
        Activity::Infinite
    } else {
        Activity::Finite
    };
    let variation = if beta < 1.0 {
        Variation::Finite
    } else {
        Variation::Infinite
    };
    (activity, variation)
}

pub fn path_classification(p: &GtsParams) -> PathClassification {
    let (a_plus, v_plus) = leg_classification(p.alpha_plus, p.beta_plus);
    let (a_minus, v_minus) = leg_classification(p.alpha_minus, p.beta_minus);
    let activity = if a_plus == Activity::Infinite || a_minus == Activity::Infinite {
        Activity::Infinite
    } else {
        Activity::Finite
    };
    let variation = if v_plus == Variation::Finite && v_minus == Variation::Finite {
        Variation::Finite
    } else {
        Variation::Infinite
    };
    PathClassification {
        activity,
        variation,
    }
}

/// The `n`-th cumulant, `n` in `1..=4` (higher orders also work).
pub fn cumulant(p: &GtsParams, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("cumulant order must be >= 1".into()));
    }
    let nf = n as f64;
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let plus = p.alpha_plus * gamma(nf - p.beta_plus) * p.lambda_plus.powf(p.beta_plus - nf);
    let minus = p.alpha_minus * gamma(nf - p.beta_minus) * p.lambda_minus.powf(p.beta_minus - nf);
    let drift = if n == 1 { p.mu } else { 0.0 };
    Ok(drift + plus + sign * minus)
}

/// Mean and standard deviation implied by the first two cumulants.
pub fn mean_sd(p: &GtsParams) -> (f64, f64) {
    let k1 = cumulant(p, 1).expect("order 1");
    let k2 = cumulant(p, 2).expect("order 2");
    (k1, k2.sqrt())
}
