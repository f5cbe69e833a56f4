//! Interpolation on uniform grids.

/// First node of the five-point stencil used for the interval `[i, i+1]` of an
/// `m`-point grid: `i-2..=i+2`, shifted inward at the edges.
pub fn stencil_start(i: usize, m: usize) -> usize {
    debug_assert!(m >= 5);
    i.saturating_sub(2).min(m - 5)
}

/// Power-basis coefficients `c[0] + c[1] y + ... + c[4] y^4` of the quartic
/// through `(offset + k, values[k])`, `k = 0..5`.
pub fn lagrange5(values: [f64; 5], offset: f64) -> [f64; 5] {
    // Newton divided differences on unit-spaced nodes
    let mut d = values;
    for level in 1..5 {
        for k in (level..5).rev() {
            d[k] = (d[k] - d[k - 1]) / level as f64;
        }
    }
    // expand d0 + d1 (y-t0) + d2 (y-t0)(y-t1) + ... by Horner from the top
    let nodes: [f64; 5] = std::array::from_fn(|k| offset + k as f64);
    let mut c = [0.0; 5];
    c[0] = d[4];
    for k in (0..4).rev() {
        // c <- c * (y - nodes[k]) + d[k]
        let t = nodes[k];
        for deg in (1..5).rev() {
            c[deg] = c[deg - 1] - t * c[deg];
        }
        c[0] = -t * c[0] + d[k];
    }
    c
}

pub fn poly_eval(c: &[f64; 5], y: f64) -> f64 {
    (((c[4] * y + c[3]) * y + c[2]) * y + c[1]) * y + c[0]
}

pub fn poly_deriv(c: &[f64; 5], y: f64) -> f64 {
    ((4.0 * c[4] * y + 3.0 * c[3]) * y + 2.0 * c[2]) * y + c[1]
}

/// Evaluates the five-point Lagrange interpolant of uniformly sampled values.
/// Outside the sampled range the end values are returned.
pub fn lagrange5_eval(x0: f64, dx: f64, values: &[f64], x: f64) -> f64 {
    let m = values.len();
    let t = (x - x0) / dx;
    if t <= 0.0 {
        return values[0];
    }
    if t >= (m - 1) as f64 {
        return values[m - 1];
    }
    let i = (t.floor() as usize).min(m - 2);
    let s = stencil_start(i, m);
    let window: [f64; 5] = std::array::from_fn(|k| values[s + k]);
    let c = lagrange5(window, s as f64 - i as f64);
    poly_eval(&c, t - i as f64)
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson slopes) on
/// a uniform grid.
#[derive(Debug, Clone)]
pub struct Pchip {
    x0: f64,
    dx: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl Pchip {
    pub fn new(x0: f64, dx: f64, values: Vec<f64>) -> Self {
        let m = values.len();
        assert!(m >= 2, "need at least two samples");
        let secants: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]) / dx).collect();
        let mut slopes = vec![0.0; m];
        for j in 1..m - 1 {
            let (a, b) = (secants[j - 1], secants[j]);
            // harmonic mean when the secants agree in sign, else flat
            slopes[j] = if a * b > 0.0 { 2.0 * a * b / (a + b) } else { 0.0 };
        }
        slopes[0] = end_slope(secants[0], secants.get(1).copied().unwrap_or(secants[0]));
        slopes[m - 1] = end_slope(
            secants[m - 2],
            if m > 2 { secants[m - 3] } else { secants[m - 2] },
        );
        Self {
            x0,
            dx,
            values,
            slopes,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let m = self.values.len();
        let t = (x - self.x0) / self.dx;
        if t <= 0.0 {
            return self.values[0];
        }
        if t >= (m - 1) as f64 {
            return self.values[m - 1];
        }
        let i = (t.floor() as usize).min(m - 2);
        let s = t - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.slopes[i] * self.dx, self.slopes[i + 1] * self.dx);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * d1
    }
}

fn end_slope(near: f64, far: f64) -> f64 {
    // one-sided three-point estimate, limited to preserve shape
    let d = 1.5 * near - 0.5 * far;
    if d * near <= 0.0 {
        0.0
    } else if near * far <= 0.0 && d.abs() > 3.0 * near.abs() {
        3.0 * near
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lagrange_reproduces_quartics() {
        let f = |y: f64| 0.3 - 1.2 * y + 0.5 * y * y + 0.01 * y.powi(3) - 0.07 * y.powi(4);
        for offset in [-4.0, -3.0, -2.0, -1.0, 0.0] {
            let vals: [f64; 5] = std::array::from_fn(|k| f(offset + k as f64));
            let c = lagrange5(vals, offset);
            let want = [0.3, -1.2, 0.5, 0.01, -0.07];
            for (a, b) in c.iter().zip(want) {
                assert!((a - b).abs() < 1e-12, "{c:?}");
            }
            assert!((poly_deriv(&c, 0.3) - (-1.2 + 0.3 + 0.03 * 0.09 - 0.28 * 0.027)).abs() < 1e-12);
        }
    }

    #[test]
    fn lagrange_eval_hits_nodes() {
        let vals: Vec<f64> = (0..20).map(|j| (j as f64 * 0.1).sin()).collect();
        for (j, v) in vals.iter().enumerate() {
            assert!((lagrange5_eval(1.0, 0.5, &vals, 1.0 + 0.5 * j as f64) - v).abs() < 1e-14);
        }
        assert_eq!(lagrange5_eval(1.0, 0.5, &vals, -3.0), vals[0]);
    }

    #[test]
    fn pchip_is_monotone_and_interpolating() {
        let vals = vec![0.0, 0.0, 0.1, 0.9, 1.0, 1.0];
        let p = Pchip::new(0.0, 1.0, vals.clone());
        let mut prev = -1.0;
        for k in 0..=500 {
            let v = p.eval(k as f64 * 0.01);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
        for (j, v) in vals.iter().enumerate() {
            assert_eq!(p.eval(j as f64), *v);
        }
    }
}
