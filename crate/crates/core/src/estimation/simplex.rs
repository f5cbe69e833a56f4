//! Nelder–Mead downhill simplex.

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Stop once `f(worst) - f(best)` falls to this.
    pub f_tol: f64,
    pub max_evals: usize,
    /// Edge length of the starting simplex along each axis.
    pub initial_step: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            f_tol: 1e-8,
            max_evals: 4000,
            initial_step: 0.25,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0`. Non-finite objective values are treated as
/// `+inf`, which lets the caller encode infeasible points.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], opts: &SimplexOptions) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += opts.initial_step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| eval(p, &mut evals)).collect();

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut converged = false;
    while evals < opts.max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        if vals[n].is_finite() && vals[n] - vals[0] <= opts.f_tol {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; n];
        for p in &pts[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&pts[n])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };

        let xr = along(-alpha);
        let fr = eval(&xr, &mut evals);
        if fr < vals[0] {
            let xe = along(-gamma);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[n] {
            let xc = along(-rho);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = along(rho);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < vals[n].min(fr) {
            pts[n] = xc;
            vals[n] = fc;
            continue;
        }
        // shrink toward the best vertex
        let best = pts[0].clone();
        for i in 1..=n {
            for (x, b) in pts[i].iter_mut().zip(&best) {
                *x = b + sigma * (*x - b);
            }
            vals[i] = eval(&pts[i], &mut evals);
        }
    }
    let best = (0..=n)
        .min_by(|&a, &b| vals[a].total_cmp(&vals[b]))
        .unwrap_or(0);
    SimplexResult {
        x: pts[best].clone(),
        f: vals[best],
        evals,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_rosenbrock() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = SimplexOptions {
            f_tol: 1e-14,
            max_evals: 5000,
            initial_step: 0.5,
        };
        let r = nelder_mead(rosen, &[-1.2, 1.0], &opts);
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-3 && (r.x[1] - 1.0).abs() < 1e-3, "{:?}", r.x);
    }

    #[test]
    fn respects_infeasible_region() {
        // minimum of the unconstrained quadratic sits in the infeasible half-plane
        let f = |x: &[f64]| {
            if x[0] < 0.0 {
                f64::INFINITY
            } else {
                (x[0] + 1.0).powi(2) + (x[1] - 2.0).powi(2)
            }
        };
        let r = nelder_mead(f, &[1.0, 0.0], &SimplexOptions::default());
        assert!(r.x[0] >= 0.0);
        assert!(r.f.is_finite() && r.f < f(&[1.0, 0.0]));
    }

    #[test]
    fn eval_budget_is_honored() {
        let r = nelder_mead(|x| x.iter().map(|v| v * v).sum(), &[5.0; 6], &SimplexOptions {
            f_tol: 0.0,
            max_evals: 50,
            initial_step: 1.0,
        });
        assert!(!r.converged);
        assert!(r.evals <= 50 + 8);
    }
}
