//! Quantile–quantile comparison against a Normal or GTS reference, and a
//! tail-shape verdict read off the extreme points.

use std::fmt;

use crate::error::{Error, Result};
use crate::params::GtsParams;
use crate::quantile::sample_from_uniforms;
use crate::returns::ReturnSeries;
use crate::special::normal_quantile;
use crate::spectral::CdfTable;

/// Fewest observations for a Q–Q comparison.
pub const MIN_QQ_OBS: usize = 20;
/// Fewest observations for a tail verdict (five per decile).
pub const MIN_VERDICT_OBS: usize = 50;
/// Default multiplier in `tau = scale * sd * n^{-1/4}`.
pub const DEFAULT_TAU_SCALE: f64 = 0.5;
/// Share of points at each end that enters the tail averages.
pub const TAIL_SHARE: f64 = 0.01;

/// The theoretical law on the horizontal axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    Normal { mean: f64, sd: f64 },
    Gts(GtsParams),
}

impl fmt::Display for Reference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reference::Normal { mean, sd } => write!(f, "normal(mean={mean}, sd={sd})"),
            Reference::Gts(p) => write!(f, "gts({p})"),
        }
    }
}

/// Paired quantiles at common plotting positions.
#[derive(Debug, Clone, PartialEq)]
pub struct QQData {
    /// `(theoretical, observed)`, both nondecreasing.
    pub points: Vec<(f64, f64)>,
    pub reference: Reference,
    pub levels: Vec<f64>,
}

impl QQData {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Hazen positions `(k - 1/2) / n`, `k = 1..=n`.
pub fn plotting_positions(n: usize) -> Vec<f64> {
    (1..=n).map(|k| (k as f64 - 0.5) / n as f64).collect()
}

/// Order statistics of `observed` against `quantiles(levels)` at the Hazen
/// positions.
pub fn qq_points<F>(observed: &ReturnSeries, reference: Reference, quantiles: F) -> Result<QQData>
where
    F: FnOnce(&[f64]) -> Result<Vec<f64>>,
{
    let n = observed.len();
    if n < MIN_QQ_OBS {
        return Err(Error::TooShort {
            needed: MIN_QQ_OBS,
            got: n,
        });
    }
    let levels = plotting_positions(n);
    let theoretical = quantiles(&levels)?;
    if theoretical.len() != n {
        return Err(Error::Size(theoretical.len()));
    }
    let points = theoretical.into_iter().zip(observed.sorted()).collect();
    Ok(QQData {
        points,
        reference,
        levels,
    })
}

/// Against a Normal law with the given moments.
pub fn qq_normal_with(observed: &ReturnSeries, mean: f64, sd: f64) -> Result<QQData> {
    qq_points(observed, Reference::Normal { mean, sd }, |levels| {
        levels.iter().map(|&p| normal_quantile(mean, sd, p)).collect()
    })
}

/// Against the Normal law with the sample mean and sample standard deviation.
pub fn qq_normal(observed: &ReturnSeries) -> Result<QQData> {
    let n = observed.len();
    if n < MIN_QQ_OBS {
        return Err(Error::TooShort {
            needed: MIN_QQ_OBS,
            got: n,
        });
    }
    // sorted first so the moments do not depend on the input order
    let (mean, sd) = mean_sd(&observed.sorted());
    if !(sd > 0.0) {
        return Err(Error::DegenerateData);
    }
    qq_normal_with(observed, mean, sd)
}

/// Against a GTS law tabulated in `table`.
pub fn qq_gts(observed: &ReturnSeries, params: &GtsParams, table: &CdfTable) -> Result<QQData> {
    qq_points(observed, Reference::Gts(*params), |levels| {
        sample_from_uniforms(table, levels)
    })
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailComparison {
    Heavier,
    Lighter,
    Comparable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// One tail heavier, the other lighter.
    SShaped,
    LongTailed,
    ShortTailed,
    Linear,
}

impl fmt::Display for TailComparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TailComparison::Heavier => "heavier",
            TailComparison::Lighter => "lighter",
            TailComparison::Comparable => "comparable",
        })
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shape::SShaped => "s-shaped",
            Shape::LongTailed => "long-tailed",
            Shape::ShortTailed => "short-tailed",
            Shape::Linear => "linear",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailVerdict {
    pub lower: TailComparison,
    pub upper: TailComparison,
    pub shape: Shape,
    /// Mean of `observed - theoretical` over the lowest points.
    pub lower_deviation: f64,
    /// Same over the highest points.
    pub upper_deviation: f64,
    pub tau: f64,
}

/// Classifies each tail by the mean signed deviation over its extreme 1% of
/// points, against `tau = tau_scale * sd(observed) * n^{-1/4}`.
pub fn tail_verdict_with(q: &QQData, tau_scale: f64) -> Result<TailVerdict> {
    let n = q.len();
    if n < MIN_VERDICT_OBS {
        return Err(Error::TooShort {
            needed: MIN_VERDICT_OBS,
            got: n,
        });
    }
    let observed: Vec<f64> = q.points.iter().map(|p| p.1).collect();
    let (_, sd) = mean_sd(&observed);
    let tau = tau_scale * sd * (n as f64).powf(-0.25);
    let k = ((TAIL_SHARE * n as f64).ceil() as usize).max(1);
    let dev = |pts: &[(f64, f64)]| pts.iter().map(|(t, o)| o - t).sum::<f64>() / pts.len() as f64;
    let lower_deviation = dev(&q.points[..k]);
    let upper_deviation = dev(&q.points[n - k..]);

    let lower = if lower_deviation < -tau {
        TailComparison::Heavier
    } else if lower_deviation > tau {
        TailComparison::Lighter
    } else {
        TailComparison::Comparable
    };
    let upper = if upper_deviation > tau {
        TailComparison::Heavier
    } else if upper_deviation < -tau {
        TailComparison::Lighter
    } else {
        TailComparison::Comparable
    };
    use TailComparison::*;
    let shape = match (lower, upper) {
        (Comparable, Comparable) => Shape::Linear,
        (Heavier, Lighter) | (Lighter, Heavier) => Shape::SShaped,
        (Heavier, _) | (_, Heavier) => Shape::LongTailed,
        _ => Shape::ShortTailed,
    };
    Ok(TailVerdict {
        lower,
        upper,
        shape,
        lower_deviation,
        upper_deviation,
        tau,
    })
}

pub fn tail_verdict(q: &QQData) -> Result<TailVerdict> {
    tail_verdict_with(q, DEFAULT_TAU_SCALE)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(v: Vec<f64>) -> ReturnSeries {
        ReturnSeries::new(v, "t").unwrap()
    }

    #[test]
    fn exact_normal_quantiles_lie_on_the_diagonal() {
        let n = 200;
        let obs: Vec<f64> = plotting_positions(n)
            .iter()
            .map(|&p| normal_quantile(1.0, 2.0, p).unwrap())
            .collect();
        let q = qq_normal_with(&series(obs), 1.0, 2.0).unwrap();
        assert!(q.points.iter().all(|(t, o)| t == o));
        let v = tail_verdict(&q).unwrap();
        assert_eq!((v.lower, v.upper, v.shape), (TailComparison::Comparable, TailComparison::Comparable, Shape::Linear));
    }

    #[test]
    fn too_short() {
        assert!(matches!(
            qq_normal(&series(vec![1.0, 2.0, 3.0])),
            Err(Error::TooShort { needed: 20, got: 3 })
        ));
        let q = qq_normal(&series((0..30).map(|i| i as f64).collect())).unwrap();
        assert!(matches!(tail_verdict(&q), Err(Error::TooShort { .. })));
    }

    #[test]
    fn order_and_permutation() {
        let v: Vec<f64> = (0..100).map(|i| ((i * 7919) % 101) as f64).collect();
        let mut w = v.clone();
        w.reverse();
        let a = qq_normal(&series(v)).unwrap();
        let b = qq_normal(&series(w)).unwrap();
        assert_eq!(a, b);
        assert!(a.points.windows(2).all(|p| p[0].0 <= p[1].0 && p[0].1 <= p[1].1));
        assert!(a.levels.iter().all(|&l| l > 0.0 && l < 1.0));
    }

    #[test]
    fn stretched_tails_are_heavier() {
        let n = 400;
        let levels = plotting_positions(n);
        let obs: Vec<f64> = levels
            .iter()
            .map(|&p| {
                let z = normal_quantile(0.0, 1.0, p).unwrap();
                z * (1.0 + 0.3 * z * z)
            })
            .collect();
        let q = qq_normal_with(&series(obs.clone()), 0.0, 1.0).unwrap();
        let v = tail_verdict(&q).unwrap();
        assert_eq!((v.lower, v.upper, v.shape), (TailComparison::Heavier, TailComparison::Heavier, Shape::LongTailed));
        // compressed tails flip both sides
        let short: Vec<f64> = levels.iter().map(|&p| normal_quantile(0.0, 1.0, p).unwrap().tanh()).collect();
        let q = qq_normal_with(&series(short), 0.0, 1.0).unwrap();
        let v = tail_verdict(&q).unwrap();
        assert_eq!((v.lower, v.upper, v.shape), (TailComparison::Lighter, TailComparison::Lighter, Shape::ShortTailed));
        // affine maps of both axes keep the verdict
        let mapped: Vec<f64> = obs.iter().map(|x| 3.0 * x - 2.0).collect();
        let q = qq_normal_with(&series(mapped), -2.0, 3.0).unwrap();
        let w = tail_verdict(&q).unwrap();
        assert_eq!((w.lower, w.upper), (TailComparison::Heavier, TailComparison::Heavier));
    }

    #[test]
    fn skewed_departure_is_s_shaped() {
        let n = 400;
        let obs: Vec<f64> = plotting_positions(n)
            .iter()
            .map(|&p| {
                let z = normal_quantile(0.0, 1.0, p).unwrap();
                z - 0.2 * z * z
            })
            .collect();
        let q = qq_normal_with(&series(obs), 0.0, 1.0).unwrap();
        let v = tail_verdict(&q).unwrap();
        assert_eq!((v.lower, v.upper, v.shape), (TailComparison::Heavier, TailComparison::Lighter, Shape::SShaped));
    }
}
