//! Goodness-of-fit statistics against a tabulated CDF.

use crate::error::{Error, Result};
use crate::quantile::quantile;
use crate::returns::ReturnSeries;
use crate::special::chi2_sf;
use crate::spectral::CdfTable;

/// Fewest observations for any of the statistics.
pub const MIN_GOF_OBS: usize = 20;
/// Numerator of the asymptotic 5% Kolmogorov–Smirnov critical value.
pub const KS_CRITICAL_5PCT: f64 = 1.358;
/// Smallest expected count per chi-squared bin.
pub const MIN_EXPECTED: f64 = 5.0;
/// `F(x)` must lie in `(AD_EPS, 1 - AD_EPS)` for the Anderson–Darling sum.
pub const AD_EPS: f64 = 1e-12;

fn check_len(n: usize) -> Result<()> {
    if n < MIN_GOF_OBS {
        return Err(Error::TooShort {
            needed: MIN_GOF_OBS,
            got: n,
        });
    }
    Ok(())
}

fn sorted_cdf(observed: &ReturnSeries, table: &CdfTable) -> Vec<f64> {
    observed
        .sorted()
        .iter()
        .map(|&x| table.eval(x).clamp(0.0, 1.0))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub stat: f64,
    pub critical_5pct: f64,
}

/// `D_n = sup |F_n - F|`, with the 5% critical value `1.358 / sqrt(n)`.
pub fn gof_ks(observed: &ReturnSeries, table: &CdfTable) -> Result<KsResult> {
    let n = observed.len();
    check_len(n)?;
    let nf = n as f64;
    let stat = sorted_cdf(observed, table)
        .iter()
        .enumerate()
        .map(|(i, &f)| ((i + 1) as f64 / nf - f).max(f - i as f64 / nf))
        .fold(0.0, f64::max);
    Ok(KsResult {
        stat,
        critical_5pct: KS_CRITICAL_5PCT / nf.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chi2Result {
    pub stat: f64,
    pub df: usize,
    pub pvalue: f64,
}

/// Pearson's statistic over `bins` equiprobable cells of the reference law.
/// `n_fitted` is the number of parameters estimated from these same data
/// (zero for an external reference); it is subtracted from the degrees of
/// freedom.
pub fn gof_chi2(observed: &ReturnSeries, table: &CdfTable, bins: usize, n_fitted: usize) -> Result<Chi2Result> {
    let n = observed.len();
    check_len(n)?;
    if bins < 2 {
        return Err(Error::Domain(format!("need at least 2 bins, got {bins}")));
    }
    let expected = n as f64 / bins as f64;
    if expected < MIN_EXPECTED {
        return Err(Error::BinUnderflow { expected });
    }
    let df = bins
        .checked_sub(1 + n_fitted)
        .filter(|&d| d >= 1)
        .ok_or_else(|| Error::Domain(format!("{bins} bins leave no degrees of freedom for {n_fitted} fitted parameters")))?;
    let edges: Vec<f64> = (1..bins)
        .map(|j| quantile(table, j as f64 / bins as f64))
        .collect::<Result<_>>()?;
    let mut counts = vec![0usize; bins];
    for x in &observed.values {
        counts[edges.partition_point(|e| e <= x)] += 1;
    }
    let stat = counts
        .iter()
        .map(|&o| (o as f64 - expected).powi(2) / expected)
        .sum::<f64>();
    Ok(Chi2Result {
        stat,
        df,
        pvalue: chi2_sf(stat, df as f64),
    })
}

/// Anderson–Darling `A^2`; statistic only.
pub fn gof_ad(observed: &ReturnSeries, table: &CdfTable) -> Result<f64> {
    let n = observed.len();
    check_len(n)?;
    let f = sorted_cdf(observed, table);
    if let Some(index) = f.iter().position(|&v| !(v > AD_EPS && v < 1.0 - AD_EPS)) {
        return Err(Error::BoundaryObservation { index });
    }
    let nf = n as f64;
    let s: f64 = (0..n)
        .map(|k| (2 * k + 1) as f64 * (f[k].ln() + (-f[n - 1 - k]).ln_1p()))
        .sum();
    Ok(-nf - s / nf)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GofReport {
    pub ks_stat: f64,
    pub ks_critical_5pct: f64,
    pub ad_stat: f64,
    pub chi2_stat: f64,
    pub chi2_df: usize,
    pub chi2_pvalue: f64,
    pub n: usize,
}

/// All three statistics at once.
pub fn gof_report(observed: &ReturnSeries, table: &CdfTable, bins: usize, n_fitted: usize) -> Result<GofReport> {
    let ks = gof_ks(observed, table)?;
    let chi2 = gof_chi2(observed, table, bins, n_fitted)?;
    let ad = gof_ad(observed, table)?;
    Ok(GofReport {
        ks_stat: ks.stat,
        ks_critical_5pct: ks.critical_5pct,
        ad_stat: ad,
        chi2_stat: chi2.stat,
        chi2_df: chi2.df,
        chi2_pvalue: chi2.pvalue,
        n: observed.len(),
    })
}
