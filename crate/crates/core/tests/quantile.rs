use gts_core::quantile::quantile_query;
use gts_core::*;

fn table(p: &GtsParams) -> CdfTable {
    cdf_table(p, &build_grid(p, &GridConfig::default()).unwrap()).unwrap()
}

/// Linear interpolation of the tabulated cdf.
fn linear_quantile(t: &CdfTable, alpha: f64) -> f64 {
    let i = t.values.partition_point(|&f| f <= alpha) - 1;
    let (f0, f1) = (t.values[i], t.values[i + 1]);
    t.grid.x(i) + (alpha - f0) / (f1 - f0) * t.grid.dx
}

#[test]
fn quantiles_increase_with_the_level() {
    for p in [GtsParams::bitcoin(), GtsParams::ethereum()] {
        let t = table(&p);
        let qs: Vec<f64> = (1..1000).map(|k| quantile(&t, k as f64 / 1000.0).unwrap()).collect();
        assert!(qs.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn quartic_beats_linear_interpolation() {
    let t = table(&GtsParams::bitcoin());
    let levels: Vec<f64> = (1..=200).map(|k| 0.0005 + 0.999 * k as f64 / 201.0).collect();
    let mut better = 0;
    for &a in &levels {
        let q = quantile_query(&t, a).unwrap();
        let lin = linear_quantile(&t, a);
        assert!((q.x_alpha - lin).abs() <= t.grid.dx, "alpha={a}");
        if (t.eval(q.x_alpha) - a).abs() < (t.eval(lin) - a).abs() {
            better += 1;
        }
    }
    assert!(better as f64 >= 0.95 * levels.len() as f64, "{better}");
}

#[test]
fn lower_quantile_matches_bisection_on_the_oracle() {
    let p = GtsParams::bitcoin();
    let q = quantile(&table(&p), 0.001).unwrap();
    let (k1, sd) = levy::mean_sd(&p);
    let (mut lo, mut hi) = (k1 - 15.0 * sd, k1);
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if direct_quadrature_oracle(&p, mid).unwrap().1 < 0.001 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((q - 0.5 * (lo + hi)).abs() <= 1e-6, "{q} {lo}");
}

#[test]
fn samples_pass_ks_at_one_percent() {
    let t = table(&GtsParams::bitcoin());
    let n = 100_000;
    let critical = 1.628 / (n as f64).sqrt();
    for seed in 1..=10 {
        let ks = gof_ks(&sample(&t, n, seed).unwrap(), &t).unwrap();
        assert!(ks.stat < critical, "seed {seed}: {}", ks.stat);
    }
}

#[test]
fn sample_moments_match_cumulants() {
    let p = GtsParams::bitcoin();
    let n = 100_000;
    let data = sample(&table(&p), n, 99).unwrap();
    let k1 = cumulant(&p, 1).unwrap();
    let k2 = cumulant(&p, 2).unwrap();
    let s = summary_stats(&data).unwrap();
    assert!((s.mean - k1).abs() <= 4.0 * (k2 / n as f64).sqrt(), "{} {k1}", s.mean);
    assert!((s.sd * s.sd / k2 - 1.0).abs() <= 0.05, "{} {k2}", s.sd * s.sd);
}
