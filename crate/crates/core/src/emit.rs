//! Byte-deterministic CSV, SVG and JSON renderings of results.
//!
//! Every real number is written with 17 significant digits; JSON has no
//! representation for non-finite values, so those become `null`.

use std::fmt::Write as _;
use std::io::Write;

use crate::error::Result;
use crate::estimation::{FitResult, NormalFit};
use crate::gof::GofReport;
use crate::levy::{Activity, PathClassification, Variation};
use crate::params::{GtsParams, PARAM_NAMES};
use crate::qq::{QQData, Reference, TailVerdict};

/// `v` with 17 significant digits in scientific notation.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn json_num(v: f64) -> String {
    if v.is_finite() {
        fmt17(v)
    } else {
        "null".into()
    }
}

fn json_str(s: &str) -> String {
    serde_json::Value::String(s.to_owned()).to_string()
}

/// Minimal ordered JSON object writer.
#[derive(Debug, Default)]
struct Obj {
    fields: Vec<(String, String)>,
}

impl Obj {
    fn new() -> Self {
        Self::default()
    }

    fn raw(mut self, key: &str, rendered: String) -> Self {
        self.fields.push((key.to_owned(), rendered));
        self
    }

    fn num(self, key: &str, v: f64) -> Self {
        self.raw(key, json_num(v))
    }

    fn int(self, key: &str, v: usize) -> Self {
        self.raw(key, v.to_string())
    }

    fn flag(self, key: &str, v: bool) -> Self {
        self.raw(key, v.to_string())
    }

    fn text(self, key: &str, v: &str) -> Self {
        self.raw(key, json_str(v))
    }

    fn obj(self, key: &str, v: Obj) -> Self {
        self.raw(key, v.render())
    }

    fn render(&self) -> String {
        if self.fields.is_empty() {
            return "{}".into();
        }
        let mut out = String::from("{\n");
        for (i, (k, v)) in self.fields.iter().enumerate() {
            let v = v.replace('\n', "\n  ");
            let sep = if i + 1 == self.fields.len() { "" } else { "," };
            let _ = writeln!(out, "  {}: {v}{sep}", json_str(k));
        }
        out.push('}');
        out
    }
}

fn named(values: &[f64; 7]) -> Obj {
    PARAM_NAMES
        .iter()
        .zip(values)
        .fold(Obj::new(), |o, (k, &v)| o.num(k, v))
}

fn params_obj(p: &GtsParams) -> Obj {
    named(&p.to_array())
}

fn reference_obj(r: &Reference) -> Obj {
    match r {
        Reference::Normal { mean, sd } => Obj::new().text("law", "normal").num("mean", *mean).num("sd", *sd),
        Reference::Gts(p) => Obj::new().text("law", "gts").obj("params", params_obj(p)),
    }
}

pub fn fit_json(fit: &FitResult, normal: Option<&NormalFit>) -> String {
    let mut o = Obj::new()
        .text("model", &fit.model.to_string())
        .obj("params", params_obj(&fit.params))
        .obj("std_errors", named(&fit.std_errors))
        .obj("z_pvalues", named(&fit.z_pvalues))
        .num("loglik", fit.loglik)
        .num("aic", fit.aic)
        .num("bic", fit.bic)
        .int("n_obs", fit.n_obs)
        .int("n_free", fit.n_free)
        .flag("converged", fit.converged)
        .flag("pseudo_inverse", fit.pseudo_inverse)
        .num("hessian_asymmetry", fit.hessian_asymmetry)
        .int("evaluations", fit.evaluations);
    if let Some(n) = normal {
        o = o.obj(
            "normal",
            Obj::new()
                .num("mean", n.mean)
                .num("sd", n.sd)
                .num("loglik", n.loglik)
                .num("aic", n.aic)
                .num("bic", n.bic),
        );
    }
    o.render() + "\n"
}

pub fn gof_json(r: &GofReport) -> String {
    Obj::new()
        .num("ks_stat", r.ks_stat)
        .num("ks_critical_5pct", r.ks_critical_5pct)
        .num("ad_stat", r.ad_stat)
        .num("chi2_stat", r.chi2_stat)
        .int("chi2_df", r.chi2_df)
        .num("chi2_pvalue", r.chi2_pvalue)
        .int("n", r.n)
        .render()
        + "\n"
}

pub fn verdict_json(v: &TailVerdict, reference: &Reference, n: usize) -> String {
    Obj::new()
        .obj("reference", reference_obj(reference))
        .int("n", n)
        .text("lower", &v.lower.to_string())
        .text("upper", &v.upper.to_string())
        .text("shape", &v.shape.to_string())
        .num("lower_deviation", v.lower_deviation)
        .num("upper_deviation", v.upper_deviation)
        .num("tau", v.tau)
        .render()
        + "\n"
}

/// Path classification together with the first four cumulants.
pub fn classification_json(p: &GtsParams, c: &PathClassification, cumulants: &[f64; 4]) -> String {
    let activity = match c.activity {
        Activity::Finite => "finite",
        Activity::Infinite => "infinite",
    };
    let variation = match c.variation {
        Variation::Finite => "finite",
        Variation::Infinite => "infinite",
    };
    let k = cumulants
        .iter()
        .enumerate()
        .fold(Obj::new(), |o, (i, &v)| o.num(&format!("k{}", i + 1), v));
    Obj::new()
        .obj("params", params_obj(p))
        .text("activity", activity)
        .text("variation", variation)
        .obj("cumulants", k)
        .render()
        + "\n"
}

/// CSV with a header row and one line per row of `rows`.
pub fn write_rows<W: Write>(mut out: W, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| fmt17(*v)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

/// Two-column CSV with a header row.
pub fn write_columns<W: Write>(mut out: W, header: [&str; 2], a: &[f64], b: &[f64]) -> Result<()> {
    let mut s = format!("{},{}\n", header[0], header[1]);
    for (x, y) in a.iter().zip(b) {
        let _ = writeln!(s, "{},{}", fmt17(*x), fmt17(*y));
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

/// `level,theoretical,observed`, one row per point.
pub fn write_qq_csv<W: Write>(mut out: W, q: &QQData) -> Result<()> {
    let mut s = String::from("level,theoretical,observed\n");
    for (l, (t, o)) in q.levels.iter().zip(&q.points) {
        let _ = writeln!(s, "{},{},{}", fmt17(*l), fmt17(*t), fmt17(*o));
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

const SIZE: f64 = 600.0;
const MARGIN: f64 = 70.0;
const TICKS: usize = 5;

/// Standalone SVG: one `circle.point` per pair, a single `line.reference`
/// for `y = x`, axes and labels.
pub fn qq_svg(q: &QQData, title: &str) -> String {
    let all = q.points.iter().flat_map(|&(t, o)| [t, o]);
    let (mut lo, mut hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !(hi > lo) {
        lo -= 0.5;
        hi += 0.5;
    }
    let pad = 0.04 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let plot = SIZE - 2.0 * MARGIN;
    let sx = |v: f64| MARGIN + (v - lo) / (hi - lo) * plot;
    let sy = |v: f64| SIZE - MARGIN - (v - lo) / (hi - lo) * plot;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">"
    );
    s.push_str("<style>.axis{stroke:#222;fill:none}.reference{stroke:#c33;stroke-dasharray:6 4}.point{fill:#236;fill-opacity:0.6}text{font-family:sans-serif;font-size:12px}</style>\n");
    let _ = writeln!(s, "<text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\">{}</text>", SIZE / 2.0, escape(title));
    let (x0, x1, y0, y1) = (MARGIN, SIZE - MARGIN, SIZE - MARGIN, MARGIN);
    let _ = writeln!(s, "<path class=\"axis\" d=\"M{x0:.2} {y1:.2}V{y0:.2}H{x1:.2}\"/>");
    for k in 0..=TICKS {
        let v = lo + (hi - lo) * k as f64 / TICKS as f64;
        let _ = writeln!(s, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{v:.2}</text>", sx(v), y0 + 18.0);
        let _ = writeln!(s, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{v:.2}</text>", x0 - 6.0, sy(v) + 4.0);
    }
    let _ = writeln!(s, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">Theoretical quantiles (%)</text>", SIZE / 2.0, SIZE - 20.0);
    let _ = writeln!(
        s,
        "<text x=\"20\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {:.2})\">Observed quantiles (%)</text>",
        SIZE / 2.0,
        SIZE / 2.0
    );
    let _ = writeln!(
        s,
        "<line class=\"reference\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\"/>",
        sx(lo),
        sy(lo),
        sx(hi),
        sy(hi)
    );
    for &(t, o) in &q.points {
        let _ = writeln!(s, "<circle class=\"point\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"2\"/>", sx(t), sy(o));
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_qq_svg<W: Write>(mut out: W, q: &QQData, title: &str) -> Result<()> {
    out.write_all(qq_svg(q, title).as_bytes())?;
    Ok(())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three() -> QQData {
        QQData {
            points: vec![(-1.0, -1.5), (0.0, 0.25), (1.0, 2.0)],
            reference: Reference::Normal { mean: 0.0, sd: 1.0 },
            levels: vec![1.0 / 6.0, 0.5, 5.0 / 6.0],
        }
    }

    #[test]
    fn fmt17_round_trips() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 123456.789, 0.0] {
            assert_eq!(fmt17(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt17(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn qq_csv_layout() {
        let mut buf = Vec::new();
        write_qq_csv(&mut buf, &three()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "level,theoretical,observed");
        assert_eq!(lines[2], "5.0000000000000000e-1,0.0000000000000000e0,2.5000000000000000e-1");
    }

    #[test]
    fn svg_structure_and_determinism() {
        let a = qq_svg(&three(), "t");
        assert_eq!(a, qq_svg(&three(), "t"));
        assert_eq!(a.matches("class=\"reference\"").count(), 1);
        assert_eq!(a.matches("<circle class=\"point\"").count(), 3);
        assert!(a.starts_with("<svg") && a.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn json_is_valid_and_exact() {
        let r = GofReport {
            ks_stat: 0.1,
            ks_critical_5pct: 1.358 / 10.0,
            ad_stat: f64::NAN,
            chi2_stat: 3.25,
            chi2_df: 9,
            chi2_pvalue: 0.95,
            n: 100,
        };
        let text = gof_json(&r);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["ks_stat"].as_f64().unwrap(), 0.1);
        assert!(v["ad_stat"].is_null());
        assert_eq!(v["chi2_df"].as_u64().unwrap(), 9);
        assert_eq!(text, gof_json(&r));
    }

    #[test]
    fn rows_and_classification() {
        let mut buf = Vec::new();
        write_rows(&mut buf, &["a", "b", "c"], &[vec![1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "a,b,c\n1.0000000000000000e0,2.0000000000000000e0,3.0000000000000000e0\n"
        );
        let p = GtsParams::bitcoin();
        let c = crate::levy::path_classification(&p);
        let v: serde_json::Value = serde_json::from_str(&classification_json(&p, &c, &[0.0, 1.0, 2.0, 3.0])).unwrap();
        assert_eq!(v["activity"], "infinite");
        assert_eq!(v["variation"], "finite");
        assert_eq!(v["cumulants"]["k4"].as_f64().unwrap(), 3.0);
    }
}
