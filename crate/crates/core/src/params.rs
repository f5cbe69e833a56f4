//! The seven-parameter domain and its restricted sub-families.
//!
//! All quantities are in percent log-return units: `mu` is a daily return in
//! percent, the tempering rates `lambda_*` are per percent.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Canonical parameter names, in storage order.
pub const PARAM_NAMES: [&str; 7] = [
    "mu",
    "beta_plus",
    "beta_minus",
    "alpha_plus",
    "alpha_minus",
    "lambda_plus",
    "lambda_minus",
];

/// Location plus the two one-sided tempered stable legs.
///
/// Construct through [`GtsParams::new`] (or [`validate_params`]) so the
/// domain constraints hold: `0 <= beta < 1`, `alpha > 0`, `lambda > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct GtsParams {
    pub mu: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
}

#[derive(Deserialize)]
struct RawParams {
    mu: f64,
    beta_plus: f64,
    beta_minus: f64,
    alpha_plus: f64,
    alpha_minus: f64,
    lambda_plus: f64,
    lambda_minus: f64,
}

impl TryFrom<RawParams> for GtsParams {
    type Error = Error;

    fn try_from(r: RawParams) -> Result<Self> {
        GtsParams::new(
            r.mu,
            r.beta_plus,
            r.beta_minus,
            r.alpha_plus,
            r.alpha_minus,
            r.lambda_plus,
            r.lambda_minus,
        )
    }
}

impl GtsParams {
    pub fn new(
        mu: f64,
        beta_plus: f64,
        beta_minus: f64,
        alpha_plus: f64,
        alpha_minus: f64,
        lambda_plus: f64,
        lambda_minus: f64,
    ) -> Result<Self> {
        validate_params([
            mu,
            beta_plus,
            beta_minus,
            alpha_plus,
            alpha_minus,
            lambda_plus,
            lambda_minus,
        ])
    }

    /// Bitcoin daily-return estimates (percent units).
    pub fn bitcoin() -> Self {
        Self::new(
            -0.121571, 0.315548, 0.406563, 0.747714, 0.544565, 0.246530, 0.174772,
        )
        .expect("fixture is in domain")
    }

    /// Ethereum daily-return estimates (percent units).
    pub fn ethereum() -> Self {
        Self::new(-0.4854, 0.3904, 0.4045, 0.9582, 0.8005, 0.1667, 0.1708)
            .expect("fixture is in domain")
    }

    pub fn to_array(&self) -> [f64; 7] {
        [
            self.mu,
            self.beta_plus,
            self.beta_minus,
            self.alpha_plus,
            self.alpha_minus,
            self.lambda_plus,
            self.lambda_minus,
        ]
    }

    /// Whether the law is symmetric about `mu`.
    pub fn is_symmetric(&self) -> bool {
        self.beta_plus == self.beta_minus
            && self.alpha_plus == self.alpha_minus
            && self.lambda_plus == self.lambda_minus
    }

    /// Parses the `key=value` parameter file format. Blank lines and `#`
    /// comments are ignored; all seven keys are required exactly once.
    pub fn parse_kv(text: &str) -> Result<Self> {
        let mut vals: [Option<f64>; 7] = [None; 7];
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("expected key=value, got `{line}`"),
            })?;
            let key = key.trim();
            let slot = PARAM_NAMES
                .iter()
                .position(|n| *n == key)
                .ok_or_else(|| Error::Parse {
                    line: line_no,
                    msg: format!("unknown parameter `{key}`"),
                })?;
            if vals[slot].is_some() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("parameter `{key}` given twice"),
                });
            }
            let v = value.trim().parse::<f64>().map_err(|e| Error::Parse {
                line: line_no,
                msg: format!("`{}`: {e}", value.trim()),
            })?;
            vals[slot] = Some(v);
        }
        let mut raw = [0.0; 7];
        for (i, v) in vals.iter().enumerate() {
            raw[i] = v.ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("missing parameter `{}`", PARAM_NAMES[i]),
            })?;
        }
        validate_params(raw)
    }

    /// Reads a parameter file: either `key=value` lines or a JSON object with
    /// the seven names as keys. A JSON document with a `params` member (such
    /// as a saved fit) is read through that member.
    pub fn parse_any(text: &str) -> Result<Self> {
        if !text.trim_start().starts_with('{') {
            return Self::parse_kv(text);
        }
        let json_err = |e: serde_json::Error| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        };
        let mut doc: serde_json::Value = serde_json::from_str(text).map_err(json_err)?;
        if let Some(inner) = doc.get_mut("params") {
            doc = inner.take();
        }
        serde_json::from_value(doc).map_err(json_err)
    }

    /// Renders the `key=value` format with 17 significant digits.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        for (name, v) in PARAM_NAMES.iter().zip(self.to_array()) {
            out.push_str(name);
            out.push('=');
            out.push_str(&crate::emit::fmt17(v));
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for GtsParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "GTS(mu={}, beta+={}, beta-={}, alpha+={}, alpha-={}, lambda+={}, lambda-={})",
            self.mu,
            self.beta_plus,
            self.beta_minus,
            self.alpha_plus,
            self.alpha_minus,
            self.lambda_plus,
            self.lambda_minus
        )
    }
}

impl FromStr for GtsParams {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_kv(s)
    }
}

/// Validates seven raw values given in [`PARAM_NAMES`] order.
pub fn validate_params(raw: [f64; 7]) -> Result<GtsParams> {
    for (name, v) in PARAM_NAMES.iter().zip(raw) {
        if !v.is_finite() {
            return Err(Error::NonFinite(name));
        }
    }
    let [mu, bp, bm, ap, am, lp, lm] = raw;
    // beta = 1 is excluded: Gamma(-beta) has a pole there.
    let checks = [
        ("beta_plus", (0.0..1.0).contains(&bp)),
        ("beta_minus", (0.0..1.0).contains(&bm)),
        ("alpha_plus", ap > 0.0),
        ("alpha_minus", am > 0.0),
        ("lambda_plus", lp > 0.0),
        ("lambda_minus", lm > 0.0),
    ];
    if let Some((name, _)) = checks.iter().find(|(_, ok)| !ok) {
        return Err(Error::OutOfDomain(name));
    }
    Ok(GtsParams {
        mu,
        beta_plus: bp,
        beta_minus: bm,
        alpha_plus: ap,
        alpha_minus: am,
        lambda_plus: lp,
        lambda_minus: lm,
    })
}

/// Nested sub-families obtained by tying or fixing parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RestrictedKind {
    /// `beta_plus = beta_minus`.
    Kobol,
    /// `beta_plus = beta_minus` and `lambda_plus = lambda_minus`.
    Cgmy,
    /// `beta_plus = beta_minus = 0`.
    BilateralGamma,
}

impl RestrictedKind {
    /// Names of the free parameters, in the order `from_free` expects.
    pub fn free_names(self) -> &'static [&'static str] {
        match self {
            RestrictedKind::Kobol => &[
                "mu",
                "beta",
                "alpha_plus",
                "alpha_minus",
                "lambda_plus",
                "lambda_minus",
            ],
            RestrictedKind::Cgmy => &["mu", "beta", "alpha_plus", "alpha_minus", "lambda"],
            RestrictedKind::BilateralGamma => &[
                "mu",
                "alpha_plus",
                "alpha_minus",
                "lambda_plus",
                "lambda_minus",
            ],
        }
    }

    pub fn n_free(self) -> usize {
        self.free_names().len()
    }

    /// Projects a full parameter set onto this family's free coordinates.
    /// Tied values are averaged.
    pub fn to_free(self, p: &GtsParams) -> Vec<f64> {
        let beta = 0.5 * (p.beta_plus + p.beta_minus);
        match self {
            RestrictedKind::Kobol => vec![
                p.mu,
                beta,
                p.alpha_plus,
                p.alpha_minus,
                p.lambda_plus,
                p.lambda_minus,
            ],
            RestrictedKind::Cgmy => vec![
                p.mu,
                beta,
                p.alpha_plus,
                p.alpha_minus,
                0.5 * (p.lambda_plus + p.lambda_minus),
            ],
            RestrictedKind::BilateralGamma => vec![
                p.mu,
                p.alpha_plus,
                p.alpha_minus,
                p.lambda_plus,
                p.lambda_minus,
            ],
        }
    }

    /// Whether `p` satisfies this family's equality constraints.
    pub fn contains(self, p: &GtsParams) -> bool {
        match self {
            RestrictedKind::Kobol => p.beta_plus == p.beta_minus,
            RestrictedKind::Cgmy => {
                p.beta_plus == p.beta_minus && p.lambda_plus == p.lambda_minus
            }
            RestrictedKind::BilateralGamma => p.beta_plus == 0.0 && p.beta_minus == 0.0,
        }
    }
}

impl FromStr for RestrictedKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kobol" => Ok(RestrictedKind::Kobol),
            "cgmy" => Ok(RestrictedKind::Cgmy),
            "bilateral-gamma" | "bilateral_gamma" | "bg" => Ok(RestrictedKind::BilateralGamma),
            other => Err(Error::Domain(format!("unknown restricted model `{other}`"))),
        }
    }
}

impl fmt::Display for RestrictedKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RestrictedKind::Kobol => "kobol",
            RestrictedKind::Cgmy => "cgmy",
            RestrictedKind::BilateralGamma => "bilateral-gamma",
        })
    }
}

/// Expands the free parameters of a restricted family into a full set.
pub fn restricted_model(kind: RestrictedKind, free: &[f64]) -> Result<GtsParams> {
    if free.len() != kind.n_free() {
        return Err(Error::Domain(format!(
            "{kind} takes {} free parameters, got {}",
            kind.n_free(),
            free.len()
        )));
    }
    let raw = match kind {
        RestrictedKind::Kobol => [free[0], free[1], free[1], free[2], free[3], free[4], free[5]],
        RestrictedKind::Cgmy => [free[0], free[1], free[1], free[2], free[3], free[4], free[4]],
        RestrictedKind::BilateralGamma => {
            [free[0], 0.0, 0.0, free[1], free[2], free[3], free[4]]
        }
    };
    validate_params(raw)
}
