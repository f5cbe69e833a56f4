//! Price ingestion, percent log returns and sample statistics.

use std::io::{Read, Write};

use chrono::NaiveDate;

use crate::emit::fmt17;
use crate::error::{Error, Result};

/// Log returns are reported in percent: `r = PERCENT * ln(p1 / p0)`.
pub const PERCENT: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PriceRow {
    pub date: NaiveDate,
    /// Close price.
    pub price: f64,
}

/// Date-sorted closing prices. Dates are unique.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    pub rows: Vec<PriceRow>,
    pub currency: Option<String>,
}

impl PriceSeries {
    /// Number of consecutive row pairs more than one calendar day apart.
    pub fn gap_count(&self) -> usize {
        self.rows
            .windows(2)
            .filter(|w| (w[1].date - w[0].date).num_days() > 1)
            .count()
    }

    /// Multiplies every price by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            rows: self
                .rows
                .iter()
                .map(|r| PriceRow {
                    date: r.date,
                    price: r.price * c,
                })
                .collect(),
            currency: self.currency.clone(),
        }
    }
}

/// Percent log returns with a free-form source label.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub values: Vec<f64>,
    pub label: String,
}

impl ReturnSeries {
    pub fn new(values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("return {i} is not finite")));
        }
        Ok(Self {
            values,
            label: label.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Ascending copy of the values.
    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Writes the single-column `return` CSV with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut buf = String::with_capacity(self.values.len() * 26 + 8);
        buf.push_str("return\n");
        for v in &self.values {
            buf.push_str(&fmt17(*v));
            buf.push('\n');
        }
        out.write_all(buf.as_bytes())?;
        Ok(())
    }

    /// Reads the single-column `return` CSV.
    pub fn read_csv<R: Read>(input: R, label: impl Into<String>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = rdr.headers().map_err(|e| csv_error(1, e))?.clone();
        if headers.get(0) != Some("return") {
            return Err(Error::Parse {
                line: 1,
                msg: "expected header `return`".into(),
            });
        }
        let mut values = Vec::new();
        for (idx, rec) in rdr.records().enumerate() {
            let line = idx + 2;
            let rec = rec.map_err(|e| csv_error(line, e))?;
            let field = rec.get(0).unwrap_or("");
            let v = field.parse::<f64>().map_err(|e| Error::Parse {
                line,
                msg: format!("`{field}`: {e}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    msg: "return is not finite".into(),
                });
            }
            values.push(v);
        }
        Self::new(values, label)
    }
}

fn csv_error(line: usize, e: csv::Error) -> Error {
    Error::Parse {
        line,
        msg: e.to_string(),
    }
}

/// Reads a `date,price[,currency]` CSV, sorting rows by date.
pub fn load_price_csv<R: Read>(input: R) -> Result<PriceSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let headers = rdr.headers().map_err(|e| csv_error(1, e))?.clone();
    if headers.get(0) != Some("date") || headers.get(1) != Some("price") {
        return Err(Error::Parse {
            line: 1,
            msg: "expected header `date,price`".into(),
        });
    }
    let mut rows: Vec<(usize, PriceRow)> = Vec::new();
    let mut currency: Option<String> = None;
    for (idx, rec) in rdr.records().enumerate() {
        let line = idx + 2;
        let rec = rec.map_err(|e| csv_error(line, e))?;
        let date_text = rec.get(0).unwrap_or("");
        let date = NaiveDate::parse_from_str(date_text, "%Y-%m-%d").map_err(|e| Error::Parse {
            line,
            msg: format!("date `{date_text}`: {e}"),
        })?;
        let price_text = rec.get(1).unwrap_or("");
        let price = price_text.parse::<f64>().map_err(|e| Error::Parse {
            line,
            msg: format!("price `{price_text}`: {e}"),
        })?;
        if !(price > 0.0 && price.is_finite()) {
            return Err(Error::NonPositivePrice { line });
        }
        if let Some(tag) = rec.get(2).filter(|t| !t.is_empty()) {
            currency.get_or_insert_with(|| tag.to_string());
        }
        rows.push((line, PriceRow { date, price }));
    }
    rows.sort_by_key(|(_, r)| r.date);
    if let Some(w) = rows.windows(2).find(|w| w[0].1.date == w[1].1.date) {
        return Err(Error::DuplicateDate {
            line: w[0].0.max(w[1].0),
        });
    }
    Ok(PriceSeries {
        rows: rows.into_iter().map(|(_, r)| r).collect(),
        currency,
    })
}

pub fn log_returns(p: &PriceSeries) -> Result<ReturnSeries> {
    if p.rows.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: p.rows.len(),
        });
    }
    let values = p
        .rows
        .windows(2)
        .map(|w| PERCENT * (w[1].price / w[0].price).ln())
        .collect();
    ReturnSeries::new(values, p.currency.clone().unwrap_or_else(|| "prices".into()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 divisor).
    pub sd: f64,
    /// `m3 / m2^{3/2}`; `None` when the series is constant.
    pub skewness: Option<f64>,
    /// `m4 / m2^2 - 3`; `None` when the series is constant.
    pub excess_kurtosis: Option<f64>,
    pub min: f64,
    pub max: f64,
}

pub fn summary_stats(r: &ReturnSeries) -> Result<SummaryStats> {
    let n = r.len();
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    let nf = n as f64;
    let mean = r.values.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in &r.values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let sd = (m2 / (nf - 1.0)).sqrt();
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (Some(m3 / m2.powf(1.5)), Some(m4 / (m2 * m2) - 3.0))
    } else {
        (None, None)
    };
    let min = r.values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = r.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(SummaryStats {
        n,
        mean,
        sd,
        skewness,
        excess_kurtosis,
        min,
        max,
    })
}
