//! `gts-tail`: generalized tempered stable tail analysis of return series.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gts_core::emit::{
    classification_json, fit_json, gof_json, verdict_json, write_columns, write_qq_csv, write_qq_svg,
    write_rows,
};
use gts_core::qq::{tail_verdict_with, DEFAULT_TAU_SCALE};
use gts_core::{
    build_grid, cdf_table, characteristic_exponent, cumulant, fit_mle, fit_normal, gof_report,
    load_price_csv, log_returns, path_classification, pdf_table, qq_gts, qq_normal, quantile,
    sample, CdfTable, Error, ErrorKind, FitOptions, GridConfig, GtsParams, Model, QQData,
    ReturnSeries, Result,
};

/// Probability levels used when `--levels` is not given.
const DEFAULT_LEVELS: [f64; 11] = [
    1e-4, 1e-3, 0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99, 0.999, 0.9999,
];

#[derive(Parser, Debug)]
#[command(name = "gts-tail", version, about = "Tail analysis of return series with generalized tempered stable laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Characteristic exponent and function at the given frequencies.
    EvalCf(EvalCfArgs),
    /// Density, tabulated or at chosen points.
    Pdf(PointArgs),
    /// Distribution function, tabulated or at chosen points.
    Cdf(PointArgs),
    /// Quantiles at the given probability levels.
    Quantile(QuantileArgs),
    /// Seeded draws from the law.
    Sample(SampleArgs),
    /// Maximum-likelihood fit of a return series.
    Fit(FitArgs),
    /// Q-Q comparison against a Normal or GTS reference.
    Qq(QqArgs),
    /// Goodness-of-fit statistics of a series against a parameter set.
    Gof(GofArgs),
    /// Path properties of a parameter set, or the tail verdict of a series.
    Classify(ClassifyArgs),
    /// Log returns (percent) of a `date,price` file.
    Returns(ReturnsArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Svg,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Theoretical {
    Normal,
    Gts,
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    /// Number of spatial grid points (rounded up to a power of two).
    #[arg(long, default_value_t = 1 << 14)]
    grid_m: usize,
    /// Half-width of the spatial window in standard deviations.
    #[arg(long, default_value_t = 20.0)]
    grid_width_sds: f64,
    /// Target modulus of the characteristic function at the frequency cutoff.
    #[arg(long, default_value_t = 1e-12)]
    freq_eps: f64,
}

impl GridArgs {
    fn config(&self) -> GridConfig {
        GridConfig {
            m: self.grid_m,
            width_sds: self.grid_width_sds,
            freq_eps: self.freq_eps,
            ..GridConfig::default()
        }
    }
}

#[derive(Args, Debug, Clone)]
struct Output {
    /// Output file; `-` writes to standard output.
    #[arg(long, default_value = "-")]
    out: PathBuf,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Debug)]
struct EvalCfArgs {
    /// Parameter file (`key=value` lines or JSON).
    #[arg(long)]
    params: PathBuf,
    /// Comma-separated frequencies.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    xi: Vec<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct PointArgs {
    #[arg(long)]
    params: PathBuf,
    /// Comma-separated abscissae; the whole table is written when omitted.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Vec<f64>,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct QuantileArgs {
    #[arg(long)]
    params: PathBuf,
    /// Comma-separated probability levels.
    #[arg(long, value_delimiter = ',')]
    levels: Vec<f64>,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long)]
    params: PathBuf,
    /// Number of draws.
    #[arg(long, short)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// `return` or `date,price` CSV.
    #[arg(long)]
    input: PathBuf,
    /// full, kobol, cgmy or bilateral-gamma.
    #[arg(long, default_value = "full")]
    model: String,
    /// Extra starting point, tried alongside the built-in ones.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Number of built-in starting points.
    #[arg(long, default_value_t = 5)]
    starts: usize,
    /// Evaluation budget per simplex run.
    #[arg(long, default_value_t = 3000)]
    max_evals: usize,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct QqArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "normal")]
    theoretical: Theoretical,
    /// Parameters of the GTS reference.
    #[arg(long)]
    theoretical_params: Option<PathBuf>,
    /// Multiplier of the tail-verdict threshold (JSON output).
    #[arg(long, default_value_t = DEFAULT_TAU_SCALE)]
    tau_scale: f64,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct GofArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    params: PathBuf,
    /// Number of equiprobable chi-squared bins.
    #[arg(long, default_value_t = 50)]
    bins: usize,
    /// Parameters estimated from this same series.
    #[arg(long, default_value_t = 0)]
    n_fitted: usize,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
#[group(id = "source", required = true, multiple = false, args = ["params", "input"])]
struct ClassifyArgs {
    /// Classify the paths of this parameter set.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Classify the tails of this series against `--theoretical`.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "normal")]
    theoretical: Theoretical,
    #[arg(long)]
    theoretical_params: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TAU_SCALE)]
    tau_scale: f64,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct ReturnsArgs {
    /// `date,price[,currency]` CSV.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    output: Output,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn read_params(path: &Path) -> Result<GtsParams> {
    GtsParams::parse_any(&read_text(path)?)
}

/// Reads a single-column `return` file, or a `date,price` file converted to
/// percent log returns.
fn read_series(path: &Path) -> Result<ReturnSeries> {
    let text = read_text(path)?;
    let header = text.lines().next().unwrap_or("").trim_start_matches('\u{feff}');
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    if header.trim().starts_with("date") {
        let mut r = log_returns(&load_price_csv(text.as_bytes())?)?;
        r.label = label;
        Ok(r)
    } else {
        ReturnSeries::read_csv(text.as_bytes(), label)
    }
}

fn table_for(p: &GtsParams, grid: &GridArgs) -> Result<CdfTable> {
    cdf_table(p, &build_grid(p, &grid.config())?)
}

fn format_of(output: &Output, allowed: &[Format], command: &str) -> Result<Format> {
    let f = output.format.unwrap_or(allowed[0]);
    if !allowed.contains(&f) {
        return Err(Error::Domain(format!("`{command}` does not write {f:?} output")));
    }
    Ok(f)
}

fn emit(output: &Output, bytes: &[u8]) -> Result<()> {
    if output.out.as_os_str() == "-" {
        let mut stdout = io::stdout().lock();
        stdout.write_all(bytes)?;
        stdout.flush()?;
    } else {
        fs::write(&output.out, bytes).map_err(|e| {
            Error::Io(io::Error::new(e.kind(), format!("{}: {e}", output.out.display())))
        })?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::EvalCf(a) => eval_cf(a),
        Command::Pdf(a) => pdf(a),
        Command::Cdf(a) => cdf(a),
        Command::Quantile(a) => quantiles(a),
        Command::Sample(a) => draw(a),
        Command::Fit(a) => fit(a),
        Command::Qq(a) => qq(a),
        Command::Gof(a) => gof(a),
        Command::Classify(a) => classify(a),
        Command::Returns(a) => returns(a),
    }
}

fn eval_cf(a: EvalCfArgs) -> Result<()> {
    format_of(&a.output, &[Format::Csv], "eval-cf")?;
    let p = read_params(&a.params)?;
    let rows: Vec<Vec<f64>> = a
        .xi
        .iter()
        .map(|&xi| {
            let psi = characteristic_exponent(&p, xi);
            let cf = psi.exp();
            vec![xi, psi.re, psi.im, cf.re, cf.im]
        })
        .collect();
    let mut buf = Vec::new();
    write_rows(&mut buf, &["xi", "psi_re", "psi_im", "cf_re", "cf_im"], &rows)?;
    emit(&a.output, &buf)
}

fn check_inside(xs: &[f64], lo: f64, hi: f64) -> Result<()> {
    let outside: Vec<f64> = xs.iter().copied().filter(|x| !(lo..=hi).contains(x)).collect();
    if outside.is_empty() {
        Ok(())
    } else {
        Err(Error::OutOfGrid {
            count: outside.len(),
            first: outside.into_iter().take(10).collect(),
        })
    }
}

fn pdf(a: PointArgs) -> Result<()> {
    format_of(&a.output, &[Format::Csv], "pdf")?;
    let p = read_params(&a.params)?;
    let t = pdf_table(&p, &build_grid(&p, &a.grid.config())?)?;
    let (xs, ys) = if a.x.is_empty() {
        (t.grid.xs().collect::<Vec<_>>(), t.values.clone())
    } else {
        check_inside(&a.x, t.grid.x_min, t.grid.x_max)?;
        (a.x.clone(), a.x.iter().map(|&x| t.eval(x).max(0.0)).collect())
    };
    let mut buf = Vec::new();
    write_columns(&mut buf, ["x", "pdf"], &xs, &ys)?;
    emit(&a.output, &buf)
}

fn cdf(a: PointArgs) -> Result<()> {
    format_of(&a.output, &[Format::Csv], "cdf")?;
    let p = read_params(&a.params)?;
    let t = table_for(&p, &a.grid)?;
    let (xs, ys) = if a.x.is_empty() {
        (t.grid.xs().collect::<Vec<_>>(), t.values.clone())
    } else {
        check_inside(&a.x, t.grid.x_min, t.grid.x_max)?;
        (a.x.clone(), a.x.iter().map(|&x| t.eval(x)).collect())
    };
    let mut buf = Vec::new();
    write_columns(&mut buf, ["x", "cdf"], &xs, &ys)?;
    emit(&a.output, &buf)
}

fn quantiles(a: QuantileArgs) -> Result<()> {
    format_of(&a.output, &[Format::Csv], "quantile")?;
    let p = read_params(&a.params)?;
    let t = table_for(&p, &a.grid)?;
    let levels = if a.levels.is_empty() {
        DEFAULT_LEVELS.to_vec()
    } else {
        a.levels
    };
    let qs = levels
        .iter()
        .map(|&l| quantile(&t, l))
        .collect::<Result<Vec<_>>>()?;
    let mut buf = Vec::new();
    write_columns(&mut buf, ["level", "quantile"], &levels, &qs)?;
    emit(&a.output, &buf)
}

fn draw(a: SampleArgs) -> Result<()> {
    format_of(&a.output, &[Format::Csv], "sample")?;
    let p = read_params(&a.params)?;
    let t = table_for(&p, &a.grid)?;
    let mut buf = Vec::new();
    sample(&t, a.n, a.seed)?.write_csv(&mut buf)?;
    emit(&a.output, &buf)
}

fn fit(a: FitArgs) -> Result<()> {
    format_of(&a.output, &[Format::Json], "fit")?;
    let model: Model = a.model.parse()?;
    let data = read_series(&a.input)?;
    let mut opts = FitOptions {
        grid: a.grid.config(),
        starts: a.starts,
        max_evals: a.max_evals,
        ..FitOptions::default()
    };
    if let Some(path) = &a.params {
        opts.extra_starts.push(read_params(path)?);
    }
    let result = fit_mle(&data, None, model, &opts)?;
    let normal = fit_normal(&data)?;
    emit(&a.output, fit_json(&result, Some(&normal)).as_bytes())
}

fn reference_qq(
    data: &ReturnSeries,
    theoretical: Theoretical,
    params: Option<&Path>,
    grid: &GridArgs,
) -> Result<QQData> {
    match (theoretical, params) {
        (Theoretical::Normal, None) => qq_normal(data),
        (Theoretical::Normal, Some(_)) => Err(Error::Domain(
            "--theoretical-params applies to --theoretical gts only".into(),
        )),
        (Theoretical::Gts, Some(path)) => {
            let p = read_params(path)?;
            qq_gts(data, &p, &table_for(&p, grid)?)
        }
        (Theoretical::Gts, None) => Err(Error::Domain(
            "--theoretical gts needs --theoretical-params".into(),
        )),
    }
}

fn qq(a: QqArgs) -> Result<()> {
    let format = format_of(&a.output, &[Format::Csv, Format::Svg, Format::Json], "qq")?;
    let data = read_series(&a.input)?;
    let q = reference_qq(&data, a.theoretical, a.theoretical_params.as_deref(), &a.grid)?;
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_qq_csv(&mut buf, &q)?,
        Format::Svg => {
            let title = format!("{} vs {}", data.label, q.reference);
            write_qq_svg(&mut buf, &q, &title)?
        }
        Format::Json => {
            let v = tail_verdict_with(&q, a.tau_scale)?;
            buf = verdict_json(&v, &q.reference, q.len()).into_bytes();
        }
    }
    emit(&a.output, &buf)
}

fn gof(a: GofArgs) -> Result<()> {
    format_of(&a.output, &[Format::Json], "gof")?;
    let data = read_series(&a.input)?;
    let p = read_params(&a.params)?;
    let r = gof_report(&data, &table_for(&p, &a.grid)?, a.bins, a.n_fitted)?;
    emit(&a.output, gof_json(&r).as_bytes())
}

fn classify(a: ClassifyArgs) -> Result<()> {
    format_of(&a.output, &[Format::Json], "classify")?;
    let text = match (&a.params, &a.input) {
        (Some(path), _) => {
            let p = read_params(path)?;
            let mut k = [0.0; 4];
            for (i, v) in k.iter_mut().enumerate() {
                *v = cumulant(&p, i as u32 + 1)?;
            }
            classification_json(&p, &path_classification(&p), &k)
        }
        (None, Some(path)) => {
            let data = read_series(path)?;
            let q = reference_qq(&data, a.theoretical, a.theoretical_params.as_deref(), &a.grid)?;
            verdict_json(&tail_verdict_with(&q, a.tau_scale)?, &q.reference, q.len())
        }
        (None, None) => unreachable!("clap requires one source"),
    };
    emit(&a.output, text.as_bytes())
}

fn returns(a: ReturnsArgs) -> Result<()> {
    format_of(&a.output, &[Format::Csv], "returns")?;
    let mut buf = Vec::new();
    read_series(&a.input)?.write_csv(&mut buf)?;
    emit(&a.output, &buf)
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Domain => 2,
        ErrorKind::Numerical => 3,
        ErrorKind::Io => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gts-tail: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
