use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gts_core::GtsParams;
use tempfile::TempDir;

const SMALL_GRID: [&str; 2] = ["--grid-m", "4096"];

fn gts(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gts-tail"))
        .args(args)
        .output()
        .expect("spawn gts-tail")
}

fn ok(args: &[&str]) -> String {
    let out = gts(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    gts(args).status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn btc_file(dir: &Path) -> PathBuf {
    write(dir, "btc.params", &GtsParams::bitcoin().to_kv())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn sample_file(dir: &Path, params: &Path, n: usize, seed: u64) -> PathBuf {
    let out = dir.join(format!("sample-{n}-{seed}.csv"));
    let (n, seed) = (n.to_string(), seed.to_string());
    ok(&[
        "sample", "--params", s(params), "-n", &n, "--seed", &seed, "--out", s(&out), SMALL_GRID[0], SMALL_GRID[1],
    ]);
    out
}

#[test]
fn eval_cf_at_the_origin() {
    let dir = TempDir::new().unwrap();
    let p = btc_file(dir.path());
    let text = ok(&["eval-cf", "--params", s(&p), "--xi=-1,0,1"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "xi,psi_re,psi_im,cf_re,cf_im");
    assert_eq!(lines.len(), 4);
    let origin: Vec<f64> = lines[2].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(origin, vec![0.0, 0.0, 0.0, 1.0, 0.0]);
    let minus: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    let plus: Vec<f64> = lines[3].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(minus[1], plus[1]);
    assert_eq!(minus[2], -plus[2]);
}

#[test]
fn quantiles_are_increasing_and_match_cdf() {
    let dir = TempDir::new().unwrap();
    let p = btc_file(dir.path());
    let text = ok(&["quantile", "--params", s(&p)]);
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 11);
    assert!(rows.windows(2).all(|w| w[0].1 < w[1].1));
    let median = rows[5].1.to_string();
    let cdf = ok(&["cdf", "--params", s(&p), "--x", &median]);
    let f: f64 = cdf.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((f - 0.5).abs() < 1e-8, "{f}");
}

#[test]
fn full_tables_have_one_row_per_node() {
    let dir = TempDir::new().unwrap();
    let p = btc_file(dir.path());
    let text = ok(&["pdf", "--params", s(&p), SMALL_GRID[0], SMALL_GRID[1]]);
    assert_eq!(text.lines().count(), 4097);
    assert!(text.starts_with("x,pdf\n"));
}

#[test]
fn sampling_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let p = btc_file(dir.path());
    let a = fs::read(sample_file(dir.path(), &p, 200, 7)).unwrap();
    let b = ok(&["sample", "--params", s(&p), "-n", "200", "--seed", "7", "--grid-m", "4096"]);
    assert_eq!(a, b.as_bytes());
    let c = ok(&["sample", "--params", s(&p), "-n", "200", "--seed", "8", "--grid-m", "4096"]);
    assert_ne!(a, c.as_bytes());
    assert_eq!(c.lines().count(), 201);
}

#[test]
fn qq_outputs() {
    let dir = TempDir::new().unwrap();
    let p = btc_file(dir.path());
    let data = sample_file(dir.path(), &p, 500, 3);
    let csv = ok(&["qq", "--input", s(&data)]);
    assert_eq!(csv.lines().count(), 501);
    assert!(csv.starts_with("level,theoretical,observed\n"));
    let svg = ok(&["qq", "--input", s(&data), "--format", "svg"]);
    assert_eq!(svg.matches("<circle class=\"point\"").count(), 500);
    assert_eq!(svg.matches("class=\"reference\"").count(), 1);
    let own = ok(&[
        "qq", "--input", s(&data), "--theoretical", "gts", "--theoretical-params", s(&p), "--format", "csv",
        SMALL_GRID[0], SMALL_GRID[1],
    ]);
    assert_eq!(own.lines().count(), 501);
    let verdict = ok(&["qq", "--input", s(&data), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&verdict).unwrap();
    assert_eq!(v["n"], 500);
    assert_eq!(v["reference"]["law"], "normal");
}

#[test]
fn gof_and_classify_write_json() {
    let dir = TempDir::new().unwrap();
    let p = btc_file(dir.path());
    let data = sample_file(dir.path(), &p, 1000, 11);
    let text = ok(&["gof", "--input", s(&data), "--params", s(&p), "--bins", "20", SMALL_GRID[0], SMALL_GRID[1]]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["chi2_df"], 19);
    assert_eq!(v["n"], 1000);
    assert!(v["ks_stat"].as_f64().unwrap() < v["ks_critical_5pct"].as_f64().unwrap());

    let text = ok(&["classify", "--params", s(&p)]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["activity"], "infinite");
    assert_eq!(v["variation"], "finite");

    let text = ok(&["classify", "--input", s(&data)]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(v["shape"].is_string());
}

#[test]
fn price_files_become_percent_log_returns() {
    let dir = TempDir::new().unwrap();
    let prices = write(dir.path(), "px.csv", "date,price\n2024-01-02,110\n2024-01-01,100\n2024-01-03,99\n");
    let text = ok(&["returns", "--input", s(&prices)]);
    let r: Vec<f64> = text.lines().skip(1).map(|l| l.parse().unwrap()).collect();
    assert_eq!(text.lines().next(), Some("return"));
    assert!((r[0] - 100.0 * (1.1f64).ln()).abs() < 1e-12);
    assert!((r[1] - 100.0 * (99.0f64 / 110.0).ln()).abs() < 1e-12);
}

#[test]
fn fit_writes_estimates_and_normal_baseline() {
    let dir = TempDir::new().unwrap();
    let p = btc_file(dir.path());
    let data = sample_file(dir.path(), &p, 200, 5);
    let out = dir.path().join("fit.json");
    ok(&[
        "fit", "--input", s(&data), "--model", "bilateral-gamma", "--starts", "1", "--max-evals", "150", "--out",
        s(&out), SMALL_GRID[0], SMALL_GRID[1],
    ]);
    let text = fs::read_to_string(&out).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["model"], "bilateral-gamma");
    assert_eq!(v["n_obs"], 200);
    assert_eq!(v["params"]["beta_plus"].as_f64().unwrap(), 0.0);
    assert!(v["normal"]["aic"].is_number());
    // a saved fit is itself a valid parameter file
    let again = ok(&["classify", "--params", s(&out)]);
    assert!(again.contains("\"activity\""));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let p = btc_file(dir.path());
    let missing = dir.path().join("nope.params");
    assert_eq!(code(&["quantile", "--params", s(&missing)]), 4);

    let bad = write(dir.path(), "bad.params", &GtsParams::bitcoin().to_kv().replace("alpha_plus=", "alpha_plus=-"));
    assert_eq!(code(&["quantile", "--params", s(&bad)]), 2);

    let data = sample_file(dir.path(), &p, 100, 1);
    assert_eq!(code(&["qq", "--input", s(&data), "--theoretical", "gts"]), 2);
    assert_eq!(code(&["quantile", "--params", s(&p), "--levels", "1.5"]), 2);
    assert_eq!(code(&["fit", "--input", s(&data), "--model", "nonsense"]), 2);
    assert_eq!(code(&["pdf", "--params", s(&p), "--format", "svg"]), 2);

    // too few nodes to resolve the heavier law: numerical failure
    let eth = write(dir.path(), "eth.params", &GtsParams::ethereum().to_kv());
    assert_eq!(code(&["pdf", "--params", s(&eth), "--grid-m", "256"]), 3);

    // clap usage errors
    assert_eq!(code(&["quantile"]), 2);
}
