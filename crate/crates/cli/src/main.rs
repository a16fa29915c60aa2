//! Command line surface. Every command is a pure function of its flags
//! (given the seed) and writes one JSON or CSV document to stdout or --out.
//!
//! Exit codes: 0 success, 1 internal error, 2 validation error,
//! 3 at least one bound certificate violated.

// negated float comparisons are deliberate: NaN must fail validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cbe::charfn::{log_psi_dissected, log_psi_gamma, psi_gamma, psi_weierstrass};
use cbe::cumulants::{cumulant, t_n, variance, variance_bracket};
use cbe::density::{
    default_density, digit_prob_exact, kolmogorov_distance_to_gaussian, tv_distance_to_gaussian,
    DensityGrid,
};
use cbe::digits::{benford_prob, uniformity_gap_bound, DigitPattern};
use cbe::error::Error;
use cbe::params::EnsembleParams;
use cbe::regimes::{intermediate_edge, low_edge, verify_regime_bounds, CertStatus, Regime};
use cbe::sampler::{
    counterexample_sample, digit_frequency, sample_eigenvalues_rejection,
    sample_log_abs_d_with_grid, Counterexample, SampleBatch,
};
use cbe::util::log_grid;

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Parser)]
#[command(
    name = "cbe",
    version,
    about = "Digit statistics of the characteristic polynomial modulus of the circular beta ensemble"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Output format
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Write the document to a file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the characteristic function on a t grid
    Charfn(CharfnArgs),
    /// Cumulants, standard deviation, and the variance bracket
    Cumulants(CumulantsArgs),
    /// Exact digit probabilities, optionally with the density route
    Benford(BenfordArgs),
    /// Check the three-regime decay certificates on a t grid
    VerifyBounds(VerifyArgs),
    /// Draw a reproducible sample batch
    Sample(SampleArgs),
    /// Digit frequencies of a sampled batch against exact probabilities
    Digits(DigitsArgs),
    /// Distances to the Gaussian limit over a list of matrix sizes
    Distances(DistancesArgs),
}

#[derive(Args)]
struct CharfnArgs {
    #[arg(long)]
    n: u32,
    /// Ensemble parameter, as a float or an exact ratio "p/q"
    #[arg(long)]
    beta: String,
    /// Single evaluation point (overrides the grid flags)
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    t_min: f64,
    #[arg(long, default_value_t = 100.0)]
    t_max: f64,
    #[arg(long, default_value_t = 50)]
    t_points: usize,
    /// Add a column with the cross-representation discrepancy
    #[arg(long)]
    check_reps: bool,
    /// Explicit factors used by the product representation when checking
    #[arg(long, default_value_t = 10_000)]
    product_terms: u32,
}

#[derive(Args)]
struct CumulantsArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    beta: String,
    /// Highest cumulant order to report
    #[arg(long, default_value_t = 6)]
    max_k: u32,
}

#[derive(Args)]
struct BenfordArgs {
    #[arg(long, default_value_t = 10)]
    base: u32,
    /// Digit position for a positioned table (first position is 1)
    #[arg(long)]
    position: Option<u32>,
    /// Matrix size for the density-route comparison columns
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, default_value = "2")]
    beta: String,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    beta: String,
    /// Grid override: low end (defaults to a grid spanning all regimes)
    #[arg(long)]
    t_min: Option<f64>,
    /// Grid override: high end
    #[arg(long)]
    t_max: Option<f64>,
    /// Points per regime (default grid) or in total (explicit grid)
    #[arg(long, default_value_t = 200)]
    points: usize,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Method {
    Inverse,
    Rejection,
    BinomialPower,
    SignSum,
}

#[derive(Args)]
struct SampleArgs {
    /// Matrix size (inverse and rejection methods)
    #[arg(long, default_value_t = 10)]
    n: u32,
    #[arg(long, default_value = "2")]
    beta: String,
    #[arg(long, default_value_t = 1000)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "inverse")]
    method: Method,
    /// Gaussian blur width of the binomial-power law
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    /// Trial count of the counterexample laws
    #[arg(long)]
    law_n: Option<u32>,
}

#[derive(Args)]
struct DigitsArgs {
    #[arg(long)]
    n: u32,
    #[arg(long, default_value = "2")]
    beta: String,
    #[arg(long, default_value_t = 10_000)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    base: u32,
    /// Positioned table instead of the leading digit
    #[arg(long)]
    position: Option<u32>,
}

#[derive(Args)]
struct DistancesArgs {
    /// Comma-separated matrix sizes
    #[arg(long, value_delimiter = ',', required = true)]
    n_list: Vec<u32>,
    #[arg(long, default_value = "2")]
    beta: String,
}

struct Output {
    command: &'static str,
    config: Value,
    columns: &'static [&'static str],
    rows: Vec<Value>,
    exit: u8,
}

fn parse_params(n: u32, beta: &str) -> Result<EnsembleParams, Error> {
    if let Some((num, den)) = beta.split_once('/') {
        let num: u32 = num
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("bad rational beta {beta:?}")))?;
        let den: u32 = den
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("bad rational beta {beta:?}")))?;
        EnsembleParams::with_rational_beta(n, num, den)
    } else {
        let b: f64 = beta
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("bad beta {beta:?}")))?;
        EnsembleParams::new(n, b)
    }
}

fn beta_config(p: &EnsembleParams, raw: &str) -> Value {
    json!({ "input": raw, "value": p.beta() })
}

fn cmd_charfn(a: &CharfnArgs) -> Result<Output, Error> {
    let p = parse_params(a.n, &a.beta)?;
    let ts = if let Some(t) = a.t {
        vec![t]
    } else {
        if !(a.t_min > 0.0) || !(a.t_max > a.t_min) || a.t_points < 2 {
            return Err(Error::Domain(
                "need 0 < t-min < t-max and at least two points".into(),
            ));
        }
        log_grid(a.t_min, a.t_max, a.t_points)
    };
    let mut rows = Vec::with_capacity(ts.len());
    for &t in &ts {
        let psi = psi_gamma(&p, t)?;
        let mut row = json!({
            "t": t,
            "psi_re": psi.re,
            "psi_im": psi.im,
            "psi_abs": psi.norm(),
        });
        if a.check_reps {
            let lg = log_psi_gamma(&p, t)?;
            let terms = a.product_terms.max((2.0 * t.abs()).ceil() as u32);
            let ld = log_psi_dissected(&p, t)?;
            let w = psi_weierstrass(&p, t, terms)?;
            let d = ((ld - lg).exp() - 1.0)
                .norm()
                .max(((w.log_value - lg).exp() - 1.0).norm());
            row["discrepancy"] = json!(d);
        }
        rows.push(row);
    }
    let columns: &[&str] = if a.check_reps {
        &["t", "psi_re", "psi_im", "psi_abs", "discrepancy"]
    } else {
        &["t", "psi_re", "psi_im", "psi_abs"]
    };
    Ok(Output {
        command: "charfn",
        config: json!({
            "n": a.n,
            "beta": beta_config(&p, &a.beta),
            "check_reps": a.check_reps,
        }),
        columns,
        rows,
        exit: 0,
    })
}

fn cmd_cumulants(a: &CumulantsArgs) -> Result<Output, Error> {
    let p = parse_params(a.n, &a.beta)?;
    let (lo, hi) = variance_bracket(&p);
    let mut rows = Vec::new();
    for k in 1..=a.max_k {
        rows.push(json!({ "k": k, "value": cumulant(&p, k)? }));
    }
    Ok(Output {
        command: "cumulants",
        config: json!({
            "n": a.n,
            "beta": beta_config(&p, &a.beta),
            "t_n": t_n(&p),
            "variance": variance(&p),
            "bracket_lower": lo,
            "bracket_upper": hi,
        }),
        columns: &["k", "value"],
        rows,
        exit: 0,
    })
}

fn benford_patterns(base: u32, position: Option<u32>) -> Result<Vec<(u32, DigitPattern)>, Error> {
    match position {
        None | Some(1) => (1..base)
            .map(|k| Ok((k, DigitPattern::leading(base, vec![k])?)))
            .collect(),
        Some(m) => (0..base)
            .map(|k| Ok((k, DigitPattern::positioned(base, vec![(m, k)])?)))
            .collect(),
    }
}

fn cmd_benford(a: &BenfordArgs) -> Result<Output, Error> {
    let grid: Option<(EnsembleParams, DensityGrid)> = match a.n {
        Some(n) => {
            let p = parse_params(n, &a.beta)?;
            let g = default_density(&p)?;
            Some((p, g))
        }
        None => None,
    };
    let positioned = matches!(a.position, Some(m) if m >= 2);
    let mut rows = Vec::new();
    for (k, pattern) in benford_patterns(a.base, a.position)? {
        let exact = benford_prob(&pattern)?;
        let mut row = json!({ "digit": k, "exact": exact });
        if positioned {
            // distance from the uniform law is capped for deep positions
            row["uniform_gap_cap"] = json!(uniformity_gap_bound(&pattern)?);
        }
        if let Some((_, g)) = &grid {
            let dens = digit_prob_exact(g, &pattern)?;
            row["density"] = json!(dens);
            row["gap"] = json!((dens - exact).abs());
        }
        rows.push(row);
    }
    let columns: &[&str] = match (positioned, grid.is_some()) {
        (true, true) => &["digit", "exact", "uniform_gap_cap", "density", "gap"],
        (true, false) => &["digit", "exact", "uniform_gap_cap"],
        (false, true) => &["digit", "exact", "density", "gap"],
        (false, false) => &["digit", "exact"],
    };
    Ok(Output {
        command: "benford",
        config: json!({
            "base": a.base,
            "position": a.position,
            "n": a.n,
            "beta": a.n.map(|_| json!(a.beta)),
        }),
        columns,
        rows,
        exit: 0,
    })
}

fn cmd_verify_bounds(a: &VerifyArgs) -> Result<Output, Error> {
    let p = parse_params(a.n, &a.beta)?;
    let ts = match (a.t_min, a.t_max) {
        (Some(lo), Some(hi)) => {
            if !(lo > 0.0) || !(hi > lo) || a.points < 2 {
                return Err(Error::Domain(
                    "need 0 < t-min < t-max and at least two points".into(),
                ));
            }
            log_grid(lo, hi, a.points)
        }
        (None, None) => {
            let low = low_edge(&p);
            let mid = intermediate_edge(&p);
            let k = a.points.max(2);
            let mut ts: Vec<f64> = (1..=k).map(|i| low * i as f64 / k as f64).collect();
            ts.extend(log_grid(4.0 * std::f64::consts::E * 1.001, mid, k));
            ts.extend(log_grid(mid * 1.001, mid * 100.0, k));
            ts
        }
        _ => {
            return Err(Error::Domain(
                "give both t-min and t-max, or neither".into(),
            ))
        }
    };
    let reports = verify_regime_bounds(&p, &ts)?;
    let mut violated = 0usize;
    let rows = reports
        .iter()
        .map(|r| {
            if r.status == CertStatus::Violated {
                violated += 1;
            }
            json!({
                "t": r.t,
                "regime": match r.regime {
                    Regime::Low => "low",
                    Regime::Intermediate => "intermediate",
                    Regime::High => "high",
                },
                "psi_arg": r.psi_arg,
                "psi_abs": r.psi_abs,
                "log_psi_abs": r.log_psi_abs,
                "bound": r.bound,
                "log_bound": r.log_bound,
                "margin": r.margin,
                "holds": r.status != CertStatus::Violated,
                "status": match r.status {
                    CertStatus::Holds => "holds",
                    CertStatus::Violated => "violated",
                    CertStatus::Skipped => "skipped",
                },
                "skip_reason": r.skip_reason,
            })
        })
        .collect();
    Ok(Output {
        command: "verify-bounds",
        config: json!({
            "n": a.n,
            "beta": beta_config(&p, &a.beta),
            "grid_points": ts.len(),
            "violated": violated,
        }),
        columns: &[
            "t",
            "regime",
            "psi_arg",
            "psi_abs",
            "log_psi_abs",
            "bound",
            "log_bound",
            "margin",
            "holds",
            "status",
            "skip_reason",
        ],
        rows,
        exit: if violated > 0 { 3 } else { 0 },
    })
}

fn batch_rows(batch: &SampleBatch) -> Vec<Value> {
    batch
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| json!({ "index": i, "value": v }))
        .collect()
}

fn cmd_sample(a: &SampleArgs) -> Result<Output, Error> {
    let (batch, extra): (SampleBatch, Value) = match a.method {
        Method::Inverse => {
            let p = parse_params(a.n, &a.beta)?;
            let grid = default_density(&p)?;
            (
                sample_log_abs_d_with_grid(&grid, a.count, a.seed)?,
                json!({ "n": a.n, "beta": beta_config(&p, &a.beta) }),
            )
        }
        Method::Rejection => {
            let p = parse_params(a.n, &a.beta)?;
            let (batch, rate) = sample_eigenvalues_rejection(&p, a.count, a.seed)?;
            (
                batch,
                json!({
                    "n": a.n,
                    "beta": beta_config(&p, &a.beta),
                    "acceptance_rate": rate,
                }),
            )
        }
        Method::BinomialPower => {
            let law_n = a.law_n.unwrap_or(20);
            (
                counterexample_sample(
                    Counterexample::BinomialPower { n: law_n, eps: a.eps },
                    a.count,
                    a.seed,
                )?,
                json!({ "law_n": law_n, "eps": a.eps }),
            )
        }
        Method::SignSum => {
            let law_n = a.law_n.unwrap_or(100);
            (
                counterexample_sample(Counterexample::SignSum { n: law_n }, a.count, a.seed)?,
                json!({ "law_n": law_n }),
            )
        }
    };
    let rows = batch_rows(&batch);
    Ok(Output {
        command: "sample",
        config: json!({
            "method": batch.label,
            "seed": batch.seed,
            "count": a.count,
            "log_scale": batch.log_scale,
            "law": extra,
        }),
        columns: &["index", "value"],
        rows,
        exit: 0,
    })
}

fn cmd_digits(a: &DigitsArgs) -> Result<Output, Error> {
    let p = parse_params(a.n, &a.beta)?;
    let grid = default_density(&p)?;
    let batch = sample_log_abs_d_with_grid(&grid, a.count, a.seed)?;
    let mut rows = Vec::new();
    for (k, pattern) in benford_patterns(a.base, a.position)? {
        let (freq, stderr) = digit_frequency(&batch, &pattern)?;
        let dens = digit_prob_exact(&grid, &pattern)?;
        rows.push(json!({
            "digit": k,
            "sampled": freq,
            "stderr": stderr,
            "density": dens,
            "exact": benford_prob(&pattern)?,
        }));
    }
    Ok(Output {
        command: "digits",
        config: json!({
            "n": a.n,
            "beta": beta_config(&p, &a.beta),
            "base": a.base,
            "position": a.position,
            "count": a.count,
            "seed": a.seed,
        }),
        columns: &["digit", "sampled", "stderr", "density", "exact"],
        rows,
        exit: 0,
    })
}

fn cmd_distances(a: &DistancesArgs) -> Result<Output, Error> {
    if a.n_list.is_empty() {
        return Err(Error::Domain("n-list must not be empty".into()));
    }
    let mut rows = Vec::new();
    for &n in &a.n_list {
        let p = parse_params(n, &a.beta)?;
        let grid = default_density(&p)?;
        rows.push(json!({
            "n": n,
            "t_n": t_n(&p),
            "tv": tv_distance_to_gaussian(&grid)?,
            "kolmogorov": kolmogorov_distance_to_gaussian(&grid)?,
        }));
    }
    Ok(Output {
        command: "distances",
        config: json!({ "n_list": a.n_list, "beta": a.beta }),
        columns: &["n", "t_n", "tv", "kolmogorov"],
        rows,
        exit: 0,
    })
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn render(format: Format, out: &Output) -> String {
    match format {
        Format::Json => {
            let doc = json!({
                "schema": 1,
                "command": out.command,
                "config": out.config,
                "rows": out.rows,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("serializable document");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = out.columns.join(",");
            s.push('\n');
            for row in &out.rows {
                let line: Vec<String> = out
                    .columns
                    .iter()
                    .map(|c| csv_cell(row.get(*c).unwrap_or(&Value::Null)))
                    .collect();
                s.push_str(&line.join(","));
                s.push('\n');
            }
            s
        }
    }
}

fn run(cli: &Cli) -> Result<u8, (u8, String)> {
    // library errors are all input-driven: validation, exit 2
    let validation = |e: Error| (2u8, e.to_string());
    let out = match &cli.command {
        Cmd::Charfn(a) => cmd_charfn(a).map_err(validation)?,
        Cmd::Cumulants(a) => cmd_cumulants(a).map_err(validation)?,
        Cmd::Benford(a) => cmd_benford(a).map_err(validation)?,
        Cmd::VerifyBounds(a) => cmd_verify_bounds(a).map_err(validation)?,
        Cmd::Sample(a) => cmd_sample(a).map_err(validation)?,
        Cmd::Digits(a) => cmd_digits(a).map_err(validation)?,
        Cmd::Distances(a) => cmd_distances(a).map_err(validation)?,
    };
    let doc = render(cli.format, &out);
    match &cli.out {
        Some(path) => std::fs::write(path, doc)
            .map_err(|e| (1u8, format!("cannot write {}: {e}", path.display())))?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(doc.as_bytes())
                .map_err(|e| (1u8, format!("cannot write to stdout: {e}")))?;
        }
    }
    Ok(out.exit)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err((code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
