//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a verification row did not pass, 2 usage or configuration
//! error, 3 non-finite numbers in the input samples or the output.

mod config;

use std::ffi::OsString;
use std::io::Write;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

pub use config::{parse_config_file, CommonArgs, Format, RunConfig};

use crate::error::Error;
use crate::fracint::{image_handle, rl_integral, FracOrder};
use crate::fractaldim::box_dimension;
use crate::funcspace::{catalog_lookup, make_grid, parse_function_spec, sample, FunctionHandle, Grid, SampledFunction};
use crate::special::GAMMA_IMPL;
use crate::variation::{bv_norm, detect_uvp, discrete_tv, jordan_decompose, DetectOptions, Thresholds, UvpDetection};
use crate::verify::{run_suite, SuiteConfig};
use config::Defaults;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Parser)]
#[command(name = "fracvar", version, about = "Fractional integrals, bounded variation and box dimension of sampled functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate f and its Riemann-Liouville integrals on a uniform grid
    Integrate(CommonArgs),
    /// Total variation, BV norm and the Jordan decomposition of the sampled function
    Variation(CommonArgs),
    /// Scan grid nodes for points of unbounded variation (of the image when --alpha is set)
    DetectUvp(CommonArgs),
    /// Box-counting dimension of the graph (of the image when --alpha is set)
    Boxdim(CommonArgs),
    /// Run the seeded verification suite
    Verify(CommonArgs),
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
            CliError::Failed(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NonFinite { .. } => CliError::Numeric(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

/// Parse `args` (program name first), run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("fracvar: {e}");
            e.exit_code()
        }
    }
}

/// Output of one subcommand: CSV rows and the JSON `results` value.
struct Rendered {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    results: Value,
}

fn execute(command: Command) -> Result<(), CliError> {
    let (name, args, defaults) = match command {
        Command::Integrate(a) => ("integrate", a, Defaults { n: 1024, format: Format::Csv, alpha: vec![] }),
        Command::Variation(a) => ("variation", a, Defaults { n: 1024, format: Format::Csv, alpha: vec![] }),
        Command::DetectUvp(a) => ("detect-uvp", a, Defaults { n: 16, format: Format::Csv, alpha: vec![] }),
        Command::Boxdim(a) => ("boxdim", a, Defaults { n: 1 << 14, format: Format::Csv, alpha: vec![] }),
        Command::Verify(a) => {
            ("verify", a, Defaults { n: 1 << 14, format: Format::Json, alpha: SuiteConfig::default().alphas })
        }
    };
    let mut cfg = RunConfig::resolve(name, args.load()?, defaults)?;
    let (rendered, failure) = match name {
        "verify" => cmd_verify(&mut cfg)?,
        other => {
            let handle = resolve_function(&mut cfg)?;
            let r = match other {
                "integrate" => cmd_integrate(&cfg, &handle)?,
                "variation" => cmd_variation(&cfg, &handle)?,
                "detect-uvp" => cmd_detect_uvp(&cfg, &handle)?,
                _ => cmd_boxdim(&cfg, &handle)?,
            };
            (r, None)
        }
    };
    emit(&cfg, &rendered)?;
    match failure {
        Some(msg) => Err(CliError::Failed(msg)),
        None => Ok(()),
    }
}

/// Look up the function on `[a, b]`. Unset endpoints come from the function spec, whose own
/// domain defaults to `[0, 1]`.
fn resolve_function(cfg: &mut RunConfig) -> Result<FunctionHandle, CliError> {
    let parsed = parse_function_spec(&cfg.function)?;
    let (da, db) = parsed.domain();
    if cfg.a.is_nan() {
        cfg.a = da;
    }
    if cfg.b.is_nan() {
        cfg.b = db;
    }
    if cfg.a >= cfg.b {
        return Err(CliError::Config(format!("need a < b, got a = {}, b = {}", cfg.a, cfg.b)));
    }
    let mut params = parsed.params().clone();
    params.insert("a".into(), cfg.a);
    params.insert("b".into(), cfg.b);
    let handle = catalog_lookup(parsed.name(), &params)?;
    cfg.function = handle.describe();
    Ok(handle)
}

fn orders(cfg: &RunConfig) -> Result<Vec<FracOrder>, CliError> {
    Ok(cfg.alpha.iter().map(|&a| FracOrder::new(a)).collect::<Result<_, _>>()?)
}

fn grid(cfg: &RunConfig) -> Result<Grid, CliError> {
    Ok(make_grid(cfg.a, cfg.b, cfg.n)?)
}

fn finite(what: &str, values: &[f64]) -> Result<(), CliError> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(CliError::Numeric(format!("{what} is not finite at index {i}"))),
        None => Ok(()),
    }
}

fn sampled(cfg: &RunConfig, handle: &FunctionHandle) -> Result<SampledFunction, CliError> {
    let f = sample(handle, &grid(cfg)?)?;
    finite("f", f.values())?;
    Ok(f)
}

/// Reals in CSV cells: 17 significant digits.
fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn cmd_integrate(cfg: &RunConfig, handle: &FunctionHandle) -> Result<Rendered, CliError> {
    if cfg.alpha.is_empty() {
        return Err(CliError::Config("integrate needs --alpha".into()));
    }
    let f = sampled(cfg, handle)?;
    let mut images = Vec::new();
    for order in orders(cfg)? {
        let img = rl_integral(&f, order)?;
        finite(&format!("I^{} f", order.alpha()), img.values())?;
        images.push(img);
    }
    let xs: Vec<f64> = f.grid().nodes().collect();
    let mut header = vec!["x".to_string(), "f".to_string()];
    header.extend(cfg.alpha.iter().map(|a| format!("I^{a}")));
    let rows = (0..xs.len())
        .map(|i| {
            let mut r = vec![real(xs[i]), real(f.values()[i])];
            r.extend(images.iter().map(|img| real(img.values()[i])));
            r
        })
        .collect();
    let integrals: Vec<Value> =
        cfg.alpha.iter().zip(&images).map(|(a, img)| json!({ "alpha": a, "values": img.values() })).collect();
    Ok(Rendered { header, rows, results: json!({ "x": xs, "f": f.values(), "integrals": integrals }) })
}

fn cmd_variation(cfg: &RunConfig, handle: &FunctionHandle) -> Result<Rendered, CliError> {
    let f = sampled(cfg, handle)?;
    let tv = discrete_tv(&f, 0, cfg.n)?;
    let norm = bv_norm(&f);
    finite("total variation", &[tv, norm])?;
    let (g, h) = jordan_decompose(&f)?;
    let xs: Vec<f64> = f.grid().nodes().collect();
    let header = ["x", "f", "g", "h"].map(String::from).to_vec();
    let rows = (0..xs.len())
        .map(|i| vec![real(xs[i]), real(f.values()[i]), real(g.values()[i]), real(h.values()[i])])
        .collect();
    let results = json!({
        "tv": tv,
        "bv_norm": norm,
        "x": xs,
        "f": f.values(),
        "g": g.values(),
        "h": h.values(),
    });
    Ok(Rendered { header, rows, results })
}

fn detect_options(cfg: &RunConfig) -> DetectOptions {
    DetectOptions {
        stride: cfg.stride,
        levels: cfg.levels,
        n_per_level: cfg.n_per_level,
        base_delta: None,
        thresholds: thresholds(cfg),
    }
}

fn thresholds(cfg: &RunConfig) -> Thresholds {
    Thresholds { rho: cfg.rho, m: cfg.m, floor_factor: cfg.floor, ..Thresholds::default() }
}

#[derive(Serialize)]
struct ProfileSummary {
    center: f64,
    classification: crate::variation::Classification,
    final_tv: f64,
    growth_ratios: Vec<f64>,
}

fn cmd_detect_uvp(cfg: &RunConfig, handle: &FunctionHandle) -> Result<Rendered, CliError> {
    let grid = grid(cfg)?;
    let opts = detect_options(cfg);
    let mut targets: Vec<(String, FunctionHandle)> = vec![];
    if cfg.alpha.is_empty() {
        targets.push((handle.describe(), handle.clone()));
    } else {
        for order in orders(cfg)? {
            targets.push((format!("I^{}", order.alpha()), image_handle(handle, order, cfg.image_n)?));
        }
    }
    let header = ["target", "x0", "classification", "final_tv", "last_growth_ratio"].map(String::from).to_vec();
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for (label, target) in &targets {
        let d: UvpDetection = detect_uvp(target, &grid, &opts)?;
        let profiles: Vec<ProfileSummary> = d
            .reports
            .iter()
            .map(|r| ProfileSummary {
                center: r.center,
                classification: r.classification,
                final_tv: r.final_tv(),
                growth_ratios: r.growth_ratios.clone(),
            })
            .collect();
        for p in &profiles {
            finite("profile variation", &[p.final_tv])?;
            let class = serde_json::to_value(p.classification).expect("serializes");
            rows.push(vec![
                label.clone(),
                real(p.center),
                class.as_str().unwrap_or_default().to_string(),
                real(p.final_tv),
                p.growth_ratios.last().map_or_else(String::new, |&r| real(r)),
            ]);
        }
        results.push(json!({
            "target": label,
            "candidates": d.candidates,
            "unbounded": d.unbounded,
            "inconclusive": d.inconclusive,
            "profiles": profiles,
        }));
    }
    Ok(Rendered { header, rows, results: Value::Array(results) })
}

fn cmd_boxdim(cfg: &RunConfig, handle: &FunctionHandle) -> Result<Rendered, CliError> {
    let f = sampled(cfg, handle)?;
    let mut targets = Vec::new();
    if cfg.alpha.is_empty() {
        targets.push((handle.describe(), f));
    } else {
        for order in orders(cfg)? {
            let img = rl_integral(&f, order)?;
            finite("image", img.values())?;
            targets.push((format!("I^{}", order.alpha()), img));
        }
    }
    let header = ["target", "j", "delta", "count"].map(String::from).to_vec();
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for (label, s) in &targets {
        let est = box_dimension(s, cfg.jmin, cfg.jmax)?;
        finite("regression", &[est.slope, est.intercept, est.r_squared])?;
        for sc in &est.scales {
            rows.push(vec![label.clone(), sc.j.to_string(), real(sc.delta), sc.count.to_string()]);
        }
        results.push(json!({ "target": label, "estimate": est }));
    }
    Ok(Rendered { header, rows, results: Value::Array(results) })
}

fn cmd_verify(cfg: &mut RunConfig) -> Result<(Rendered, Option<String>), CliError> {
    let defaults = SuiteConfig::default();
    let suite = SuiteConfig {
        seed: cfg.seed,
        alphas: cfg.alpha.clone(),
        thresholds: thresholds(cfg),
        image_n: cfg.image_n,
        detect_levels: cfg.levels,
        detect_n_per_level: cfg.n_per_level,
        ..defaults
    };
    if suite.alphas.is_empty() {
        return Err(CliError::Config("the alpha list is empty".into()));
    }
    let report = run_suite(&suite)?;
    eprint!("{}", report.summary());
    let header = ["theorem_id", "verdict", "config_digest"].map(String::from).to_vec();
    let rows = report
        .runs
        .iter()
        .map(|r| {
            let v = serde_json::to_value(r.verdict).expect("serializes");
            vec![r.theorem_id.clone(), v.as_str().unwrap_or_default().to_string(), r.config_digest.clone()]
        })
        .collect();
    let failure = (!report.all_pass()).then(|| "verification did not pass every row".to_string());
    let results = serde_json::to_value(&report).expect("report serializes");
    Ok((Rendered { header, rows, results }, failure))
}

fn emit(cfg: &RunConfig, r: &Rendered) -> Result<(), CliError> {
    let bytes = match cfg.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::Config(format!("csv: {e}"));
            w.write_record(&r.header).map_err(io)?;
            for row in &r.rows {
                w.write_record(row).map_err(io)?;
            }
            w.into_inner().map_err(|e| CliError::Config(format!("csv: {e}")))?
        }
        Format::Json => {
            let doc = json!({
                "meta": { "schema_version": SCHEMA_VERSION, "tool_version": env!("CARGO_PKG_VERSION"), "gamma_impl": GAMMA_IMPL },
                "config": cfg,
                "results": r.results,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("json serializes");
            s.push('\n');
            s.into_bytes()
        }
    };
    match &cfg.output {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::Config(format!("cannot write to stdout: {e}"))),
    }
}
