//! Experiment runner: every computation as a subcommand, with results
//! written as sorted-key JSON and CSV next to a manifest.

mod commands;
mod config;
mod record;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{normalize_key, parse_config, ConfigError, Settings};
use crate::record::{Failure, Record};

#[derive(Parser)]
#[command(name = "surface-heights", version, about = "Heights of bordered surfaces and uniformization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
struct Common {
    /// Flat `key = value` file; its values win over flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
}

/// Budgets of the spectral computations.
#[derive(Args, Clone, Debug, Default, Serialize)]
struct Spectral {
    /// Smallest sampled time.
    #[arg(long)]
    t_min: Option<f64>,
    /// Split time T of the Mellin integral (a grid node).
    #[arg(long)]
    split: Option<f64>,
    #[arg(long)]
    per_decade: Option<usize>,
    #[arg(long)]
    fit_decades: Option<f64>,
    /// Largest accepted error estimate of ζ′(0).
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long)]
    c3_tolerance: Option<f64>,
    #[arg(long)]
    tail_factor: Option<f64>,
    /// Absolute heat-trace error budget at the smallest time.
    #[arg(long)]
    trace_budget: Option<f64>,
    /// κh on the coarsest grid.
    #[arg(long)]
    resolution: Option<f64>,
    /// Number of Richardson levels.
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    min_intervals: Option<usize>,
    #[arg(long)]
    max_intervals: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Height of an interval, flat cylinder, collar or half collar.
    Det(DetArgs),
    /// All heights of one collar with the route checks.
    Collar(CollarArgs),
    /// Heights of standard subcollars over a range of l.
    Sweep(SweepArgs),
    /// Height gap after cutting a collar into pieces.
    Insertion(InsertionArgs),
    /// Uniform metric (type I or II) in the conformal class of a mesh.
    Uniformize(UniformizeArgs),
    /// Polyakov–Alvarez shift on a cylinder, or the height inequality on a mesh.
    Polyakov(PolyakovArgs),
    /// Randomized invariant suites.
    Verify(VerifyArgs),
}

#[derive(Args, Serialize)]
pub struct DetArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// interval, flat_cylinder, collar or half_collar.
    #[arg(long)]
    geometry: Option<String>,
    /// Shorthand for `--geometry interval`.
    #[arg(long)]
    interval: bool,
    /// Interval length (interval from 0).
    #[arg(long)]
    length: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    /// Circumference of a cylinder or collar.
    #[arg(long)]
    l: Option<f64>,
    /// Interval weight: zero, neg_log_sin, or a constant.
    #[arg(long)]
    phi: Option<String>,
    /// direct or conformal (collars); spectral or identity (half collars).
    #[arg(long)]
    route: Option<String>,
    /// Allowed gap to the closed form.
    #[arg(long)]
    tolerance: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    spectral: Spectral,
}

#[derive(Args, Serialize)]
pub struct CollarArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[arg(long)]
    l: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    /// Evaluate the direct mode-sum route (true or false).
    #[arg(long)]
    direct: Option<bool>,
    /// Evaluate the half collar by its own mode sum.
    #[arg(long)]
    half_spectral: Option<bool>,
    /// Allowed defect of the heights identity.
    #[arg(long)]
    tolerance: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    spectral: Spectral,
}

#[derive(Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// SC_I, SC_II or SC_III.
    #[arg(long)]
    kind: Option<String>,
    /// start:stop:count (log-spaced) or a single value.
    #[arg(long)]
    l: Option<String>,
    #[arg(long)]
    route: Option<String>,
    /// Coefficient c of the leading term c π²/l.
    #[arg(long)]
    pi2_coeff: Option<f64>,
    /// Whether the leading term includes log l.
    #[arg(long)]
    include_log: Option<bool>,
    /// Fail when the residual spread exceeds this.
    #[arg(long)]
    max_spread: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    spectral: Spectral,
}

#[derive(Args, Serialize)]
pub struct InsertionArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[arg(long)]
    l: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    a_inner: Option<f64>,
    #[arg(long)]
    b_inner: Option<f64>,
    #[arg(long)]
    route: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    spectral: Spectral,
}

#[derive(Args, Serialize)]
pub struct UniformizeArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// pants, annulus, or a mesh file.
    #[arg(long)]
    mesh: Option<String>,
    /// Target vertex count of a generated pants mesh.
    #[arg(long)]
    vertices: Option<usize>,
    #[arg(long)]
    hole_radius: Option<f64>,
    #[arg(long)]
    hole_offset: Option<f64>,
    #[arg(long)]
    inner_radius: Option<f64>,
    #[arg(long)]
    n_theta: Option<usize>,
    #[arg(long)]
    n_radial: Option<usize>,
    /// I (constant curvature, geodesic boundary) or II (flat, constant k).
    #[arg(long = "type")]
    #[serde(rename = "type")]
    kind: Option<String>,
    /// Area of the uniform metric (default: that of the input).
    #[arg(long)]
    area: Option<f64>,
    /// Newton tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    uniformity_tolerance: Option<f64>,
    /// Also run Φ∘Ψ on the type II metric.
    #[arg(long)]
    round_trip: Option<bool>,
}

#[derive(Args, Serialize)]
pub struct PolyakovArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// cylinder or mesh.
    #[arg(long)]
    geometry: Option<String>,
    #[arg(long)]
    l: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    /// Conformal factor on the cylinder: neg_log_sin or a constant.
    #[arg(long)]
    psi: Option<String>,
    /// Compare with the direct mode sum (psi = neg_log_sin).
    #[arg(long)]
    direct: Option<bool>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    vertices: Option<usize>,
    #[arg(long)]
    hole_radius: Option<f64>,
    #[arg(long)]
    hole_offset: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    spectral: Spectral,
}

#[derive(Args, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// all, or one suite label.
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Cases per suite (default: each suite's own).
    #[arg(long)]
    cases: Option<usize>,
}

/// Keys set on the command line, from the serialized arguments.
fn flag_map(args: &impl Serialize) -> BTreeMap<String, String> {
    let value = serde_json::to_value(args).expect("arguments serialize");
    let mut out = BTreeMap::new();
    if let serde_json::Value::Object(map) = value {
        for (k, v) in map {
            let s = match v {
                serde_json::Value::Null | serde_json::Value::Bool(false) => continue,
                serde_json::Value::String(s) => s,
                other => other.to_string(),
            };
            out.insert(normalize_key(&k), s);
        }
    }
    out
}

/// All keys a command accepts: its flags (unset ones serialize as null)
/// plus `out`.
fn allowed_keys(args: &impl Serialize) -> Vec<String> {
    let value = serde_json::to_value(args).expect("arguments serialize");
    let mut keys: Vec<String> = match value {
        serde_json::Value::Object(map) => map.keys().map(|k| normalize_key(k)).collect(),
        _ => Vec::new(),
    };
    keys.push("out".into());
    keys
}

fn settings_for(common: &Common, flags: BTreeMap<String, String>, allowed: &[String]) -> Result<Settings, ConfigError> {
    let mut flags = flags;
    if let Some(out) = &common.out {
        flags.insert("out".into(), out.clone());
    }
    let file = match &common.config {
        None => BTreeMap::new(),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| config::config_error("config", format!("cannot read {}: {e}", path.display())))?;
            parse_config(&text)?
        }
    };
    let allowed: Vec<&str> = allowed.iter().map(|s| s.as_str()).collect();
    Settings::merge(flags, file, &allowed)
}

/// `--out` from unparsed arguments, for the manifest of a usage error.
fn raw_out(args: &[String]) -> Option<String> {
    args.iter().enumerate().find_map(|(i, a)| match a.strip_prefix("--out") {
        Some("") => args.get(i + 1).cloned(),
        Some(rest) => rest.strip_prefix('=').map(str::to_string),
        None => None,
    })
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let _ = e.print();
            let dir = raw_out(&args).unwrap_or_else(|| "results".to_string());
            let Ok(mut record) = Record::open(&dir) else {
                return ExitCode::from(record::EXIT_CONFIG);
            };
            let command = args.get(1).filter(|a| !a.starts_with('-')).cloned().unwrap_or_default();
            record.begin(&command, &Settings::default());
            let message = e.render().to_string();
            let first = message.lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            return ExitCode::from(record.finish(Err(Failure::Config(config::config_error("arguments", first)))));
        }
    };
    let (name, common, flags, allowed): (&str, Common, _, _) = match &cli.command {
        Command::Det(a) => ("det", a.common.clone(), flag_map(a), allowed_keys(a)),
        Command::Collar(a) => ("collar", a.common.clone(), flag_map(a), allowed_keys(a)),
        Command::Sweep(a) => ("sweep", a.common.clone(), flag_map(a), allowed_keys(a)),
        Command::Insertion(a) => (
            "insertion",
            a.common.clone(),
            flag_map(a),
            allowed_keys(a),
        ),
        Command::Uniformize(a) => (
            "uniformize",
            a.common.clone(),
            flag_map(a),
            allowed_keys(a),
        ),
        Command::Polyakov(a) => (
            "polyakov",
            a.common.clone(),
            flag_map(a),
            allowed_keys(a),
        ),
        Command::Verify(a) => ("verify", a.common.clone(), flag_map(a), allowed_keys(a)),
    };

    let settings = settings_for(&common, flags, &allowed);
    let out_dir = match &settings {
        Ok(s) => s.raw("out").map(str::to_string),
        Err(_) => common.out.clone(),
    }
    .unwrap_or_else(|| "results".to_string());

    let mut record = match Record::open(&out_dir) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: invalid `out`: cannot create {out_dir}: {e}");
            return ExitCode::from(2);
        }
    };

    let outcome = match settings {
        Err(e) => {
            record.begin(name, &Settings::default());
            Err(Failure::Config(e))
        }
        Ok(settings) => {
            for w in &settings.warnings {
                eprintln!("warning: {w}");
            }
            record.begin(name, &settings);
            commands::run(name, &settings, &mut record)
        }
    };
    let code = record.finish(outcome);
    ExitCode::from(code)
}
