use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;
use spectral_chaos::io::Manifest;
use spectral_chaos_cli::config::{merge, Common, ConfigError};
use spectral_chaos_cli::suites::{self, Context, Outcome, SuiteError};

const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Parser)]
#[command(name = "spectral-chaos", version, about = "Verification suites for Wiener-Itô integrals of stationary fields")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    suite: Suite,
}

#[derive(Subcommand)]
enum Suite {
    /// Orthogonality, bivariate covariance and expansions of Hermite polynomials.
    HermiteCheck(suites::hermite::HermiteArgs),
    /// Moments of H_m from diagrams, against quadrature and the moment bounds.
    DiagramMoments(suites::diagrams::DiagramArgs),
    /// Isometry, Itô's formula, shifts and change of variables for multiple integrals.
    ChaosVerify(suites::chaos::ChaosArgs),
    /// Rescaled spectral measures, the limiting measure and psi_N.
    SpectralLimit(suites::spectral::SpectralArgs),
    /// Monte Carlo of renormalized block sums of a subordinated field.
    Renormalize(suites::renormalize::RenormalizeArgs),
    /// Fractional Brownian motion covariance and its identities.
    Fbm(suites::fbm::FbmArgs),
    /// Tail bounds for |H_m| of a standard normal.
    Tails(suites::tails::TailArgs),
}

impl Suite {
    fn name(&self) -> &'static str {
        match self {
            Suite::HermiteCheck(_) => "hermite-check",
            Suite::DiagramMoments(_) => "diagram-moments",
            Suite::ChaosVerify(_) => "chaos-verify",
            Suite::SpectralLimit(_) => "spectral-limit",
            Suite::Renormalize(_) => "renormalize",
            Suite::Fbm(_) => "fbm",
            Suite::Tails(_) => "tails",
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<Option<Value>, ConfigError> {
    let Some(p) = path else { return Ok(None) };
    let text = std::fs::read_to_string(p).map_err(|e| ConfigError::new("config", format!("{}: {e}", p.display())))?;
    serde_json::from_str(&text).map(Some).map_err(|e| ConfigError::new("config", e.to_string()))
}

/// Merges the flags into the config file and runs the suite.
fn dispatch<T, F>(flags: &T, file: Option<&Value>, ctx: &Context, echo: &mut Value, run: F) -> Result<Outcome, SuiteError>
where
    T: Serialize + serde::de::DeserializeOwned,
    F: FnOnce(&T, &Context) -> Result<Outcome, SuiteError>,
{
    let args = merge(flags, file)?;
    *echo = serde_json::to_value(&args).unwrap_or(Value::Null);
    run(&args, ctx)
}

fn execute(suite: &Suite, file: Option<&Value>, ctx: &Context, echo: &mut Value) -> Result<Outcome, SuiteError> {
    match suite {
        Suite::HermiteCheck(a) => dispatch(a, file, ctx, echo, suites::hermite::run),
        Suite::DiagramMoments(a) => dispatch(a, file, ctx, echo, suites::diagrams::run),
        Suite::ChaosVerify(a) => dispatch(a, file, ctx, echo, suites::chaos::run),
        Suite::SpectralLimit(a) => dispatch(a, file, ctx, echo, suites::spectral::run),
        Suite::Renormalize(a) => dispatch(a, file, ctx, echo, suites::renormalize::run),
        Suite::Fbm(a) => dispatch(a, file, ctx, echo, suites::fbm::run),
        Suite::Tails(a) => dispatch(a, file, ctx, echo, suites::tails::run),
    }
}

fn file_u64(file: Option<&Value>, key: &str) -> Option<u64> {
    file.and_then(|v| v.get(key)).and_then(Value::as_u64)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.suite.name();
    let start = Instant::now();
    let common = &cli.common;
    let out = common.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let loaded = load_config(common.config.as_deref());
    let file = loaded.as_ref().ok().and_then(|v| v.as_ref());
    let seed = common.seed.or(file_u64(file, "seed")).unwrap_or(DEFAULT_SEED);
    let reps = common.reps.or(file_u64(file, "reps").map(|r| r as usize));
    let workers = common
        .workers
        .or(file_u64(file, "workers").map(|w| w as usize))
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let ctx = Context { seed, reps };
    let mut echo = Value::Null;

    let result: Result<Outcome, SuiteError> = match &loaded {
        Err(e) => Err(SuiteError::Config(ConfigError::new(&e.field, e.message.clone()))),
        Ok(_) if workers == 0 => Err(ConfigError::new("workers", "must be positive").into()),
        Ok(_) => match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(pool) => pool.install(|| execute(&cli.suite, file, &ctx, &mut echo)),
            Err(e) => Err(SuiteError::Run(spectral_chaos::Error::InvalidParameter(e.to_string()))),
        },
    };

    if let Err(e) = std::fs::create_dir_all(&out) {
        eprintln!("cannot create output directory {}: {e}", out.display());
        return ExitCode::from(1);
    }
    let mut config = serde_json::json!({ "suite_args": echo, "seed": seed, "reps": reps, "out": out });
    if let Some(p) = &common.config {
        config["config_file"] = Value::String(p.display().to_string());
    }
    let mut manifest = Manifest {
        suite: name.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        status: String::new(),
        config,
        seeds: vec![seed],
        workers,
        wall_time_seconds: 0.0,
        checks: Vec::new(),
        error: None,
    };
    let code = match result {
        Ok(outcome) => {
            let csv = out.join(format!("results_{name}.csv"));
            manifest.checks = outcome.checks;
            if !outcome.seeds.is_empty() {
                manifest.seeds = outcome.seeds;
            }
            match outcome.table.write_csv(&csv) {
                Err(e) => {
                    manifest.error = Some(e.to_string());
                    1
                }
                Ok(()) => {
                    let failed: Vec<&str> = manifest.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
                    for c in &manifest.checks {
                        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                    }
                    if failed.is_empty() {
                        0
                    } else {
                        eprintln!("failed checks: {}", failed.join(", "));
                        1
                    }
                }
            }
        }
        Err(SuiteError::Config(e)) => {
            eprintln!("{e}");
            manifest.error = Some(e.to_string());
            2
        }
        Err(SuiteError::Run(e)) => {
            eprintln!("error: {e}");
            manifest.error = Some(e.to_string());
            1
        }
    };
    manifest.status = match code {
        0 => "pass",
        2 => "config_error",
        _ if manifest.error.is_some() => "error",
        _ => "fail",
    }
    .to_string();
    manifest.wall_time_seconds = start.elapsed().as_secs_f64();
    if let Err(e) = manifest.write(&out.join("manifest.json")) {
        eprintln!("cannot write manifest: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}
