use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use spectral_chaos::fbm::{check_self_similarity, check_stationary_increments, spectral_ratio, FbmMethod, FbmSampler, FbmSpec};
use spectral_chaos::io::{Check, Table};
use spectral_chaos::rng::Normals;
use spectral_chaos::stats::mean;

use super::{f, Context, Outcome, SuiteResult};
use crate::config::{parse_list, ConfigError};

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct FbmArgs {
    /// Hurst parameters, comma separated.
    #[arg(long)]
    pub hurst: Option<String>,
    /// Number of grid points 1/n, 2/n, ..., 1.
    #[arg(long)]
    pub grid: Option<usize>,
    /// cholesky or circulant (increments by circulant embedding, then partial sums).
    #[arg(long)]
    pub method: Option<String>,
    /// Number of random time pairs for the spectral ratio.
    #[arg(long)]
    pub ratio_pairs: Option<usize>,
}

pub const Z_LIMIT: f64 = 4.0;
pub const IDENTITY_TOL: f64 = 1e-12;
pub const RATIO_SPREAD_TOL: f64 = 1e-3;
pub const IMAG_TOL: f64 = 1e-9;

pub struct CovarianceDeviation {
    pub s: f64,
    pub t: f64,
    pub value: f64,
    pub reference: f64,
    pub se: f64,
}

/// Empirical `E X(s) X(t)` for every grid pair, with its standard error.
pub fn covariance_deviations(spec: &FbmSpec, method: FbmMethod, reps: usize, seed: u64) -> spectral_chaos::Result<Vec<CovarianceDeviation>> {
    let sampler = FbmSampler::new(spec, method)?;
    let paths: Vec<Vec<f64>> = (0..reps as u64).into_par_iter().map(|r| sampler.sample(seed, r)).collect();
    let n = spec.times.len();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            let prods: Vec<f64> = paths.iter().map(|p| p[i] * p[j]).collect();
            let e = mean(&prods);
            let (s, t) = (spec.times[i], spec.times[j]);
            out.push(CovarianceDeviation { s, t, value: e.value, reference: spec.covariance(s, t), se: e.se });
        }
    }
    Ok(out)
}

/// Time pairs drawn uniformly from `(0.05, 2)`.
pub fn ratio_pairs(count: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut u = Normals::new(seed, u64::MAX);
    (0..count).map(|_| (0.05 + 1.95 * u.uniform(), 0.05 + 1.95 * u.uniform())).collect()
}

pub fn run(args: &FbmArgs, ctx: &Context) -> SuiteResult {
    let hursts: Vec<f64> = parse_list("hurst", args.hurst.as_deref().unwrap_or("0.3,0.5,0.7"))?;
    if hursts.is_empty() || hursts.iter().any(|h| !(*h > 0.0 && *h < 1.0)) {
        return Err(ConfigError::new("hurst", "each value must lie in (0, 1)").into());
    }
    let grid = args.grid.unwrap_or(64);
    if !(2..=4096).contains(&grid) {
        return Err(ConfigError::new("grid", "must lie in 2..=4096").into());
    }
    let method: FbmMethod = args
        .method
        .as_deref()
        .unwrap_or("cholesky")
        .parse()
        .map_err(|_| ConfigError::new("method", "use cholesky or circulant"))?;
    let reps = ctx.reps.unwrap_or(10_000);
    if reps < 100 {
        return Err(ConfigError::new("reps", "need at least 100 replicates").into());
    }
    let n_pairs = args.ratio_pairs.unwrap_or(10);
    if n_pairs < 2 {
        return Err(ConfigError::new("ratio_pairs", "need at least 2 pairs").into());
    }
    let dt = 1.0 / grid as f64;
    let mut table = Table::new(["hurst", "quantity", "s", "t", "value", "reference", "se", "z"]);
    let mut cov_ok = true;
    let mut ident_ok = true;
    let mut ratio_ok = true;
    let mut worst_z: f64 = 0.0;
    let pairs = ratio_pairs(n_pairs, ctx.seed);
    let mut checks = Vec::new();
    for &h in &hursts {
        let spec = FbmSpec::uniform(h, grid, dt)?;
        for d in covariance_deviations(&spec, method, reps, ctx.seed)? {
            let z = (d.value - d.reference) / d.se;
            worst_z = worst_z.max(z.abs());
            cov_ok &= z.abs() <= Z_LIMIT;
            table.push(vec![f(h), "covariance".into(), f(d.s), f(d.t), f(d.value), f(d.reference), f(d.se), f(z)]);
        }
        for a in [0.5, 2.0, 3.0] {
            let e = check_self_similarity(&spec, a)?;
            ident_ok &= e <= IDENTITY_TOL;
            table.push(vec![f(h), "self_similarity".into(), f(a), String::new(), f(e), f(0.0), String::new(), String::new()]);
        }
        for u in [dt, 5.0 * dt, 0.37] {
            let e = check_stationary_increments(&spec, u)?;
            ident_ok &= e <= IDENTITY_TOL;
            table.push(vec![f(h), "stationary_increments".into(), f(u), String::new(), f(e), f(0.0), String::new(), String::new()]);
        }
        let ratio = spectral_ratio(h, &pairs)?;
        ratio_ok &= ratio.spread <= RATIO_SPREAD_TOL && ratio.max_imag < IMAG_TOL;
        for &(s, t, r) in &ratio.ratios {
            table.push(vec![f(h), "spectral_ratio".into(), f(s), f(t), f(r), String::new(), String::new(), String::new()]);
        }
        table.push(vec![f(h), "ratio_spread".into(), String::new(), String::new(), f(ratio.spread), f(0.0), String::new(), String::new()]);
        if h == 0.5 {
            // Brownian increments are uncorrelated
            let sampler = FbmSampler::new(&spec, method)?;
            let prods: Vec<f64> = (0..reps as u64)
                .into_par_iter()
                .map(|r| {
                    let p = sampler.sample(ctx.seed, r);
                    (p[1] - p[0]) * (p[2] - p[1]) / dt
                })
                .collect();
            let e = mean(&prods);
            let z = e.value / e.se;
            table.push(vec![f(h), "increment_lag1".into(), f(dt), f(2.0 * dt), f(e.value), f(0.0), f(e.se), f(z)]);
            checks.push(Check::new("Brownian increments", z.abs() <= Z_LIMIT, format!("lag-1 increment covariance z = {z:.2}")));
        }
    }
    checks.insert(0, Check::new("covariance", cov_ok, format!("largest |z| over all pairs {worst_z:.2}")));
    checks.insert(1, Check::new("covariance identities", ident_ok, format!("self-similarity and increments to {IDENTITY_TOL:e}")));
    checks.insert(2, Check::new("spectral ratio", ratio_ok, format!("ratio spread at most {RATIO_SPREAD_TOL:e}, imaginary part below {IMAG_TOL:e}")));
    Ok(Outcome { table, checks, seeds: vec![ctx.seed] })
}
