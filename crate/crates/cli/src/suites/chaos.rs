use std::sync::Arc;

use clap::Args;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use spectral_chaos::chaos::{
    change_of_variables, inner, integrate, ito_compare, GridKernel, RegularSystem, SpectralRealization,
};
use spectral_chaos::hermite::factorial;
use spectral_chaos::io::{Check, Table};
use spectral_chaos::spectral::{Grid, SpectralDensity};
use spectral_chaos::stats::{mean, moments};
use spectral_chaos::Result;

use super::{f, Context, Outcome, SuiteResult};
use crate::config::ConfigError;

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ChaosArgs {
    /// Highest order in the isometry check.
    #[arg(long)]
    pub max_order: Option<usize>,
    /// Replicates for the refinement study of Itô's formula.
    #[arg(long)]
    pub ito_reps: Option<usize>,
    /// Finest resolution per axis of the planar refinement study.
    #[arg(long)]
    pub ito_resolution: Option<usize>,
}

pub const ISOMETRY_RESOLUTION: usize = 8;
pub const Z_LIMIT: f64 = 4.0;
pub const ITO_TOLERANCE: f64 = 0.05;

fn line_system(res: usize) -> Result<Arc<RegularSystem>> {
    let g = SpectralDensity::from_fn(Grid::torus(1, res)?, |x| 1.0 + 0.5 * x[0].cos());
    Ok(Arc::new(RegularSystem::build(&g, res)?))
}

/// Kernel seeds live on their own stream, away from the realizations.
fn kernel_seed(seed: u64) -> u64 {
    seed ^ 0x6b65_726e_656c_7300
}

pub struct IsometryRow {
    pub order: usize,
    pub variance: f64,
    pub variance_se: f64,
    pub target: f64,
}

pub struct CrossRow {
    pub orders: (usize, usize),
    pub covariance: f64,
    pub se: f64,
}

/// Monte Carlo variances of `n! I(f_n)` for random Hermitian kernels, `n = 1..=max_order`,
/// and the covariances between different orders.
pub fn isometry(max_order: usize, reps: usize, seed: u64) -> Result<(Vec<IsometryRow>, Vec<CrossRow>)> {
    let sys = line_system(ISOMETRY_RESOLUTION)?;
    let kernels: Vec<GridKernel> = (1..=max_order)
        .map(|n| GridKernel::random_hermitian(sys.clone(), n, kernel_seed(seed), n as u64))
        .collect();
    let draws: Vec<Vec<f64>> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let w = SpectralRealization::sample(sys.clone(), seed, r);
            kernels.iter().map(|k| integrate(k, &w)).collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (i, k) in kernels.iter().enumerate() {
        let xs: Vec<f64> = draws.iter().map(|d| d[i]).collect();
        let m = moments(&xs)?;
        rows.push(IsometryRow {
            order: k.arity,
            variance: m.variance.value,
            variance_se: m.variance.se,
            target: factorial(k.arity) * k.symmetrize().norm_sq(),
        });
    }
    let mut cross = Vec::new();
    for a in 0..kernels.len() {
        for b in a + 1..kernels.len() {
            let xs: Vec<f64> = draws.iter().map(|d| d[a] * d[b]).collect();
            let e = mean(&xs);
            cross.push(CrossRow { orders: (a + 1, b + 1), covariance: e.value, se: e.se });
        }
    }
    Ok((rows, cross))
}

pub struct ItoRow {
    pub order: usize,
    pub resolution: usize,
    /// Root mean square of the difference over replicates, divided by `sqrt(n!)`.
    pub relative_rms: f64,
}

/// Both sides of Itô's formula on nested planar systems, from one fine realization per
/// replicate summed down to the coarser cells.
pub fn ito_refinement(finest: usize, reps: usize, seed: u64) -> Result<Vec<ItoRow>> {
    let density = SpectralDensity::from_fn(Grid::torus(2, finest)?, |x| 1.0 + 0.5 * x[0].cos() * x[1].cos());
    let mut resolutions = Vec::new();
    let mut r = 8;
    while r <= finest {
        resolutions.push(r);
        r *= 2;
    }
    let systems: Vec<Arc<RegularSystem>> =
        resolutions.iter().map(|&r| RegularSystem::build(&density, r).map(Arc::new)).collect::<Result<_>>()?;
    let phi_fn = |x: &[Vec<f64>]| {
        let x = &x[0];
        Complex64::new(1.0 + 0.3 * (x[0] - 0.5 * x[1]).cos(), 0.2 * x[0].sin())
    };
    let phis: Vec<GridKernel> = systems
        .iter()
        .map(|s| {
            let k = GridKernel::from_fn(s.clone(), 1, phi_fn);
            let n = inner(&k, &k).re.sqrt();
            k.scaled(1.0 / n)
        })
        .collect();
    let fine = systems.last().cloned().expect("at least one resolution");
    let orders = [2usize, 3];
    // per replicate: squared differences by (order, resolution)
    let sq: Vec<Vec<f64>> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let w = SpectralRealization::sample(fine.clone(), seed, rep);
            let mut out = Vec::new();
            for &n in &orders {
                for (s, phi) in systems.iter().zip(&phis) {
                    let ws = w.coarsen(s.clone())?;
                    let c = ito_compare(&[phi], &[n], &ws)?;
                    out.push(c.diff * c.diff);
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut col = 0;
    for &n in &orders {
        for &res in &resolutions {
            let ms: f64 = sq.iter().map(|v| v[col]).sum::<f64>() / reps as f64;
            rows.push(ItoRow { order: n, resolution: res, relative_rms: (ms / factorial(n)).sqrt() });
            col += 1;
        }
    }
    Ok(rows)
}

/// Largest `|int f_t dZ - int f dZ_t|` relative to the integral scale, over replicates.
fn shift_identity(reps: usize, seed: u64) -> Result<f64> {
    let sys = line_system(ISOMETRY_RESOLUTION)?;
    let k = GridKernel::random_hermitian(sys.clone(), 2, kernel_seed(seed), 100);
    let t = [1.5];
    let kt = k.shift(&t)?;
    let scale = (2.0 * k.symmetrize().norm_sq()).sqrt();
    let mut worst: f64 = 0.0;
    for r in 0..reps as u64 {
        let w = SpectralRealization::sample(sys.clone(), seed, r);
        let a = integrate(&kt, &w)?;
        let b = integrate(&k, &w.shifted(&t)?)?;
        worst = worst.max((a - b).abs() / scale);
    }
    Ok(worst)
}

pub struct ChangeOfVariables {
    /// `n! |Sym f|^2` under `G` and the transformed norm under `G'`.
    pub norm: f64,
    pub norm_transformed: f64,
    pub variance: f64,
    pub variance_se: f64,
}

fn change_of_vars(reps: usize, seed: u64) -> Result<ChangeOfVariables> {
    let sys = line_system(ISOMETRY_RESOLUTION)?;
    let g = |x: &[f64]| Complex64::from_polar((1.0 + 0.5 * x[0].cos()).sqrt(), 0.7 * x[0]);
    let masses = (0..sys.len()).map(|p| sys.mass(p) / g(&sys.center(p)).norm_sqr()).collect();
    let target = Arc::new(sys.with_masses(masses)?);
    let k = GridKernel::random_hermitian(sys.clone(), 2, kernel_seed(seed), 200);
    let kt = change_of_variables(&k, g, target.clone())?;
    let xs: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|r| integrate(&kt, &SpectralRealization::sample(target.clone(), seed, r)))
        .collect::<Result<_>>()?;
    let m = moments(&xs)?;
    Ok(ChangeOfVariables {
        norm: 2.0 * k.symmetrize().norm_sq(),
        norm_transformed: 2.0 * kt.symmetrize().norm_sq(),
        variance: m.variance.value,
        variance_se: m.variance.se,
    })
}

pub fn run(args: &ChaosArgs, ctx: &Context) -> SuiteResult {
    let max_order = args.max_order.unwrap_or(3);
    if !(1..=3).contains(&max_order) {
        return Err(ConfigError::new("max_order", "must lie in 1..=3").into());
    }
    let reps = ctx.reps.unwrap_or(10_000);
    if reps < 100 {
        return Err(ConfigError::new("reps", "need at least 100 replicates").into());
    }
    let ito_reps = args.ito_reps.unwrap_or(1000);
    if ito_reps == 0 {
        return Err(ConfigError::new("ito_reps", "must be positive").into());
    }
    let finest = args.ito_resolution.unwrap_or(64);
    if finest < 16 || !finest.is_power_of_two() {
        return Err(ConfigError::new("ito_resolution", "must be a power of two, at least 16").into());
    }
    let seed = ctx.seed;
    let mut table = Table::new(["part", "order", "resolution", "value", "reference", "se", "z"]);
    let mut checks = Vec::new();

    let (rows, cross) = isometry(max_order, reps, seed)?;
    let mut ok = true;
    for r in &rows {
        let z = (r.variance - r.target) / r.variance_se;
        ok &= z.abs() <= Z_LIMIT;
        table.push(vec![
            "isometry".into(), r.order.to_string(), ISOMETRY_RESOLUTION.to_string(),
            f(r.variance), f(r.target), f(r.variance_se), f(z),
        ]);
    }
    checks.push(Check::new("isometry", ok, format!("variances within {Z_LIMIT} SE of n! |Sym f|^2")));
    let mut ok = true;
    for c in &cross {
        let z = c.covariance / c.se;
        ok &= z.abs() <= Z_LIMIT;
        table.push(vec![
            "cross_covariance".into(), format!("{}x{}", c.orders.0, c.orders.1), ISOMETRY_RESOLUTION.to_string(),
            f(c.covariance), f(0.0), f(c.se), f(z),
        ]);
    }
    checks.push(Check::new("orthogonality of orders", ok, format!("covariances within {Z_LIMIT} SE of 0")));

    let ito = ito_refinement(finest, ito_reps, seed)?;
    let mut ok = true;
    for n in [2, 3] {
        let errs: Vec<&ItoRow> = ito.iter().filter(|r| r.order == n).collect();
        let monotone = errs.windows(2).all(|w| w[1].relative_rms < w[0].relative_rms);
        let last = errs.last().map_or(f64::INFINITY, |r| r.relative_rms);
        ok &= monotone && last < ITO_TOLERANCE;
        for r in errs {
            table.push(vec![
                "ito".into(), n.to_string(), r.resolution.to_string(),
                f(r.relative_rms), f(0.0), String::new(), String::new(),
            ]);
        }
    }
    checks.push(Check::new(
        "Ito refinement",
        ok,
        format!("errors decrease with resolution and the finest is below {ITO_TOLERANCE}"),
    ));

    let shift = shift_identity(200, seed)?;
    table.push(vec!["shift".into(), "2".into(), ISOMETRY_RESOLUTION.to_string(), f(shift), f(0.0), String::new(), String::new()]);
    checks.push(Check::new("shift identity", shift <= 1e-12, format!("largest relative difference {shift:.3e}")));

    let cv = change_of_vars(reps, seed)?;
    let z = (cv.variance - cv.norm) / cv.variance_se;
    let norm_gap = (cv.norm_transformed - cv.norm).abs() / cv.norm;
    table.push(vec![
        "change_of_variables".into(), "2".into(), ISOMETRY_RESOLUTION.to_string(),
        f(cv.variance), f(cv.norm), f(cv.variance_se), f(z),
    ]);
    checks.push(Check::new(
        "change of variables",
        norm_gap <= 1e-12 && z.abs() <= Z_LIMIT,
        format!("norm gap {norm_gap:.3e}, variance z {z:.2}"),
    ));
    Ok(Outcome { table, checks, seeds: vec![seed, kernel_seed(seed)] })
}
