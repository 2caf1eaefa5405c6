use clap::Args;
use serde::{Deserialize, Serialize};
use spectral_chaos::hermite::hermite;
use spectral_chaos::io::{Check, Table};
use spectral_chaos::tails::tail_study;

use super::{f, Context, Outcome, SuiteResult};
use crate::config::{parse_list, ConfigError};

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct TailArgs {
    /// Chaos orders, comma separated.
    #[arg(long)]
    pub orders: Option<String>,
    /// Points of the survival curve per order.
    #[arg(long)]
    pub points: Option<usize>,
    /// Right end of the curve as |H_m(z)| at this standard normal quantile.
    #[arg(long)]
    pub z_max: Option<f64>,
}

pub const SLOPE_RANGE: (f64, f64) = (0.8, 1.2);

pub fn run(args: &TailArgs, ctx: &Context) -> SuiteResult {
    let orders: Vec<usize> = parse_list("orders", args.orders.as_deref().unwrap_or("1,2,3"))?;
    if orders.is_empty() || orders.iter().any(|m| !(1..=6).contains(m)) {
        return Err(ConfigError::new("orders", "each order must lie in 1..=6").into());
    }
    let points = args.points.unwrap_or(24);
    if points < 2 {
        return Err(ConfigError::new("points", "need at least 2").into());
    }
    let z_max = args.z_max.unwrap_or(4.42);
    if !(z_max > 1.0) {
        return Err(ConfigError::new("z_max", "must exceed 1").into());
    }
    let reps = ctx.reps.unwrap_or(1_000_000);
    if reps < 1000 {
        return Err(ConfigError::new("reps", "need at least 1000 draws").into());
    }
    let mut table = Table::new(["m", "x", "events", "empirical", "bound"]);
    let mut below = true;
    let mut slopes_ok = true;
    let mut slopes = Vec::new();
    for &m in &orders {
        let report = tail_study(m, hermite(m, z_max).abs(), points, reps, ctx.seed)?;
        below &= report.below_bound;
        let r = report.slope_ratio();
        slopes_ok &= (SLOPE_RANGE.0..=SLOPE_RANGE.1).contains(&r);
        slopes.push(format!("m={m}: {r:.3}"));
        for p in &report.points {
            table.push(vec![m.to_string(), f(p.x), p.events.to_string(), f(p.survival), f(p.bound)]);
        }
    }
    let checks = vec![
        Check::new("survival below bound", below, "every point above x0"),
        Check::new(
            "log-survival slope",
            slopes_ok,
            format!("slope / (2/m) in [{}, {}]: {}", SLOPE_RANGE.0, SLOPE_RANGE.1, slopes.join(", ")),
        ),
    ];
    Ok(Outcome { table, checks, seeds: vec![ctx.seed] })
}
