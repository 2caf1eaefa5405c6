use clap::Args;
use serde::{Deserialize, Serialize};
use spectral_chaos::diagrams::{count_complete, moment_hermite, MAX_ENUMERATION_ARITY};
use spectral_chaos::hermite::{hermite, GaussHermiteRule};
use spectral_chaos::io::{Check, Table};
use spectral_chaos::tails::moment_bound;

use super::{f, Context, Outcome, SuiteResult};
use crate::config::ConfigError;

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct DiagramArgs {
    /// Row length, the Hermite order.
    #[arg(long)]
    pub m: Option<usize>,
    /// Largest number of rows.
    #[arg(long)]
    pub max_rows: Option<usize>,
}

pub fn run(args: &DiagramArgs, _ctx: &Context) -> SuiteResult {
    let m = args.m.unwrap_or(2);
    let max_rows = args.max_rows.unwrap_or(4);
    if m == 0 {
        return Err(ConfigError::new("m", "must be positive").into());
    }
    if max_rows == 0 || m * max_rows > MAX_ENUMERATION_ARITY {
        return Err(ConfigError::new("max_rows", format!("m * max_rows must lie in 1..={MAX_ENUMERATION_ARITY}")).into());
    }
    let rule = GaussHermiteRule::new(m * max_rows / 2 + 2)?;
    let mut table = Table::new(["rows", "enumerated", "counted", "quadrature", "rel_diff", "diagram_bound", "double_factorial_bound"]);
    let mut agree = true;
    let mut bounded = true;
    for p in 1..=max_rows {
        let exact = moment_hermite(m, p)?;
        let counted = count_complete(&vec![m; p]) as f64;
        let quad = rule.expect(|x| hermite(m, x).powi(p as i32));
        let rel = (exact - quad).abs() / quad.abs().max(1.0);
        agree &= rel <= 1e-9 && exact == counted;
        let (db, dfb) = if p % 2 == 0 {
            let b = moment_bound(m, p / 2, spectral_chaos::hermite::factorial(m))?;
            bounded &= exact <= b.diagram && b.diagram <= b.double_factorial;
            (f(b.diagram), f(b.double_factorial))
        } else {
            (String::new(), String::new())
        };
        table.push(vec![p.to_string(), f(exact), f(counted), f(quad), f(rel), db, dfb]);
    }
    let checks = vec![
        Check::new("moments", agree, "enumeration, counting and quadrature agree to 1e-9"),
        Check::new("moment bounds", bounded, "even moments below both bounds"),
    ];
    Ok(Outcome { table, checks, seeds: vec![] })
}
