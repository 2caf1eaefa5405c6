use clap::Args;
use serde::{Deserialize, Serialize};
use spectral_chaos::hermite::{expand_function, factorial, hermite, hermite_covariance, GaussHermiteRule};
use spectral_chaos::io::{Check, Table};

use super::{f, Context, Outcome, SuiteResult};
use crate::config::ConfigError;

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct HermiteArgs {
    /// Highest polynomial order checked.
    #[arg(long)]
    pub max_order: Option<usize>,
    /// Gauss-Hermite nodes per axis.
    #[arg(long)]
    pub nodes: Option<usize>,
}

const TOL: f64 = 1e-9;

pub fn run(args: &HermiteArgs, _ctx: &Context) -> SuiteResult {
    let max_order = args.max_order.unwrap_or(8);
    let nodes = args.nodes.unwrap_or(60);
    if nodes <= max_order {
        return Err(ConfigError::new("nodes", "must exceed max_order").into());
    }
    let rule = GaussHermiteRule::new(nodes)?;
    let mut table = Table::new(["quantity", "j", "l", "r", "value", "reference", "abs_diff"]);
    let mut worst_orth: f64 = 0.0;
    let mut worst_cov: f64 = 0.0;
    for j in 0..=max_order {
        for l in 0..=max_order {
            let v = rule.expect(|x| hermite(j, x) * hermite(l, x));
            let want = if j == l { factorial(j) } else { 0.0 };
            let d = (v - want).abs();
            worst_orth = worst_orth.max(d / factorial(j.max(l)));
            table.push(vec!["orthogonality".into(), j.to_string(), l.to_string(), f(1.0), f(v), f(want), f(d)]);
        }
    }
    // E H_j(X) H_l(Y) for X = Z1, Y = r Z1 + sqrt(1 - r^2) Z2
    for r in [-0.7f64, 0.0, 0.3, 0.9] {
        let s = (1.0 - r * r).sqrt();
        for j in 0..=max_order.min(6) {
            for l in 0..=max_order.min(6) {
                let v = rule.expect(|z1| rule.expect(|z2| hermite(j, z1) * hermite(l, r * z1 + s * z2)));
                let want = hermite_covariance(j, l, r);
                let d = (v - want).abs();
                worst_cov = worst_cov.max(d / factorial(j.max(l)));
                table.push(vec!["bivariate_covariance".into(), j.to_string(), l.to_string(), f(r), f(v), f(want), f(d)]);
            }
        }
    }
    // e^x = e^{1/2} sum H_j(x) / j!
    let exp = expand_function(f64::exp, max_order.max(12), nodes.max(13))?;
    let mut worst_exp: f64 = 0.0;
    for (j, c) in exp.coeffs.iter().enumerate().take(max_order + 1) {
        let want = 0.5f64.exp() / factorial(j);
        let d = (c - want).abs();
        worst_exp = worst_exp.max(d);
        table.push(vec!["expansion_exp".into(), j.to_string(), String::new(), String::new(), f(*c), f(want), f(d)]);
    }
    let checks = vec![
        Check::new("orthogonality", worst_orth <= TOL, format!("max relative deviation {worst_orth:.3e}")),
        Check::new("bivariate covariance", worst_cov <= TOL, format!("max relative deviation {worst_cov:.3e}")),
        Check::new("expansion of exp", worst_exp <= TOL, format!("max coefficient deviation {worst_exp:.3e}")),
    ];
    Ok(Outcome { table, checks, seeds: vec![] })
}
