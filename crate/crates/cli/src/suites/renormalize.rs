use clap::Args;
use serde::{Deserialize, Serialize};
use spectral_chaos::fields::{
    check_summable, limit_diagnostics, sigma_total, variance_exact, BlockExperiment, NormingRegime, Subordinator,
    MIN_REPLICATES,
};
use spectral_chaos::io::{Check, Table};
use spectral_chaos::spectral::Correlation;

use super::{f, Context, Outcome, SuiteResult};
use crate::config::{expansion, method, parse_list, regime, ConfigError, ModelArgs};

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct RenormalizeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Hermite rank of the subordinating function (H_k when no coefficients are given).
    #[arg(long)]
    pub k: Option<usize>,
    /// Hermite coefficients c_0, c_1, ... of the subordinating function.
    #[arg(long)]
    pub coeffs: Option<String>,
    /// noncentral (A_N = N^(nu - k alpha/2) L(N)^(k/2)) or central (A_N = N^(nu/2)).
    #[arg(long)]
    pub regime: Option<String>,
    /// Block sizes, comma separated.
    #[arg(long = "N")]
    pub n: Option<String>,
    /// Field simulation method: circulant or cholesky.
    #[arg(long)]
    pub method: Option<String>,
}

pub const Z_LIMIT: f64 = 4.0;

pub fn run(args: &RenormalizeArgs, ctx: &Context) -> SuiteResult {
    let model = args.model.model(0.3)?;
    let h = expansion(args.k, args.coeffs.as_deref())?;
    let rank = h.rank.expect("checked by expansion");
    let regime = regime(args.regime.as_deref(), rank)?;
    let method = method(args.method.as_deref())?;
    let ns: Vec<usize> = parse_list("N", args.n.as_deref().unwrap_or("128,256,512"))?;
    if ns.is_empty() || ns.contains(&0) {
        return Err(ConfigError::new("N", "need positive block sizes").into());
    }
    let reps = ctx.reps.unwrap_or(2000);
    if reps < MIN_REPLICATES {
        return Err(ConfigError::new("reps", format!("need at least {MIN_REPLICATES} replicates")).into());
    }
    let nu = model.nu;
    let corr = Correlation::PowerLaw(model);
    let limit_variance = match regime {
        NormingRegime::Noncentral { k } if k as f64 * model.alpha >= nu as f64 => {
            return Err(ConfigError::new("regime", format!("noncentral needs k alpha < nu, got k = {k}, alpha = {}", model.alpha)).into())
        }
        NormingRegime::Noncentral { .. } => None,
        NormingRegime::Central => {
            check_summable(&corr, rank)?;
            Some(sigma_total(&h, &corr)?)
        }
    };

    let mut table = Table::new([
        "n", "norming", "exact_variance", "limit_variance", "mean", "mean_se", "variance", "variance_se",
        "skewness", "skewness_se", "excess_kurtosis", "excess_kurtosis_se", "gaussian",
    ]);
    let mut variance_ok = true;
    let mut last = None;
    for &n in &ns {
        let exp = BlockExperiment {
            correlation: corr.clone(),
            subordinator: Subordinator::Hermite(h.clone()),
            method,
            block: n,
            blocks: 1,
            regime,
        };
        let samples = exp.run(ctx.seed, reps)?;
        let xs = samples.block(0);
        let exact = variance_exact(&corr, &h, n, samples.norming)?;
        let report = limit_diagnostics(&xs)?;
        let m = report.moments;
        variance_ok &= m.variance.within(exact, Z_LIMIT);
        table.push(vec![
            n.to_string(), f(samples.norming), f(exact), limit_variance.map(f).unwrap_or_default(),
            f(m.mean.value), f(m.mean.se), f(m.variance.value), f(m.variance.se),
            f(m.skewness.value), f(m.skewness.se), f(m.excess_kurtosis.value), f(m.excess_kurtosis.se),
            report.gaussian.to_string(),
        ]);
        last = Some(report);
    }
    let mut checks = vec![Check::new("variance", variance_ok, format!("MC variance within {Z_LIMIT} SE of the exact block variance"))];
    let last = last.expect("at least one block size");
    match regime {
        NormingRegime::Central => {
            checks.push(Check::new("Gaussian limit", last.gaussian, "skewness and excess kurtosis within 4 SE of 0 at the largest N"));
        }
        NormingRegime::Noncentral { k } if k % 2 == 0 => {
            let z = last.moments.skewness.z(0.0);
            checks.push(Check::new("non-Gaussian limit", z > Z_LIMIT, format!("skewness {z:.2} SE above 0 at the largest N")));
        }
        NormingRegime::Noncentral { .. } => {}
    }
    Ok(Outcome { table, checks, seeds: vec![ctx.seed] })
}
