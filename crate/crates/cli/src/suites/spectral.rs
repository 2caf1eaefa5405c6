use clap::Args;
use serde::{Deserialize, Serialize};
use spectral_chaos::fields::psi_limit_check;
use spectral_chaos::io::{Check, Table};
use spectral_chaos::spectral::limit::{check_box_identity, fit_limit, homogeneity_ratio, LimitMeasure};
use spectral_chaos::spectral::{density_from_model, CorrelationModel, Grid, Regularizer};

use super::{f, Context, Outcome, SuiteResult};
use crate::config::{parse_list, ConfigError};

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct SpectralArgs {
    /// Decay exponents, comma separated.
    #[arg(long)]
    pub alphas: Option<String>,
    /// Rescaling parameters N, comma separated; the largest is used for the checks.
    #[arg(long = "N")]
    pub n: Option<String>,
    /// Cells of the fine spectral grid, as a power of two.
    #[arg(long)]
    pub log2_cells: Option<u32>,
    /// Block sizes for the psi_N table, comma separated.
    #[arg(long)]
    pub psi_n: Option<String>,
}

pub const HOMOGENEITY_TOL: f64 = 0.02;
pub const IDENTITY_TOL: f64 = 1e-3;
const PROBE: ([f64; 1], [f64; 1]) = ([0.5], [2.0]);
const PSI_POINTS: [f64; 2] = [0.5, -0.25];

pub fn run(args: &SpectralArgs, _ctx: &Context) -> SuiteResult {
    let alphas: Vec<f64> = parse_list("alphas", args.alphas.as_deref().unwrap_or("0.3,0.5"))?;
    if alphas.is_empty() || alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
        return Err(ConfigError::new("alphas", "each must lie in (0, 1)").into());
    }
    let ns: Vec<f64> = parse_list("N", args.n.as_deref().unwrap_or("64,128,256"))?;
    if ns.is_empty() || ns.iter().any(|n| !(*n >= 1.0)) {
        return Err(ConfigError::new("N", "values must be at least 1").into());
    }
    let log2_cells = args.log2_cells.unwrap_or(18);
    if !(10..=24).contains(&log2_cells) {
        return Err(ConfigError::new("log2_cells", "must lie in 10..=24").into());
    }
    let n_max = ns.iter().cloned().fold(0.0, f64::max);
    // the dilated torus must hold the largest probe box 4 A
    if n_max * std::f64::consts::PI <= 4.0 * PROBE.1[0] {
        return Err(ConfigError::new("N", "largest N is too small for the probe boxes").into());
    }
    let psi_ns: Vec<usize> = parse_list("psi_n", args.psi_n.as_deref().unwrap_or("64,128,256,512"))?;

    let mut table = Table::new(["quantity", "alpha", "N", "t", "value", "reference", "rel_diff"]);
    let mut checks = Vec::new();
    let mut homog_ok = true;
    let mut ident_ok = true;
    for &alpha in &alphas {
        let model = CorrelationModel::power_law(1, alpha)?;
        let exact_c = LimitMeasure::from_model(&model).c;
        let g = density_from_model(&model, &Regularizer::default(), &Grid::torus(1, 1 << log2_cells)?)?;
        for &n in &ns {
            let fit = fit_limit(&g, &model, n, &PROBE.0, &PROBE.1)?;
            let c = fit.measure.c;
            table.push(vec!["fitted_c".into(), f(alpha), f(n), String::new(), f(c), f(exact_c), f((c - exact_c).abs() / exact_c)]);
        }
        for t in [2.0, 4.0] {
            let ratio = homogeneity_ratio(&g, &model, n_max, &PROBE.0, &PROBE.1, t)?;
            let want = t.powf(alpha);
            let rel = (ratio - want).abs() / want;
            homog_ok &= rel <= HOMOGENEITY_TOL;
            table.push(vec!["homogeneity".into(), f(alpha), f(n_max), f(t), f(ratio), f(want), f(rel)]);
        }
        let limit = LimitMeasure::from_model(&model);
        for t in [0.0, 0.5] {
            let r = check_box_identity(&limit, &model.angular, &[t], 0)?;
            let rel = r.diff.abs() / r.rhs.abs();
            ident_ok &= rel <= IDENTITY_TOL;
            table.push(vec!["box_identity".into(), f(alpha), String::new(), f(t), f(r.lhs), f(r.rhs), f(rel)]);
        }
        let ts: Vec<Vec<f64>> = PSI_POINTS.iter().map(|&t| vec![t]).collect();
        if ts.len() as f64 * alpha < 1.0 {
            let psi = psi_limit_check(&model, &ts, &psi_ns, 1e-3)?;
            for row in &psi.rows {
                table.push(vec![
                    "psi_N".into(), f(alpha), row.n.to_string(), String::new(),
                    f(row.psi_n), f(psi.limit.psi0), f(row.gap / psi.limit.psi0.abs()),
                ]);
            }
            checks.push(Check::new(
                format!("psi_N convergence (alpha {alpha})"),
                psi.decreasing,
                "gap to psi_0 does not increase with N",
            ));
        }
    }
    checks.insert(0, Check::new("homogeneity", homog_ok, format!("G_N(tA)/G_N(A) within {HOMOGENEITY_TOL} of t^alpha")));
    checks.insert(1, Check::new("box identity", ident_ok, format!("both sides agree to {IDENTITY_TOL}")));
    Ok(Outcome { table, checks, seeds: vec![] })
}
