use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::spectral::limit::{psi_0, psi_n, PsiLimit};
use crate::spectral::CorrelationModel;
use crate::stats::{moments, Moments};

pub const MIN_REPLICATES: usize = 1000;

/// Standard errors within which skewness and excess kurtosis count as zero.
pub const GAUSSIAN_Z: f64 = 4.0;

#[derive(Debug, Clone, Serialize)]
pub struct LimitReport {
    pub moments: Moments,
    /// Skewness and excess kurtosis both within [`GAUSSIAN_Z`] standard errors of 0.
    pub gaussian: bool,
}

pub fn limit_diagnostics(samples: &[f64]) -> Result<LimitReport> {
    if samples.len() < MIN_REPLICATES {
        return Err(Error::InsufficientSamples { n: samples.len(), min: MIN_REPLICATES });
    }
    let m = moments(samples)?;
    let gaussian = m.skewness.within(0.0, GAUSSIAN_Z) && m.excess_kurtosis.within(0.0, GAUSSIAN_Z);
    Ok(LimitReport { moments: m, gaussian })
}

#[derive(Debug, Clone, Serialize)]
pub struct PsiRow {
    pub n: usize,
    pub psi_n: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PsiTable {
    pub limit: PsiLimit,
    pub rows: Vec<PsiRow>,
    /// `|psi_N - psi_0|` never increases along the block sizes.
    pub decreasing: bool,
}

/// `psi_N(t)` along `ns` against its limit `psi_0(t)`.
pub fn psi_limit_check(model: &CorrelationModel, ts: &[Vec<f64>], ns: &[usize], eps: f64) -> Result<PsiTable> {
    let k = ts.len();
    if k == 0 {
        return Err(invalid("need at least one point"));
    }
    if k as f64 * model.alpha >= model.nu as f64 {
        return Err(Error::NoncentralDivergent { k, alpha: model.alpha, nu: model.nu });
    }
    let limit = psi_0(model, ts, eps)?;
    if !limit.psi0.is_finite() {
        return Err(Error::Quadrature(format!("limit integral at {ts:?} is not finite")));
    }
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let v = psi_n(model, ts, n)?;
        rows.push(PsiRow { n, psi_n: v, gap: (v - limit.psi0).abs() });
    }
    let decreasing = rows.windows(2).all(|w| w[1].gap <= w[0].gap);
    Ok(PsiTable { limit, rows, decreasing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Normals;

    #[test]
    fn gaussian_verdict_on_normals() {
        let mut g = Normals::new(5, 0);
        let xs: Vec<f64> = (0..10_000).map(|_| g.next()).collect();
        assert!(limit_diagnostics(&xs).unwrap().gaussian);
        let sq: Vec<f64> = xs.iter().map(|x| x * x - 1.0).collect();
        assert!(!limit_diagnostics(&sq).unwrap().gaussian);
        assert!(limit_diagnostics(&xs[..999]).is_err());
    }

    #[test]
    fn psi_gap_shrinks() {
        let model = CorrelationModel::power_law(1, 0.3).unwrap();
        let t = psi_limit_check(&model, &[vec![0.5], vec![-0.25]], &[1 << 10, 1 << 12], 1e-3).unwrap();
        assert!(t.rows[1].gap < 2.0 * t.rows[0].gap);
        assert!(psi_limit_check(&model, &vec![vec![0.0]; 4], &[16], 1e-3).is_err());
    }
}
