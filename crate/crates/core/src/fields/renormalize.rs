use serde::{Deserialize, Serialize};

use super::simulate::FieldSample;
use crate::error::{invalid, Error, Result};
use crate::spectral::Correlation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormingRegime {
    /// `A_N = N^(nu - k alpha / 2) L(N)^(k/2)`, for Hermite rank `k` with `k alpha < nu`.
    Noncentral { k: usize },
    /// `A_N = N^(nu/2)`.
    Central,
}

/// The norming constant `A_N`.
pub fn norming(corr: &Correlation, n: usize, regime: NormingRegime) -> Result<f64> {
    if n == 0 {
        return Err(invalid("block size must be positive"));
    }
    let nf = n as f64;
    let nu = corr.nu() as f64;
    match regime {
        NormingRegime::Central => Ok(nf.powf(nu / 2.0)),
        NormingRegime::Noncentral { k } => {
            let model = corr
                .model()
                .ok_or_else(|| invalid("noncentral norming needs a long-range dependent correlation"))?;
            if k == 0 {
                return Err(invalid("Hermite rank must be at least 1"));
            }
            if k as f64 * model.alpha >= nu {
                return Err(Error::NoncentralDivergent { k, alpha: model.alpha, nu: model.nu });
            }
            let l = model.slowly_varying.eval(nf);
            Ok(nf.powf(nu - k as f64 * model.alpha / 2.0) * l.powf(k as f64 / 2.0))
        }
    }
}

/// `Z_n^N = A_N^{-1} sum_{j in B_n^N} xi_j` over all full blocks of side `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct RenormalizedField {
    pub block: usize,
    pub norming: f64,
    /// Blocks per axis.
    pub shape: Vec<usize>,
    /// Row-major over the reduced lattice.
    pub values: Vec<f64>,
}

pub fn renormalize(xi: &FieldSample, n: usize, norming: f64) -> Result<RenormalizedField> {
    if n == 0 || xi.shape.iter().any(|&s| s % n != 0) {
        return Err(invalid(format!("box {:?} is not divisible by the block size {n}", xi.shape)));
    }
    if !(norming > 0.0) {
        return Err(invalid("norming constant must be positive"));
    }
    let shape: Vec<usize> = xi.shape.iter().map(|&s| s / n).collect();
    let mut values = vec![0.0; shape.iter().product()];
    for (flat, &v) in xi.values.iter().enumerate() {
        let mut rest = flat;
        let mut block = 0;
        let mut mult = 1;
        for d in (0..xi.shape.len()).rev() {
            let i = rest % xi.shape[d];
            rest /= xi.shape[d];
            block += (i / n) * mult;
            mult *= shape[d];
        }
        values[block] += v;
    }
    for v in &mut values {
        *v /= norming;
    }
    Ok(RenormalizedField { block: n, norming, shape, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::CorrelationModel;

    fn sample(shape: Vec<usize>, values: Vec<f64>) -> FieldSample {
        FieldSample { shape, values, correlation: None, seed: 0, replicate: 0 }
    }

    #[test]
    fn unit_blocks_divide_by_norming() {
        let xi = sample(vec![4], vec![1.0, -2.0, 3.0, 0.5]);
        let z = renormalize(&xi, 1, 2.0).unwrap();
        assert_eq!(z.values, vec![0.5, -1.0, 1.5, 0.25]);
    }

    #[test]
    fn planar_blocks() {
        let xi = sample(vec![4, 4], (0..16).map(|v| v as f64).collect());
        let z = renormalize(&xi, 2, 1.0).unwrap();
        assert_eq!(z.shape, vec![2, 2]);
        assert_eq!(z.values, vec![0.0 + 1.0 + 4.0 + 5.0, 2.0 + 3.0 + 6.0 + 7.0, 8.0 + 9.0 + 12.0 + 13.0, 10.0 + 11.0 + 14.0 + 15.0]);
        assert!(renormalize(&xi, 3, 1.0).is_err());
    }

    #[test]
    fn noncentral_refused_beyond_threshold() {
        let corr = Correlation::PowerLaw(CorrelationModel::power_law(1, 0.6).unwrap());
        assert!(norming(&corr, 16, NormingRegime::Noncentral { k: 1 }).is_ok());
        assert!(matches!(norming(&corr, 16, NormingRegime::Noncentral { k: 2 }), Err(Error::NoncentralDivergent { .. })));
        let a = norming(&corr, 16, NormingRegime::Noncentral { k: 1 }).unwrap();
        assert!((a - 16f64.powf(0.7)).abs() < 1e-12);
        assert_eq!(norming(&corr, 16, NormingRegime::Central).unwrap(), 4.0);
    }
}
