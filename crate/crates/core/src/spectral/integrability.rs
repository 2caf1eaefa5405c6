//! Iterated Riesz-type convolutions `J_{kappa,k}` and the finiteness of the
//! self-similar variance integral they control.

use serde::{Deserialize, Serialize};

use super::limit::{fourier_side, LimitMeasure};
use super::model::AngularFactor;
use crate::error::{invalid, Result};
use crate::quad;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfSimilarParams {
    pub nu: usize,
    pub kappa: f64,
    pub k: usize,
}

/// Upper end of the default cutoff ladder.
pub const MAX_CUTOFF_DOUBLINGS: u32 = 100;

/// Relative growth per cutoff doubling below which an integral counts as finite.
pub const GROWTH_TOL: f64 = 0.01;

/// `int_{|y| < R} |y|^(a - nu) |x - y|^(b - nu) dy` with `|x| = x_norm`; `None` means
/// the whole space, with the far tail added from its leading asymptotics.
pub fn convolution(nu: usize, a: f64, b: f64, x_norm: f64, cutoff: Option<f64>) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Ok(f64::INFINITY);
    }
    let r_max = cutoff.unwrap_or(f64::INFINITY);
    if r_max <= 2.0 * x_norm {
        return Err(invalid("cutoff must exceed twice the evaluation radius"));
    }
    let s = x_norm;
    let nuf = nu as f64;
    let far_exponent = a + b - nuf;
    let finite_end = if r_max.is_finite() { r_max } else { 1e30 * s };
    match nu {
        1 => {
            let f = |y: f64| y.abs().powf(a - 1.0) * (s - y).abs().powf(b - 1.0);
            // near y = s the integrand is written in the offset t = y - s
            let g = |t: f64| (s + t).abs().powf(a - 1.0) * t.abs().powf(b - 1.0);
            let mut total = quad::endpoint_singular(f, 0.0, -s, 1.0 - a)
                + quad::endpoint_singular(f, 0.0, 0.5 * s, 1.0 - a)
                + quad::offset_singular(g, -0.5 * s, 1.0 - b)
                + quad::offset_singular(g, s, 1.0 - b);
            total += quad::logarithmic(f, 2.0 * s, finite_end, 4);
            total += quad::logarithmic(|x| f(-x), s, finite_end, 4);
            if !r_max.is_finite() {
                if far_exponent >= 0.0 {
                    return Ok(f64::INFINITY);
                }
                total += 2.0 * finite_end.powf(far_exponent) / -far_exponent;
            }
            Ok(total)
        }
        2 => {
            // polar coordinates around the origin with x on the first axis;
            // |x - y|^2 = t^2 + 4 s rho sin^2(theta/2) with t = rho - s
            let angular = |rho: f64, t: f64| -> f64 {
                let g = |th: f64| {
                    let h = (0.5 * th).sin();
                    (t * t + 4.0 * s * rho * h * h).powf(0.5 * (b - 2.0))
                };
                2.0 * std::f64::consts::PI * quad::graded_unit(|u| g(std::f64::consts::PI * u), 40, 12)
            };
            let f = |rho: f64| rho.powf(a - 1.0) * angular(rho, rho - s);
            let g = |t: f64| (s + t).powf(a - 1.0) * angular(s + t, t);
            let mut total = quad::endpoint_singular(f, 0.0, 0.5 * s, 1.0 - a)
                + quad::offset_singular(g, -0.5 * s, 1.0 - b)
                + quad::offset_singular(g, s, 1.0 - b);
            total += quad::logarithmic(f, 2.0 * s, finite_end, 2);
            if !r_max.is_finite() {
                if far_exponent >= 0.0 {
                    return Ok(f64::INFINITY);
                }
                total += 2.0 * std::f64::consts::PI * finite_end.powf(far_exponent) / -far_exponent;
            }
            Ok(total)
        }
        _ => Err(invalid(format!("dimension {nu} is not supported"))),
    }
}

/// Constant `C` with `J_{kappa,k}(x) = C |x|^(2 kappa k - nu)`, each convolution
/// truncated at `cutoff`.
pub fn j_constant(p: &SelfSimilarParams, cutoff: Option<f64>) -> Result<f64> {
    let mut c = 1.0;
    for j in 2..=p.k {
        c *= convolution(p.nu, 2.0 * p.kappa * (j - 1) as f64, 2.0 * p.kappa, 1.0, cutoff)?;
        if !c.is_finite() {
            return Ok(f64::INFINITY);
        }
    }
    Ok(c)
}

/// `J_{kappa,k}(x)`: the last convolution is evaluated directly at `|x|`, the earlier
/// ones through their homogeneity.
pub fn j_kappa_k(p: &SelfSimilarParams, x: &[f64]) -> Result<f64> {
    if x.len() != p.nu {
        return Err(invalid("point dimension does not match"));
    }
    if !(p.kappa > 0.0) || p.k == 0 {
        return Ok(f64::INFINITY);
    }
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if p.k == 1 {
        return Ok(r.powf(2.0 * p.kappa - p.nu as f64));
    }
    let lower = SelfSimilarParams { k: p.k - 1, ..*p };
    let c = j_constant(&lower, None)?;
    let a = 2.0 * p.kappa * (p.k - 1) as f64;
    Ok(c * convolution(p.nu, a, 2.0 * p.kappa, r, None)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegrabilityVerdict {
    pub finite: bool,
    /// `D(0)` at the largest cutoff, or infinity.
    pub value: f64,
    /// Relative growth over the last cutoff doubling.
    pub growth: f64,
    /// `(cutoff, D(0) truncated at cutoff)`.
    pub table: Vec<(f64, f64)>,
}

/// `D(0) = int |chi_0(x)|^2 J_{kappa,k}(x) dx` where `chi_0` is the transform of the
/// unit cube, under growing cutoffs on every convolution variable.
pub fn check_integrability(p: &SelfSimilarParams) -> Result<IntegrabilityVerdict> {
    if !(p.kappa > 0.0) {
        return Ok(IntegrabilityVerdict { finite: false, value: f64::INFINITY, growth: f64::INFINITY, table: vec![] });
    }
    let s = 2.0 * p.kappa * p.k as f64;
    if s >= p.nu as f64 + 1.0 {
        // the outer integral against the Fejér kernel already diverges
        return Ok(IntegrabilityVerdict { finite: false, value: f64::INFINITY, growth: f64::INFINITY, table: vec![] });
    }
    let unit = LimitMeasure { nu: p.nu, alpha: s, c: 1.0, shape: AngularFactor::one() };
    let q = fourier_side(&unit, &vec![0.0; p.nu], 1)?;
    let mut table = Vec::new();
    let n = MAX_CUTOFF_DOUBLINGS;
    for e in (10..n).step_by(10).chain([n - 1, n]) {
        let r = 2f64.powi(e as i32);
        table.push((r, j_constant(p, Some(r))? * q));
    }
    let last = table[table.len() - 1].1;
    let prev = table[table.len() - 2].1;
    let growth = last / prev - 1.0;
    let finite = last.is_finite() && growth < GROWTH_TOL;
    Ok(IntegrabilityVerdict { finite, value: if finite { last } else { f64::INFINITY }, growth, table })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    /// Closed-form composition of Riesz kernels.
    fn riesz(nu: f64, a: f64, b: f64) -> f64 {
        std::f64::consts::PI.powf(nu / 2.0) * gamma(a / 2.0) * gamma(b / 2.0) * gamma((nu - a - b) / 2.0)
            / (gamma((nu - a) / 2.0) * gamma((nu - b) / 2.0) * gamma((a + b) / 2.0))
    }

    #[test]
    fn convolution_matches_composition_formula() {
        for (a, b) in [(0.4, 0.4), (0.2, 0.5), (0.6, 0.3)] {
            let v = convolution(1, a, b, 1.0, None).unwrap();
            assert!((v / riesz(1.0, a, b) - 1.0).abs() < 1e-7, "{a} {b}: {v} vs {}", riesz(1.0, a, b));
        }
        for (a, b) in [(0.6, 0.6), (1.0, 0.5)] {
            let v = convolution(2, a, b, 1.0, None).unwrap();
            assert!((v / riesz(2.0, a, b) - 1.0).abs() < 1e-6, "{a} {b}: {v}");
        }
    }

    #[test]
    fn first_level_is_power() {
        let p = SelfSimilarParams { nu: 1, kappa: 0.2, k: 1 };
        assert_eq!(j_kappa_k(&p, &[2.0]).unwrap(), 2f64.powf(-0.6));
    }

    #[test]
    fn homogeneity() {
        for p in [SelfSimilarParams { nu: 1, kappa: 0.15, k: 3 }, SelfSimilarParams { nu: 2, kappa: 0.3, k: 2 }] {
            let x1 = vec![1.0; p.nu];
            let x2 = vec![2.0; p.nu];
            let ratio = j_kappa_k(&p, &x2).unwrap() / j_kappa_k(&p, &x1).unwrap();
            let want = 2f64.powf(2.0 * p.kappa * p.k as f64 - p.nu as f64);
            assert!((ratio / want - 1.0).abs() < 1e-6, "{p:?}: {ratio} vs {want}");
        }
    }

    #[test]
    fn finiteness_verdicts() {
        let fin = check_integrability(&SelfSimilarParams { nu: 1, kappa: 0.2, k: 2 }).unwrap();
        assert!(fin.finite, "{fin:?}");
        let div = check_integrability(&SelfSimilarParams { nu: 1, kappa: 0.3, k: 2 }).unwrap();
        assert!(!div.finite, "{div:?}");
        assert!(!check_integrability(&SelfSimilarParams { nu: 1, kappa: -0.1, k: 2 }).unwrap().finite);
    }
}
