//! Probabilists' Hermite polynomials, Gauss-Hermite quadrature for the standard
//! normal law, and Hermite expansions of square-integrable functions of a Gaussian.

use std::num::NonZeroUsize;

use gauss_quad::hermite::GaussHermite;
use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Relative truncation residual above which [`expand_function`] refuses the expansion.
pub const TRUNCATION_TOL: f64 = 1e-2;

/// Coefficients below `RANK_TOL * max(1, sum |c_j|)` count as zero when computing the rank.
pub const RANK_TOL: f64 = 1e-10;

pub fn hermite(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut a, mut b) = (1.0, x);
            for k in 2..=n {
                let c = x * b - (k - 1) as f64 * a;
                a = b;
                b = c;
            }
            b
        }
    }
}

/// `H_0(x), ..., H_n(x)`.
pub fn hermite_all(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(x);
    }
    for k in 2..=n {
        let v = x * out[k - 1] - (k - 1) as f64 * out[k - 2];
        out.push(v);
    }
    out
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `E[H_j(X) H_l(Y)]` for standard normals with correlation `r`.
pub fn hermite_covariance(j: usize, l: usize, r: f64) -> f64 {
    if j != l {
        0.0
    } else {
        factorial(j) * r.powi(j as i32)
    }
}

/// Gauss-Hermite rule for the standard normal law: `sum w_i f(x_i)` approximates `E f(X)`.
#[derive(Debug, Clone)]
pub struct GaussHermiteRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermiteRule {
    pub fn new(q: usize) -> Result<Self> {
        let q = NonZeroUsize::new(q).ok_or_else(|| invalid("quadrature needs at least one node"))?;
        let rule = GaussHermite::new(q);
        let norm = std::f64::consts::PI.sqrt();
        let (nodes, weights) = rule
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (x * std::f64::consts::SQRT_2, w / norm))
            .unzip();
        Ok(GaussHermiteRule { nodes, weights })
    }

    /// Exact for polynomials of degree below `2 * len`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn expect<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HermiteExpansion {
    /// `c_0, ..., c_J` with `f = sum c_j H_j`.
    pub coeffs: Vec<f64>,
    /// Smallest `j >= 1` with a non-negligible coefficient.
    pub rank: Option<usize>,
    /// `sum_{j>=1} c_j^2 j!`, the variance of the truncated expansion.
    pub second_moment: f64,
    /// Relative `L^2` mass of `f - c_0` missed by the truncation.
    pub residual: f64,
}

impl HermiteExpansion {
    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        let second_moment = coeffs.iter().enumerate().skip(1).map(|(j, c)| c * c * factorial(j)).sum();
        let rank = rank_of(&coeffs);
        HermiteExpansion { coeffs, rank, second_moment, residual: 0.0 }
    }

    /// A single Hermite polynomial `H_k`.
    pub fn pure(k: usize) -> Self {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        Self::from_coeffs(c)
    }

    pub fn max_order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let h = hermite_all(self.max_order(), x);
        self.coeffs.iter().zip(h).map(|(c, h)| c * h).sum()
    }

    /// The same expansion with `c_0` dropped.
    pub fn centered(&self) -> Self {
        let mut out = self.clone();
        if let Some(c) = out.coeffs.first_mut() {
            *c = 0.0;
        }
        out
    }
}

fn rank_of(coeffs: &[f64]) -> Option<usize> {
    let total: f64 = coeffs.iter().skip(1).map(|c| c.abs()).sum();
    let tol = RANK_TOL * total.max(1.0);
    coeffs.iter().enumerate().skip(1).find(|(_, c)| c.abs() > tol).map(|(j, _)| j)
}

/// Hermite coefficients `c_j = E[f(X) H_j(X)] / j!` for `j <= max_order` by `nodes`-point
/// Gauss-Hermite quadrature, refusing when the truncation misses more than
/// [`TRUNCATION_TOL`] of the variance of `f`.
pub fn expand_function<F: Fn(f64) -> f64>(f: F, max_order: usize, nodes: usize) -> Result<HermiteExpansion> {
    expand_function_tol(f, max_order, nodes, TRUNCATION_TOL)
}

pub fn expand_function_tol<F: Fn(f64) -> f64>(
    f: F,
    max_order: usize,
    nodes: usize,
    tol: f64,
) -> Result<HermiteExpansion> {
    if nodes <= max_order {
        return Err(invalid(format!("{nodes} nodes cannot resolve order {max_order}")));
    }
    let rule = GaussHermiteRule::new(nodes)?;
    let values: Vec<f64> = rule.nodes.iter().map(|&x| f(x)).collect();
    let mut coeffs = vec![0.0; max_order + 1];
    let mut mean_sq = 0.0;
    for ((&x, &w), &v) in rule.nodes.iter().zip(&rule.weights).zip(&values) {
        let h = hermite_all(max_order, x);
        for (c, hj) in coeffs.iter_mut().zip(&h) {
            *c += w * v * hj;
        }
        mean_sq += w * v * v;
    }
    for (j, c) in coeffs.iter_mut().enumerate() {
        *c /= factorial(j);
    }
    let mut exp = HermiteExpansion::from_coeffs(coeffs);
    let variance = mean_sq - exp.coeffs[0].powi(2);
    let missed = (variance - exp.second_moment).max(0.0);
    exp.residual = if variance > 0.0 { missed / variance } else { 0.0 };
    if exp.residual > tol {
        return Err(Error::TruncationResidual { residual: exp.residual, tol });
    }
    Ok(exp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_closed_forms() {
        for &x in &[-2.5, -0.3, 0.0, 1.7] {
            assert_eq!(hermite(2, x), x * x - 1.0);
            assert!((hermite(3, x) - (x.powi(3) - 3.0 * x)).abs() < 1e-12);
            assert!((hermite(4, x) - (x.powi(4) - 6.0 * x * x + 3.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_identity() {
        // H_n' = n H_{n-1}
        for n in 1..12 {
            let x = 0.37;
            let h = 1e-6;
            let d = (hermite(n, x + h) - hermite(n, x - h)) / (2.0 * h);
            assert!((d - n as f64 * hermite(n - 1, x)).abs() < 1e-5 * (1.0 + d.abs()));
        }
    }

    #[test]
    fn rule_integrates_moments() {
        let rule = GaussHermiteRule::new(20).unwrap();
        assert!((rule.expect(|_| 1.0) - 1.0).abs() < 1e-13);
        assert!((rule.expect(|x| x.powi(6)) - 15.0).abs() < 1e-10);
    }

    #[test]
    fn absolute_value_expansion() {
        let mean_abs = (2.0 / std::f64::consts::PI).sqrt();
        let e = expand_function(|x| x.abs() - mean_abs, 20, 40).unwrap();
        assert_eq!(e.rank, Some(2));
        assert!(e.coeffs[0].abs() < 1e-2);
        assert!((e.coeffs[2] - mean_abs / 2.0).abs() < 1e-2);
        assert!(e.residual > 0.0 && e.residual < TRUNCATION_TOL);
    }

    #[test]
    fn refuses_heavy_truncation() {
        let r = expand_function(|x| if x > 0.0 { 1.0 } else { -1.0 }, 2, 60);
        assert!(matches!(r, Err(Error::TruncationResidual { .. })));
    }

    #[test]
    fn polynomial_is_recovered_exactly() {
        // x^3 = H_3 + 3 H_1
        let e = expand_function(|x| x.powi(3), 6, 10).unwrap();
        assert!((e.coeffs[1] - 3.0).abs() < 1e-12);
        assert!((e.coeffs[3] - 1.0).abs() < 1e-12);
        assert_eq!(e.rank, Some(1));
        assert!((e.second_moment - 15.0).abs() < 1e-10);
        assert!((e.eval(1.3) - 1.3f64.powi(3)).abs() < 1e-12);
    }
}
