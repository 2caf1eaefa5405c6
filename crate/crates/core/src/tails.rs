//! Moment and tail bounds for Wiener-Itô chaos, with exact and Monte Carlo oracles.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::chaos::GridKernel;
use crate::diagrams::count_complete;
use crate::error::{invalid, Error, Result};
use crate::hermite::{factorial, hermite, GaussHermiteRule};
use crate::rng::Normals;
use crate::stats::slope;

/// An element of the `m`-th chaos, `Y = m! I_G(h)`.
#[derive(Debug, Clone)]
pub enum ChaosVariable {
    /// `H_m(xi)` for a standard normal `xi`.
    Hermite { order: usize },
    Kernel(Arc<GridKernel>),
}

impl ChaosVariable {
    pub fn order(&self) -> usize {
        match self {
            ChaosVariable::Hermite { order } => *order,
            ChaosVariable::Kernel(k) => k.arity,
        }
    }

    /// `E Y^2 = m! ||Sym h||^2`.
    pub fn second_moment(&self) -> f64 {
        match self {
            ChaosVariable::Hermite { order } => factorial(*order),
            ChaosVariable::Kernel(k) => factorial(k.arity) * k.symmetrize().norm_sq(),
        }
    }
}

/// `C(m, N)`: complete diagrams with `2N` rows of `m` vertices.
pub fn diagram_constant(m: usize, n: usize) -> u128 {
    count_complete(&vec![m; 2 * n])
}

/// `(2k - 1)!!`
pub fn double_factorial_odd(k: usize) -> f64 {
    (1..=k).map(|i| (2 * i - 1) as f64).product()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MomentBound {
    /// `C(m, N) (E Y^2)^N`.
    pub diagram: f64,
    /// `C(m, N) (E Y^2 / m!)^N = C(m, N) ||h||^{2N}`, the sharp form.
    pub sharp: f64,
    /// `(2mN - 1)!! (E Y^2)^N`.
    pub double_factorial: f64,
}

/// Bounds on `E Y^{2N}` for `Y` in the `m`-th chaos with `E Y^2 = second_moment`.
pub fn moment_bound(m: usize, n: usize, second_moment: f64) -> Result<MomentBound> {
    if m == 0 || n == 0 {
        return Err(invalid("order and moment index must be positive"));
    }
    if !(second_moment > 0.0) {
        return Err(invalid("second moment must be positive"));
    }
    let c = diagram_constant(m, n) as f64;
    let nf = n as i32;
    Ok(MomentBound {
        diagram: c * second_moment.powi(nf),
        sharp: c * (second_moment / factorial(m)).powi(nf),
        double_factorial: double_factorial_odd(m * n) * second_moment.powi(nf),
    })
}

/// `E H_m(xi)^{2N}`: with unit correlations every complete diagram contributes 1.
pub fn moment_exact_hermite(m: usize, two_n: usize) -> Result<f64> {
    if m == 0 || two_n == 0 || two_n % 2 != 0 {
        return Err(invalid("need m >= 1 and an even positive moment"));
    }
    Ok(count_complete(&vec![m; two_n]) as f64)
}

/// `sum coeff * prod_i x_i^{powers_i}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polynomial {
    pub terms: Vec<(f64, Vec<u32>)>,
}

impl Polynomial {
    pub fn new(terms: Vec<(f64, Vec<u32>)>) -> Result<Self> {
        let vars = terms.first().map_or(0, |t| t.1.len());
        if vars == 0 || terms.iter().any(|t| t.1.len() != vars) {
            return Err(invalid("every monomial needs the same positive number of variables"));
        }
        Ok(Polynomial { terms })
    }

    pub fn vars(&self) -> usize {
        self.terms[0].1.len()
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().filter(|t| t.0 != 0.0).map(|t| t.1.iter().sum::<u32>() as usize).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(c, p)| c * x.iter().zip(p).map(|(v, &e)| v.powi(e as i32)).product::<f64>()).sum()
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PolynomialMoment {
    /// `E P^{2N}`.
    pub moment: f64,
    /// `E P^2`.
    pub second_moment: f64,
    /// `C(m, N) (m + 1)^N (E P^2)^N`.
    pub bound: f64,
    pub holds: bool,
}

/// `E P(xi)^{2N}` for `xi ~ N(0, covariance)` by tensor Gauss-Hermite quadrature,
/// against the diagram bound for polynomials of degree `m`.
pub fn polynomial_moment_check(p: &Polynomial, covariance: &DMatrix<f64>, n: usize) -> Result<PolynomialMoment> {
    polynomial_moment_check_with(p, covariance, n, None)
}

/// As [`polynomial_moment_check`] with an explicit number of nodes per axis.
pub fn polynomial_moment_check_with(
    p: &Polynomial,
    covariance: &DMatrix<f64>,
    n: usize,
    nodes: Option<usize>,
) -> Result<PolynomialMoment> {
    let (k, m) = (p.vars(), p.degree());
    if k > 3 || m > 4 || m == 0 || n == 0 || n > 3 {
        return Err(invalid("supported: degree 1..=4, at most 3 variables, N in 1..=3"));
    }
    if covariance.nrows() != k || covariance.ncols() != k {
        return Err(invalid("covariance does not match the number of variables"));
    }
    // exact when 2q - 1 >= 2 N m
    let needed = n * m + 1;
    let q = nodes.unwrap_or(needed);
    if q < needed {
        return Err(Error::Quadrature(format!("{q} nodes per axis cannot integrate degree {}", 2 * n * m)));
    }
    let l = covariance
        .clone()
        .cholesky()
        .map(|c| c.l())
        .or_else(|| psd_root(covariance))
        .ok_or(Error::IndefiniteEmbedding { min_eig: covariance.symmetric_eigenvalues().min() })?;
    let rule = GaussHermiteRule::new(q)?;
    let total = q.pow(k as u32);
    let mut idx = vec![0usize; k];
    let mut z = vec![0.0; k];
    let mut x = vec![0.0; k];
    let (mut m2, mut m2n) = (0.0, 0.0);
    for flat in 0..total {
        let mut rest = flat;
        let mut w = 1.0;
        for d in 0..k {
            idx[d] = rest % q;
            rest /= q;
            z[d] = rule.nodes[idx[d]];
            w *= rule.weights[idx[d]];
        }
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = (0..k).map(|j| l[(i, j)] * z[j]).sum();
        }
        let v = p.eval(&x);
        let v2 = v * v;
        m2 += w * v2;
        m2n += w * v2.powi(n as i32);
    }
    let bound = diagram_constant(m, n) as f64 * ((m + 1) as f64 * m2).powi(n as i32);
    Ok(PolynomialMoment { moment: m2n, second_moment: m2, bound, holds: m2n <= bound * (1.0 + 1e-12) })
}

/// Symmetric square root of a positive semidefinite matrix.
fn psd_root(c: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let eig = c.clone().symmetric_eigen();
    let scale = eig.eigenvalues.amax();
    if eig.eigenvalues.iter().any(|&v| v < -1e-12 * scale) {
        return None;
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()));
    Some(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// Constants of the upper tail bound `P(|Y| > x) <= exp(-K2 x^{2/m})`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailConstants {
    pub m: usize,
    pub second_moment: f64,
    /// Largest `a` with `(2a)^m E Y^2 <= 1/e`.
    pub alpha: f64,
    pub k2: f64,
    /// The bound is claimed for `x > x0`, where `N = floor(alpha x^{2/m}) >= 1`.
    pub x0: f64,
}

impl TailConstants {
    pub fn new(m: usize, second_moment: f64) -> Result<Self> {
        if m == 0 {
            return Err(invalid("order must be positive"));
        }
        if !(second_moment > 0.0) {
            return Err(invalid("second moment must be positive"));
        }
        let mf = m as f64;
        let alpha = 0.5 * (1.0 / (std::f64::consts::E * second_moment)).powf(1.0 / mf);
        Ok(TailConstants { m, second_moment, alpha, k2: 0.5 * alpha, x0: alpha.powf(-mf / 2.0) })
    }

    pub fn bound(&self, x: f64) -> Result<f64> {
        if x <= self.x0 {
            return Err(Error::BelowThreshold { x, x0: self.x0 });
        }
        Ok((-self.k2 * x.powf(2.0 / self.m as f64)).exp())
    }
}

pub fn tail_bound(m: usize, second_moment: f64, x: f64) -> Result<f64> {
    TailConstants::new(m, second_moment)?.bound(x)
}

/// Draws per independent stream in [`tail_empirical`].
const CHUNK: usize = 1 << 14;

#[derive(Debug, Clone, Serialize)]
pub struct SurvivalPoint {
    pub x: f64,
    pub events: u64,
    pub survival: f64,
    pub bound: f64,
}

/// Empirical survival of `|H_m(xi)|` at each `x`, from `replicates` draws.
pub fn tail_empirical(m: usize, xs: &[f64], replicates: usize, seed: u64) -> Result<Vec<SurvivalPoint>> {
    let c = TailConstants::new(m, factorial(m))?;
    if replicates == 0 {
        return Err(Error::InsufficientSamples { n: 0, min: 1 });
    }
    let chunks = replicates.div_ceil(CHUNK);
    let counts: Vec<Vec<u64>> = (0..chunks)
        .into_par_iter()
        .map(|ch| {
            let mut g = Normals::new(seed, ch as u64);
            let len = CHUNK.min(replicates - ch * CHUNK);
            let mut out = vec![0u64; xs.len()];
            for _ in 0..len {
                let y = hermite(m, g.next()).abs();
                for (o, &x) in out.iter_mut().zip(xs) {
                    if y > x {
                        *o += 1;
                    }
                }
            }
            out
        })
        .collect();
    let mut total = vec![0u64; xs.len()];
    for row in counts {
        for (t, v) in total.iter_mut().zip(row) {
            *t += v;
        }
    }
    xs.iter()
        .zip(total)
        .map(|(&x, events)| {
            Ok(SurvivalPoint { x, events, survival: events as f64 / replicates as f64, bound: c.bound(x)? })
        })
        .collect()
}

/// Events needed at a point for it to enter the slope fit.
pub const MIN_EVENTS: u64 = 100;

#[derive(Debug, Clone, Serialize)]
pub struct TailReport {
    pub constants: TailConstants,
    pub points: Vec<SurvivalPoint>,
    pub below_bound: bool,
    /// Least-squares slope of `ln(-ln P)` against `ln x`.
    pub slope: f64,
    pub fit_points: usize,
}

impl TailReport {
    /// `slope / (2/m)`.
    pub fn slope_ratio(&self) -> f64 {
        self.slope * self.constants.m as f64 / 2.0
    }
}

/// Survival of `|H_m(xi)|` on `points` values geometrically spaced from just above `x0`
/// to `x_max`, with the bound check and the slope fit.
pub fn tail_study(m: usize, x_max: f64, points: usize, replicates: usize, seed: u64) -> Result<TailReport> {
    let c = TailConstants::new(m, factorial(m))?;
    if !(x_max > c.x0) || points < 2 {
        return Err(invalid(format!("need at least two points above x0 = {}", c.x0)));
    }
    let lo = c.x0 * (1.0 + 1e-9);
    let ratio = (x_max / lo).powf(1.0 / (points - 1) as f64);
    let xs: Vec<f64> = (0..points).map(|i| lo * ratio.powi(i as i32)).collect();
    let pts = tail_empirical(m, &xs, replicates, seed)?;
    let below_bound = pts.iter().all(|p| p.survival <= p.bound);
    let fit: Vec<&SurvivalPoint> = pts.iter().take_while(|p| p.events >= MIN_EVENTS).collect();
    if fit.len() < 2 {
        return Err(Error::InsufficientSamples { n: fit.len(), min: 2 });
    }
    let lx: Vec<f64> = fit.iter().map(|p| p.x.ln()).collect();
    let ly: Vec<f64> = fit.iter().map(|p| (-p.survival.ln()).ln()).collect();
    Ok(TailReport { constants: c, below_bound, slope: slope(&lx, &ly), fit_points: fit.len(), points: pts })
}
