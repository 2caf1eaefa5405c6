use rayon::prelude::*;
use serde::Serialize;

use super::renormalize::{norming, NormingRegime};
use crate::error::{invalid, Error, Result};
use crate::hermite::{factorial, HermiteExpansion};
use crate::quad;
use crate::spectral::{Correlation, CorrelationModel};

/// `S_j = sum_{l in (-N,N)^nu} prod_i (N - |l_i|) r(l + shift)^j` for `j = 0..=max_power`.
///
/// With `shift = 0` this is the double sum of `r(s - t)^j` over one block; with
/// `shift = m N` it pairs the block at the origin with block `m`.
pub fn displacement_sums(corr: &Correlation, n: usize, shift: &[i64], max_power: usize) -> Result<Vec<f64>> {
    let nu = corr.nu();
    if shift.len() != nu {
        return Err(invalid("shift dimension does not match the field"));
    }
    if n == 0 {
        return Err(invalid("block size must be positive"));
    }
    let ni = n as i64;
    let accumulate = |l: &[i64], out: &mut [f64]| {
        let count: f64 = l.iter().map(|&li| (ni - li.abs()) as f64).product();
        let at: Vec<i64> = l.iter().zip(shift).map(|(a, b)| a + b).collect();
        let r = corr.r(&at);
        let mut p = count;
        for o in out.iter_mut() {
            *o += p;
            p *= r;
        }
    };
    // one partial sum per value of the first coordinate, reduced in order
    let rows: Vec<Vec<f64>> = (-ni + 1..ni)
        .into_par_iter()
        .map(|a| {
            let mut out = vec![0.0; max_power + 1];
            if nu == 1 {
                accumulate(&[a], &mut out);
            } else {
                for b in -ni + 1..ni {
                    accumulate(&[a, b], &mut out);
                }
            }
            out
        })
        .collect();
    let mut total = vec![0.0; max_power + 1];
    for row in rows {
        for (t, v) in total.iter_mut().zip(row) {
            *t += v;
        }
    }
    Ok(total)
}

fn chaos_weighted(h: &HermiteExpansion, sums: &[f64]) -> f64 {
    h.coeffs.iter().enumerate().skip(1).map(|(j, c)| c * c * factorial(j) * sums[j]).sum()
}

/// `E(Z_0^N)^2 = A_N^{-2} sum_j c_j^2 j! sum_{s,t in block} r(s-t)^j`.
pub fn variance_exact(corr: &Correlation, h: &HermiteExpansion, n: usize, a_n: f64) -> Result<f64> {
    let sums = displacement_sums(corr, n, &vec![0; corr.nu()], h.max_order())?;
    Ok(chaos_weighted(h, &sums) / (a_n * a_n))
}

/// `Cov(Z_0^N, Z_m^N)`, block `m` given in block units.
pub fn block_covariance_exact(corr: &Correlation, h: &HermiteExpansion, n: usize, a_n: f64, m: &[i64]) -> Result<f64> {
    let shift: Vec<i64> = m.iter().map(|&mi| mi * n as i64).collect();
    let sums = displacement_sums(corr, n, &shift, h.max_order())?;
    Ok(chaos_weighted(h, &sums) / (a_n * a_n))
}

#[derive(Debug, Clone, Serialize)]
pub struct CovarianceStep {
    pub n: usize,
    pub covariance: f64,
    /// Relative change from the previous block size; `NaN` on the first row.
    pub relative_change: f64,
}

/// Exact `Cov(Z_0^N, Z_m^N)` along a sequence of block sizes. A self-similar limit
/// shows up as a Cauchy sequence.
pub fn covariance_sequence(
    corr: &Correlation,
    h: &HermiteExpansion,
    ns: &[usize],
    m: &[i64],
    regime: NormingRegime,
) -> Result<Vec<CovarianceStep>> {
    let mut out: Vec<CovarianceStep> = Vec::with_capacity(ns.len());
    for &n in ns {
        let a_n = norming(corr, n, regime)?;
        let covariance = block_covariance_exact(corr, h, n, a_n, m)?;
        let relative_change = match out.last() {
            Some(prev) => ((covariance - prev.covariance) / prev.covariance).abs(),
            None => f64::NAN,
        };
        out.push(CovarianceStep { n, covariance, relative_change });
    }
    Ok(out)
}

/// Largest lattice radius summed term by term before the tail integral takes over.
const DIRECT_RADIUS_LINE: i64 = 1 << 20;
const DIRECT_RADIUS_PLANE: i64 = 1 << 10;


/// `int_{rho0}^inf rho^{nu-1} (rho^-alpha L(rho))^l drho` in `u = ln rho`.
fn radial_tail(model: &CorrelationModel, l: usize, rho0: f64) -> f64 {
    let p = l as f64 * model.alpha - model.nu as f64;
    let lf = l as f64;
    if model.slowly_varying.is_constant() {
        return model.slowly_varying.eval(1.0).powf(lf) * rho0.powf(-p) / p;
    }
    // the integrand decays like e^{-p u}; stop where that factor is below 1e-16, but
    // before rho overflows
    let span = (37.0 / p).min(600.0);
    let lr = rho0.ln();
    quad::gl(
        |u| {
            let rho = (lr + u).exp();
            rho.powf(-p) * model.slowly_varying.eval(rho).powf(lf)
        },
        0.0,
        span,
        ((span * 4.0).ceil() as usize).max(8),
        10,
    )
}

fn direct_partial(model: &CorrelationModel, l: usize, radius: i64) -> f64 {
    let lf = l as i32;
    match model.nu {
        1 => {
            let rows: Vec<f64> = (0..64i64)
                .into_par_iter()
                .map(|chunk| {
                    let step = radius / 64 + 1;
                    let lo = 1 + chunk * step;
                    let hi = (lo + step).min(radius + 1);
                    (lo..hi).map(|n| model.correlation(&[n]).powi(lf)).sum::<f64>()
                })
                .collect();
            1.0 + 2.0 * rows.iter().sum::<f64>()
        }
        _ => {
            let rows: Vec<f64> = (-radius..=radius)
                .into_par_iter()
                .map(|a| (-radius..=radius).map(|b| model.correlation(&[a, b]).powi(lf)).sum())
                .collect();
            rows.iter().sum()
        }
    }
}

/// Tail of the lattice sum beyond the direct range, as an integral with the
/// Euler-Maclaurin endpoint corrections on the line.
fn lattice_tail(model: &CorrelationModel, l: usize, radius: i64) -> f64 {
    let lf = l as f64;
    match model.nu {
        1 => {
            let m = radius as f64;
            let p = lf * model.alpha;
            let a = model.angular.eval(&[1.0]).powf(lf);
            let f_m = model.correlation(&[radius]).powf(lf);
            let integral = a * radial_tail(model, l, m);
            // sum_{n > M} f(n) = int_M^inf f - f(M)/2 - f'(M)/12 + ...
            let deriv = -p * f_m / m;
            2.0 * (integral - 0.5 * f_m - deriv / 12.0)
        }
        _ => {
            // region outside the square of half side M + 1/2, in polar coordinates
            let half = radius as f64 + 0.5;
            quad::gl(
                |theta| {
                    let (s, c) = theta.sin_cos();
                    let rho0 = half / s.abs().max(c.abs());
                    model.angular.eval(&[c, s]).powf(lf) * radial_tail(model, l, rho0)
                },
                0.0,
                2.0 * std::f64::consts::PI,
                64,
                10,
            )
        }
    }
}

/// Refuses `sum |r(n)|^l` when it diverges. The exponent test `l alpha > nu` is
/// decisive; the growth of the partial sums over the last radius doubling is
/// reported with the refusal.
pub fn check_summable(corr: &Correlation, l: usize) -> Result<()> {
    let Some(model) = corr.model() else { return Ok(()) };
    if l as f64 * model.alpha > model.nu as f64 {
        return Ok(());
    }
    let radius = if model.nu == 1 { 1 << 16 } else { 1 << 8 };
    let s1 = direct_partial(model, l, radius);
    let s2 = direct_partial(model, l, 2 * radius);
    Err(Error::NonSummable { power: l, growth: (s2 - s1) / s1 })
}

/// `sum_{n in Z^nu} r(n)^l`.
pub fn lattice_sum(corr: &Correlation, l: usize) -> Result<f64> {
    check_summable(corr, l)?;
    let Some(model) = corr.model() else { return Ok(1.0) };
    let radius = if model.nu == 1 { DIRECT_RADIUS_LINE } else { DIRECT_RADIUS_PLANE };
    Ok(direct_partial(model, l, radius) + lattice_tail(model, l, radius))
}

#[derive(Debug, Clone, Serialize)]
pub struct SigmaLimit {
    pub order: usize,
    /// `sum_n r(n)^l`.
    pub lattice_sum: f64,
    /// `(N, N^{-nu} sum_{s,t in block} r(s-t)^l)`.
    pub sequence: Vec<(usize, f64)>,
    /// Richardson extrapolation of the last two sequence terms.
    pub extrapolated: f64,
    /// `|last sequence term - lattice sum| / lattice sum`.
    pub relative_gap: f64,
}

/// Long-run variance of `H_l(X_n)` divided by `l!`, by the lattice sum and by the
/// block sequence.
pub fn sigma_limit(corr: &Correlation, l: usize, ns: &[usize]) -> Result<SigmaLimit> {
    if l == 0 {
        return Err(invalid("order must be at least 1"));
    }
    if ns.is_empty() {
        return Err(invalid("need at least one block size"));
    }
    let lattice = lattice_sum(corr, l)?;
    let nu = corr.nu() as f64;
    let mut sequence = Vec::with_capacity(ns.len());
    for &n in ns {
        let sums = displacement_sums(corr, n, &vec![0; corr.nu()], l)?;
        sequence.push((n, sums[l] / (n as f64).powf(nu)));
    }
    let last = sequence.last().unwrap().1;
    let extrapolated = match (corr.model(), sequence.len()) {
        (Some(model), len) if len >= 2 => {
            let (n0, v0) = sequence[len - 2];
            let (n1, v1) = sequence[len - 1];
            let q = (l as f64 * model.alpha - model.nu as f64).min(1.0);
            let ratio = (n1 as f64 / n0 as f64).powf(q);
            v1 + (v1 - v0) / (ratio - 1.0)
        }
        _ => last,
    };
    Ok(SigmaLimit { order: l, lattice_sum: lattice, sequence, extrapolated, relative_gap: ((last - lattice) / lattice).abs() })
}

/// `sigma^2 = sum_l c_l^2 l! sum_n r(n)^l`, the central-regime limit variance.
pub fn sigma_total(h: &HermiteExpansion, corr: &Correlation) -> Result<f64> {
    let rank = h.rank.ok_or_else(|| invalid("expansion has no nonzero coefficient above order 0"))?;
    check_summable(corr, rank)?;
    let mut total = 0.0;
    for (l, c) in h.coeffs.iter().enumerate().skip(rank) {
        if *c != 0.0 {
            total += c * c * factorial(l) * lattice_sum(corr, l)?;
        }
    }
    Ok(total)
}
