//! Fractional Brownian motion: covariance, exact simulation, and covariance-level
//! identities, including the harmonizable representation.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fields::{Method, Sampler, CHOLESKY_LIMIT};
use crate::quad;
use crate::rng::Normals;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FbmSpec {
    pub hurst: f64,
    /// Strictly increasing, nonnegative.
    pub times: Vec<f64>,
    /// `E X(1)^2`.
    pub scale: f64,
}

impl FbmSpec {
    pub fn new(hurst: f64, times: Vec<f64>, scale: f64) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(invalid(format!("Hurst parameter must lie in (0, 1), got {hurst}")));
        }
        if !(scale > 0.0) {
            return Err(invalid("scale must be positive"));
        }
        if times.is_empty() || times[0] < 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("time grid must be nonnegative and strictly increasing"));
        }
        Ok(FbmSpec { hurst, times, scale })
    }

    /// The grid `dt, 2 dt, ..., n dt`.
    pub fn uniform(hurst: f64, n: usize, dt: f64) -> Result<Self> {
        Self::new(hurst, (1..=n).map(|i| i as f64 * dt).collect(), 1.0)
    }

    pub fn covariance(&self, s: f64, t: f64) -> f64 {
        covariance(self.hurst, self.scale, s, t)
    }
}

/// `R_H(s, t) = scale (s^{2H} + t^{2H} - |t - s|^{2H}) / 2`.
pub fn covariance(hurst: f64, scale: f64, s: f64, t: f64) -> f64 {
    let e = 2.0 * hurst;
    0.5 * scale * (s.powf(e) + t.powf(e) - (t - s).abs().powf(e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FbmMethod {
    Cholesky,
    /// Circulant embedding of the increments on a uniform grid, then partial sums.
    CirculantFgn,
}

impl std::str::FromStr for FbmMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cholesky" => Ok(FbmMethod::Cholesky),
            "circulant" | "circulant-fgn" => Ok(FbmMethod::CirculantFgn),
            _ => Err(invalid(format!("unknown fBm method {s}"))),
        }
    }
}

enum Engine {
    /// Factor over the positive times; `first` is 1 when the grid starts at 0.
    Cholesky { l: DMatrix<f64>, first: usize },
    Fgn { increments: Sampler, start_at_zero: bool },
}

pub struct FbmSampler {
    spec: FbmSpec,
    engine: Engine,
}

impl FbmSampler {
    pub fn new(spec: &FbmSpec, method: FbmMethod) -> Result<Self> {
        let first = usize::from(spec.times[0] == 0.0);
        let engine = match method {
            FbmMethod::Cholesky => {
                let pos = &spec.times[first..];
                if pos.len() > CHOLESKY_LIMIT {
                    return Err(invalid(format!("Cholesky simulation is limited to {CHOLESKY_LIMIT} times")));
                }
                let cov = DMatrix::from_fn(pos.len(), pos.len(), |i, j| spec.covariance(pos[i], pos[j]));
                // a valid Hurst parameter always gives a positive definite matrix
                let chol = cov.cholesky().ok_or(Error::IndefiniteEmbedding { min_eig: f64::NAN })?;
                Engine::Cholesky { l: chol.l(), first }
            }
            FbmMethod::CirculantFgn => {
                let dt = spec.times[first];
                let uniform = spec.times[first..]
                    .iter()
                    .enumerate()
                    .all(|(i, &t)| (t - (i + 1) as f64 * dt).abs() <= 1e-12 * t.max(1.0));
                if !uniform {
                    return Err(invalid("the increment method needs the grid dt, 2 dt, ..., optionally starting at 0"));
                }
                let (h, scale) = (spec.hurst, spec.scale);
                let gamma = move |l: &[i64]| {
                    let k = l[0].abs() as f64;
                    let e = 2.0 * h;
                    0.5 * scale * dt.powf(e) * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e))
                };
                let n = spec.times.len() - first;
                Engine::Fgn { increments: Sampler::from_covariance(&[n], gamma, Method::CirculantEmbedding)?, start_at_zero: first == 1 }
            }
        };
        Ok(FbmSampler { spec: spec.clone(), engine })
    }

    pub fn spec(&self) -> &FbmSpec {
        &self.spec
    }

    /// One path on the time grid.
    pub fn sample(&self, seed: u64, replicate: u64) -> Vec<f64> {
        match &self.engine {
            Engine::Cholesky { l, first } => {
                let mut z = vec![0.0; l.nrows()];
                Normals::new(seed, replicate).fill(&mut z);
                let x = l * DVector::from_vec(z);
                let mut out = vec![0.0; *first];
                out.extend_from_slice(x.as_slice());
                out
            }
            Engine::Fgn { increments, start_at_zero } => {
                let inc = increments.sample(seed, replicate).values;
                let mut out = Vec::with_capacity(inc.len() + 1);
                if *start_at_zero {
                    out.push(0.0);
                }
                let mut acc = 0.0;
                for v in inc {
                    acc += v;
                    out.push(acc);
                }
                out
            }
        }
    }
}

pub fn simulate(spec: &FbmSpec, seed: u64, replicate: u64, method: FbmMethod) -> Result<Vec<f64>> {
    Ok(FbmSampler::new(spec, method)?.sample(seed, replicate))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

/// `max |R(as, at) - a^{2H} R(s, t)| / (1 + |R(s, t)|)` over grid pairs.
pub fn check_self_similarity(spec: &FbmSpec, a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(invalid("scale factor must be positive"));
    }
    let f = a.powf(2.0 * spec.hurst);
    let mut worst: f64 = 0.0;
    for &s in &spec.times {
        for &t in &spec.times {
            let r = spec.covariance(s, t);
            worst = worst.max(rel(spec.covariance(a * s, a * t), f * r));
        }
    }
    Ok(worst)
}

/// `max |E[X(s+u) - X(u)][X(t+u) - X(u)] - R(s, t)| / (1 + |R(s, t)|)` over grid pairs,
/// with the left side expanded through the covariance.
pub fn check_stationary_increments(spec: &FbmSpec, u: f64) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(invalid("shift must be nonnegative"));
    }
    let c = |s, t| spec.covariance(s, t);
    let mut worst: f64 = 0.0;
    for &s in &spec.times {
        for &t in &spec.times {
            let lhs = c(s + u, t + u) - c(s + u, u) - c(u, t + u) + c(u, u);
            worst = worst.max(rel(lhs, c(s, t)));
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectralCovariance {
    pub value: f64,
    /// Imaginary part of the same quadrature; zero for an even integrand.
    pub imag: f64,
}

/// `int ((e^{isu} - 1) / (iu)) conj((e^{itu} - 1) / (iu)) |u|^{1 - 2H} du` over the line.
pub fn spectral_covariance(hurst: f64, s: f64, t: f64) -> Result<SpectralCovariance> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(invalid(format!("Hurst parameter must lie in (0, 1), got {hurst}")));
    }
    if !(s >= 0.0 && t >= 0.0) {
        return Err(invalid("times must be nonnegative"));
    }
    if s == 0.0 || t == 0.0 {
        return Ok(SpectralCovariance { value: 0.0, imag: 0.0 });
    }
    let p = 1.0 + 2.0 * hurst;
    let d = s - t;
    // real part: (1 - cos su) + (1 - cos tu) - (1 - cos du), written with sin^2
    let g = |u: f64| {
        let sq = |x: f64| (0.5 * x * u).sin().powi(2);
        2.0 * (sq(s) + sq(t) - sq(d))
    };
    // imaginary part of the integrand at u; odd in u
    let im = |u: f64| {
        let (ss, cs) = (s * u).sin_cos();
        let (st, ct) = (t * u).sin_cos();
        (ss * (ct - 1.0) - (cs - 1.0) * st) * u.abs().powf(1.0 - 2.0 * hurst) / (u * u)
    };
    let wmax = s.max(t);
    let wmin = [s, t, d.abs()].into_iter().filter(|w| *w > 0.0).fold(f64::INFINITY, f64::min);
    let near = 1.0 / wmax;
    let far = 400.0 / wmin;
    let integrand = |u: f64| g(u) * u.powf(-p);
    // behaves like s t u^{1-2H} at the origin
    let head = quad::endpoint_singular(integrand, 0.0, near, 2.0 * hurst - 1.0);
    let periods = ((far - near) * wmax / (2.0 * std::f64::consts::PI)).ceil() as usize;
    let body = quad::gl(integrand, near, far, (4 * periods).max(16), 10);
    let tail = quad::cosine_power_tail(&[(1.0, 0.0), (-1.0, s), (-1.0, t), (1.0, d.abs())], far, p);
    let half = head + body + tail;
    if !half.is_finite() {
        return Err(Error::Quadrature(format!("spectral covariance at ({s}, {t}) did not converge")));
    }
    let imag_pos = quad::gl(im, near, far, (4 * periods).max(16), 10) + quad::endpoint_singular(im, 0.0, near, 2.0 * hurst - 1.0);
    let imag_neg = quad::gl(|u| im(-u), near, far, (4 * periods).max(16), 10)
        + quad::endpoint_singular(|u| im(-u), 0.0, near, 2.0 * hurst - 1.0);
    Ok(SpectralCovariance { value: 2.0 * half, imag: imag_pos + imag_neg })
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioCheck {
    /// `(s, t, spectral / R_H)`.
    pub ratios: Vec<(f64, f64, f64)>,
    /// `(max - min) / mean` of the ratios.
    pub spread: f64,
    pub max_imag: f64,
}

/// Ratio of the spectral covariance to `R_H` over pairs of times.
pub fn spectral_ratio(hurst: f64, pairs: &[(f64, f64)]) -> Result<RatioCheck> {
    let mut ratios = Vec::with_capacity(pairs.len());
    let mut max_imag: f64 = 0.0;
    for &(s, t) in pairs {
        let r = covariance(hurst, 1.0, s, t);
        if r.abs() < 1e-12 {
            return Err(invalid(format!("R_H({s}, {t}) vanishes")));
        }
        let sc = spectral_covariance(hurst, s, t)?;
        max_imag = max_imag.max(sc.imag.abs());
        ratios.push((s, t, sc.value / r));
    }
    let vals: Vec<f64> = ratios.iter().map(|r| r.2).collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let max = vals.iter().cloned().fold(f64::MIN, f64::max);
    let min = vals.iter().cloned().fold(f64::MAX, f64::min);
    Ok(RatioCheck { ratios, spread: (max - min) / mean, max_imag })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    #[test]
    fn covariance_values() {
        assert!((covariance(0.75, 1.0, 1.0, 2.0) - 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(covariance(0.5, 2.0, 1.5, 4.0), 3.0);
        assert_eq!(covariance(0.3, 1.0, 0.0, 4.0), 0.0);
        assert!((covariance(0.3, 1.0, 2.0, 2.0) - 2f64.powf(0.6)).abs() < 1e-14);
    }

    #[test]
    fn identities_hold_to_roundoff() {
        let spec = FbmSpec::new(0.7, vec![0.5, 1.0, 2.0], 1.0).unwrap();
        assert_eq!(check_self_similarity(&spec, 1.0).unwrap(), 0.0);
        assert!(check_self_similarity(&spec, 2.0).unwrap() <= 1e-12);
        for u in [0.3, 1.7] {
            assert!(check_stationary_increments(&spec, u).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn spectral_ratio_matches_closed_form() {
        // int_0^inf (1 - cos u) u^{-1-2H} du = pi / (2 Gamma(1+2H) sin(pi H))
        for h in [0.3, 0.5, 0.7] {
            let want = 2.0 * std::f64::consts::PI / (gamma(1.0 + 2.0 * h) * (std::f64::consts::PI * h).sin());
            let c = spectral_ratio(h, &[(1.0, 1.0), (2.0, 3.0), (0.4, 2.5)]).unwrap();
            for (_, _, r) in &c.ratios {
                assert!((r / want - 1.0).abs() < 1e-5, "{h}: {r} vs {want}");
            }
            assert!(c.max_imag < 1e-9);
        }
    }

    #[test]
    fn paths_start_at_zero_and_methods_agree() {
        let mut times = vec![0.0];
        times.extend((1..=32).map(|i| i as f64 / 32.0));
        let spec = FbmSpec::new(0.3, times, 1.0).unwrap();
        for method in [FbmMethod::Cholesky, FbmMethod::CirculantFgn] {
            let s = FbmSampler::new(&spec, method).unwrap();
            let paths: Vec<Vec<f64>> = (0..20_000).map(|r| s.sample(9, r)).collect();
            assert!(paths.iter().all(|p| p[0] == 0.0 && p.len() == 33));
            for (i, j) in [(5, 5), (8, 30), (32, 32)] {
                let want = spec.covariance(spec.times[i], spec.times[j]);
                let got = paths.iter().map(|p| p[i] * p[j]).sum::<f64>() / paths.len() as f64;
                let var = spec.covariance(spec.times[i], spec.times[i]) * spec.covariance(spec.times[j], spec.times[j]);
                let se = ((var + want * want) / paths.len() as f64).sqrt();
                assert!((got - want).abs() < 4.0 * se, "{method:?} ({i},{j}): {got} vs {want}");
            }
        }
    }

    #[test]
    fn invalid_hurst_refused() {
        assert!(FbmSpec::new(1.0, vec![1.0], 1.0).is_err());
        assert!(FbmSpec::new(0.5, vec![1.0, 1.0], 1.0).is_err());
        let spec = FbmSpec::new(0.5, vec![1.0, 3.0], 1.0).unwrap();
        assert!(FbmSampler::new(&spec, FbmMethod::CirculantFgn).is_err());
    }
}
