use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::chaos::{RegularSystem, SpectralRealization};
use crate::error::{invalid, Error, Result};
use crate::hermite::{GaussHermiteRule, HermiteExpansion};
use crate::rng::Normals;
use crate::spectral::{Correlation, SpectralDensity};

/// Largest number of sites handled by the Cholesky method.
pub const CHOLESKY_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    CirculantEmbedding,
    SpectralSynthesis,
    Cholesky,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circulant" | "circulant-embedding" => Ok(Method::CirculantEmbedding),
            "spectral" | "spectral-synthesis" => Ok(Method::SpectralSynthesis),
            "cholesky" => Ok(Method::Cholesky),
            _ => Err(invalid(format!("unknown simulation method {s}"))),
        }
    }
}

/// Values on the box `[0, shape_1) x ... x [0, shape_nu)`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
    /// `None` for spectral synthesis from a tabulated density.
    pub correlation: Option<Correlation>,
    pub seed: u64,
    pub replicate: u64,
}

impl FieldSample {
    pub fn nu(&self) -> usize {
        self.shape.len()
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        let flat = idx.iter().zip(&self.shape).fold(0, |acc, (&i, &n)| acc * n + i);
        self.values[flat]
    }
}

fn lag(k: usize, m: usize) -> i64 {
    if k <= m / 2 { k as i64 } else { k as i64 - m as i64 }
}

/// In-place multidimensional FFT of row-major data.
fn fft_nd(data: &mut [Complex64], dims: &[usize], plans: &[Arc<dyn Fft<f64>>]) {
    let total = data.len();
    let mut stride = total;
    for (d, &m) in dims.iter().enumerate() {
        stride /= m;
        let mut line = vec![Complex64::new(0.0, 0.0); m];
        let outer = total / (m * stride);
        for o in 0..outer {
            for s in 0..stride {
                let base = o * m * stride + s;
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[base + i * stride];
                }
                plans[d].process(&mut line);
                for (i, v) in line.iter().enumerate() {
                    data[base + i * stride] = *v;
                }
            }
        }
    }
}

enum Engine {
    Circulant { dims: Vec<usize>, scale: Vec<f64>, plans: Vec<Arc<dyn Fft<f64>>> },
    Cholesky { l: DMatrix<f64> },
    Spectral { system: Arc<RegularSystem>, plans: Vec<Arc<dyn Fft<f64>>> },
}

/// A prepared exact Gaussian sampler for one box shape.
pub struct Sampler {
    shape: Vec<usize>,
    correlation: Option<Correlation>,
    engine: Engine,
    /// Smallest eigenvalue of the circulant embedding, relative to the largest.
    pub min_eigenvalue: f64,
}

impl Sampler {
    pub fn new(corr: &Correlation, shape: &[usize], method: Method) -> Result<Self> {
        if shape.len() != corr.nu() || shape.contains(&0) {
            return Err(invalid("box shape does not match the field dimension"));
        }
        let mut s = Self::from_covariance(shape, |l| corr.r(l), method)?;
        s.correlation = Some(*corr);
        Ok(s)
    }

    /// Sampler for a stationary covariance given as a function of the lag.
    pub fn from_covariance<C: Fn(&[i64]) -> f64>(shape: &[usize], cov: C, method: Method) -> Result<Self> {
        if shape.is_empty() || shape.len() > 2 || shape.contains(&0) {
            return Err(invalid("box must be a nonempty line or rectangle"));
        }
        match method {
            Method::CirculantEmbedding => Self::circulant(&cov, shape),
            Method::Cholesky => Self::cholesky(&cov, shape),
            Method::SpectralSynthesis => Err(invalid("spectral synthesis needs a spectral density; use Sampler::spectral")),
        }
    }

    fn circulant<C: Fn(&[i64]) -> f64>(cov: &C, shape: &[usize]) -> Result<Self> {
        let mut last_min = 0.0;
        for factor in [2usize, 4] {
            let dims: Vec<usize> = shape.iter().map(|&n| factor * n).collect();
            let total: usize = dims.iter().product();
            let mut planner = FftPlanner::new();
            let plans: Vec<Arc<dyn Fft<f64>>> = dims.iter().map(|&m| planner.plan_fft_forward(m)).collect();
            let mut c = vec![Complex64::new(0.0, 0.0); total];
            let mut idx = vec![0usize; dims.len()];
            for (flat, v) in c.iter_mut().enumerate() {
                let mut rest = flat;
                for d in (0..dims.len()).rev() {
                    idx[d] = rest % dims[d];
                    rest /= dims[d];
                }
                let l: Vec<i64> = idx.iter().zip(&dims).map(|(&k, &m)| lag(k, m)).collect();
                *v = Complex64::new(cov(&l), 0.0);
            }
            fft_nd(&mut c, &dims, &plans);
            let max = c.iter().map(|z| z.re).fold(f64::MIN, f64::max);
            let min = c.iter().map(|z| z.re).fold(f64::MAX, f64::min);
            last_min = min / max;
            if min >= -1e-10 * max {
                let scale = c.iter().map(|z| (z.re.max(0.0) / total as f64).sqrt()).collect();
                return Ok(Sampler {
                    shape: shape.to_vec(),
                    correlation: None,
                    engine: Engine::Circulant { dims, scale, plans },
                    min_eigenvalue: last_min,
                });
            }
        }
        if shape.iter().product::<usize>() <= CHOLESKY_LIMIT {
            let mut s = Self::cholesky(cov, shape).map_err(|e| match e {
                Error::IndefiniteEmbedding { .. } => Error::IndefiniteEmbedding { min_eig: last_min },
                e => e,
            })?;
            s.min_eigenvalue = last_min;
            return Ok(s);
        }
        Err(Error::IndefiniteEmbedding { min_eig: last_min })
    }

    fn cholesky<C: Fn(&[i64]) -> f64>(cov: &C, shape: &[usize]) -> Result<Self> {
        let total: usize = shape.iter().product();
        if total > CHOLESKY_LIMIT {
            return Err(invalid(format!("Cholesky simulation is limited to {CHOLESKY_LIMIT} sites")));
        }
        let sites: Vec<Vec<i64>> = (0..total)
            .map(|f| {
                let mut idx = vec![0i64; shape.len()];
                let mut rest = f;
                for d in (0..shape.len()).rev() {
                    idx[d] = (rest % shape[d]) as i64;
                    rest /= shape[d];
                }
                idx
            })
            .collect();
        let cov = DMatrix::from_fn(total, total, |i, j| {
            let l: Vec<i64> = sites[i].iter().zip(&sites[j]).map(|(a, b)| a - b).collect();
            cov(&l)
        });
        let chol = cov.cholesky().ok_or(Error::IndefiniteEmbedding { min_eig: f64::NAN })?;
        Ok(Sampler { shape: shape.to_vec(), correlation: None, engine: Engine::Cholesky { l: chol.l() }, min_eigenvalue: f64::NAN })
    }

    /// Synthesis `X_n = sum_j e^{i(n, x_j)} Z_j` from a realization of the random
    /// spectral measure on the cells of a torus grid.
    pub fn spectral(g: &SpectralDensity, shape: &[usize]) -> Result<Self> {
        let grid = &g.grid;
        if (grid.half_width - std::f64::consts::PI).abs() > 1e-12 {
            return Err(invalid("spectral synthesis needs a density on the torus [-pi, pi)"));
        }
        if shape.len() != grid.nu || shape.iter().any(|&n| n as i64 > g.max_lag()) {
            return Err(invalid(format!("box exceeds the resolution limit {} of the spectral grid", g.max_lag())));
        }
        let system = Arc::new(RegularSystem::build(g, grid.resolution)?);
        let mut planner = FftPlanner::new();
        let plans = vec![planner.plan_fft_inverse(grid.resolution); grid.nu];
        Ok(Sampler { shape: shape.to_vec(), correlation: None, engine: Engine::Spectral { system, plans }, min_eigenvalue: f64::NAN })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn sample(&self, seed: u64, replicate: u64) -> FieldSample {
        let total: usize = self.shape.iter().product();
        let mut values = vec![0.0; total];
        match &self.engine {
            Engine::Circulant { dims, scale, plans } => {
                let mut g = Normals::new(seed, replicate);
                let mut w: Vec<Complex64> = scale
                    .iter()
                    .map(|s| {
                        let (a, b) = g.pair();
                        Complex64::new(a * s, b * s)
                    })
                    .collect();
                fft_nd(&mut w, dims, plans);
                for (flat, v) in values.iter_mut().enumerate() {
                    *v = w[embed(flat, &self.shape, dims)].re;
                }
            }
            Engine::Cholesky { l } => {
                let mut g = Normals::new(seed, replicate);
                let mut z = vec![0.0; total];
                g.fill(&mut z);
                let x = l * nalgebra::DVector::from_vec(z);
                values.copy_from_slice(x.as_slice());
            }
            Engine::Spectral { system, plans } => {
                let w = SpectralRealization::sample(system.clone(), seed, replicate);
                let grid = &system.grid;
                let r = grid.resolution;
                let dims = vec![r; grid.nu];
                let mut z = w.z.clone();
                fft_nd(&mut z, &dims, plans);
                // cell centers are -pi + (c + 1/2) h, so each axis contributes a phase
                let h = grid.step();
                for (flat, v) in values.iter_mut().enumerate() {
                    let mut rest = flat;
                    let mut phase = 0.0;
                    let mut idx = vec![0usize; grid.nu];
                    for d in (0..grid.nu).rev() {
                        idx[d] = rest % self.shape[d];
                        rest /= self.shape[d];
                        phase += idx[d] as f64 * (-std::f64::consts::PI + 0.5 * h);
                    }
                    let at = idx.iter().fold(0, |acc, &i| acc * r + i);
                    *v = (z[at] * Complex64::from_polar(1.0, phase)).re;
                }
            }
        }
        FieldSample { shape: self.shape.clone(), values, correlation: self.correlation, seed, replicate }
    }
}

fn embed(flat: usize, shape: &[usize], dims: &[usize]) -> usize {
    let mut rest = flat;
    let mut out = 0;
    let mut mult = 1;
    for d in (0..shape.len()).rev() {
        let i = rest % shape[d];
        rest /= shape[d];
        out += i * mult;
        mult *= dims[d];
    }
    out
}

/// One replicate of the field on a box.
pub fn simulate_field(corr: &Correlation, shape: &[usize], seed: u64, replicate: u64, method: Method) -> Result<FieldSample> {
    Ok(Sampler::new(corr, shape, method)?.sample(seed, replicate))
}

/// The function applied pointwise to the Gaussian field.
#[derive(Clone)]
pub enum Subordinator {
    Hermite(HermiteExpansion),
    Function { f: Arc<dyn Fn(f64) -> f64 + Send + Sync>, mean: f64 },
}

impl std::fmt::Debug for Subordinator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Subordinator::Hermite(e) => write!(f, "Hermite({:?})", e.coeffs),
            Subordinator::Function { mean, .. } => write!(f, "Function {{ mean: {mean} }}"),
        }
    }
}

impl Subordinator {
    /// A function of the field, centered by its Gaussian mean.
    pub fn function(f: Arc<dyn Fn(f64) -> f64 + Send + Sync>) -> Result<Self> {
        let rule = GaussHermiteRule::new(200)?;
        let mean = rule.expect(|x| f(x));
        Ok(Subordinator::Function { f, mean })
    }

    pub fn apply(&self, x: f64) -> f64 {
        match self {
            Subordinator::Hermite(e) => e.eval(x) - e.coeffs.first().copied().unwrap_or(0.0),
            Subordinator::Function { f, mean } => f(x) - mean,
        }
    }
}

/// `ξ_n = H(X_n) - E H(X_n)`.
pub fn subordinate(field: &FieldSample, h: &Subordinator) -> FieldSample {
    FieldSample { values: field.values.iter().map(|&x| h.apply(x)).collect(), ..field.clone() }
}
