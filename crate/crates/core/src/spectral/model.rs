use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{invalid, Result};
use crate::quad;

/// Direction dependence `a(theta)` of the correlation function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AngularFactor {
    Constant { value: f64 },
    /// `c0 + c2 cos(2 theta)` in the plane; on the line only `theta = 0, pi` occur.
    Harmonic { c0: f64, c2: f64 },
}

impl AngularFactor {
    pub fn one() -> Self {
        AngularFactor::Constant { value: 1.0 }
    }

    pub fn eval(&self, unit: &[f64]) -> f64 {
        match *self {
            AngularFactor::Constant { value } => value,
            AngularFactor::Harmonic { c0, c2 } => {
                let cos2 = if unit.len() >= 2 { unit[0] * unit[0] - unit[1] * unit[1] } else { 1.0 };
                c0 + c2 * cos2
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            AngularFactor::Constant { value } => value > 0.0 && value.is_finite(),
            AngularFactor::Harmonic { c0, c2 } => c0 > c2.abs(),
        };
        if ok { Ok(()) } else { Err(invalid("angular factor must be positive and continuous")) }
    }
}

/// Decay of the perturbing function in the Karamata representation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Decay {
    /// `1 / ln s`
    InverseLog,
    /// `c s^(-p)`
    Power { c: f64, p: f64 },
}

impl Decay {
    fn eval(&self, s: f64) -> f64 {
        match *self {
            Decay::InverseLog => 1.0 / s.ln(),
            Decay::Power { c, p } => c * s.powf(-p),
        }
    }
}

/// Slowly varying function `L(t)`, defined for `t > 0` and constant below its start point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SlowlyVarying {
    Constant { value: f64 },
    /// `1 + ln t`
    Log,
    /// `1 + ln(1 + ln t)`
    IteratedLog,
    /// `a0 exp(int_{t0}^t eps(s)/s ds)`
    Karamata { a0: f64, t0: f64, decay: Decay },
}

impl SlowlyVarying {
    pub fn one() -> Self {
        SlowlyVarying::Constant { value: 1.0 }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, SlowlyVarying::Constant { .. })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            SlowlyVarying::Constant { value } => value,
            SlowlyVarying::Log => 1.0 + t.max(1.0).ln(),
            SlowlyVarying::IteratedLog => 1.0 + (1.0 + t.max(1.0).ln()).ln(),
            SlowlyVarying::Karamata { a0, t0, decay } => {
                if t <= t0 {
                    return a0;
                }
                // int eps(s)/s ds in the variable v = ln s
                let (lo, hi) = (t0.ln(), t.ln());
                let panels = ((hi - lo).ceil() as usize).max(1);
                let exponent = quad::gl(|v| decay.eval(v.exp()), lo, hi, panels, 10);
                a0 * exponent.exp()
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            SlowlyVarying::Constant { value } => value > 0.0,
            SlowlyVarying::Log | SlowlyVarying::IteratedLog => true,
            SlowlyVarying::Karamata { a0, t0, decay } => {
                a0 > 0.0
                    && match decay {
                        Decay::InverseLog => t0 > 1.0,
                        Decay::Power { p, .. } => t0 > 0.0 && p > 0.0,
                    }
            }
        };
        if ok { Ok(()) } else { Err(invalid("slowly varying function is not well defined")) }
    }
}

/// `r(n) = |n|^(-alpha) a(n/|n|) L(|n|)` for `n != 0`, with `r(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationModel {
    pub nu: usize,
    pub alpha: f64,
    pub angular: AngularFactor,
    pub slowly_varying: SlowlyVarying,
}

impl CorrelationModel {
    pub fn power_law(nu: usize, alpha: f64) -> Result<Self> {
        let m = CorrelationModel {
            nu,
            alpha,
            angular: AngularFactor::one(),
            slowly_varying: SlowlyVarying::one(),
        };
        m.validate()?;
        Ok(m)
    }

    /// `c |n|^(-alpha)` off the origin. The unit amplitude gives `r(1) = r(0)`, which no
    /// nondegenerate field has; on the line the table is a covariance whenever it is
    /// convex, that is for `c <= 1 / (2 - 2^(-alpha))`.
    pub fn power_law_with_amplitude(nu: usize, alpha: f64, c: f64) -> Result<Self> {
        let m = CorrelationModel { angular: AngularFactor::Constant { value: c }, ..Self::power_law(nu, alpha)? };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.nu) {
            return Err(invalid(format!("dimension {} is not supported (use 1 or 2)", self.nu)));
        }
        if !(self.alpha > 0.0 && self.alpha < self.nu as f64) {
            return Err(invalid(format!("alpha must lie in (0, {}), got {}", self.nu, self.alpha)));
        }
        self.angular.validate()?;
        if self.nu == 2 {
            // a(theta) > 0 is not enough: the limiting spectral density must be nonnegative too
            if let AngularFactor::Harmonic { c0, c2 } = self.spectral_angular() {
                if !(c0 > c2.abs()) {
                    return Err(invalid(format!(
                        "angular factor gives a negative limiting spectral density: |c2| / c0 must stay below {:.4} at alpha = {}",
                        riesz_constant(2.0, self.alpha, 2).abs() / riesz_constant(2.0, self.alpha, 0),
                        self.alpha
                    )));
                }
            }
        }
        self.slowly_varying.validate()
    }

    pub fn correlation(&self, n: &[i64]) -> f64 {
        let norm = n.iter().map(|&k| (k * k) as f64).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 1.0;
        }
        let unit: Vec<f64> = n.iter().map(|&k| k as f64 / norm).collect();
        norm.powf(-self.alpha) * self.angular.eval(&unit) * self.slowly_varying.eval(norm)
    }

    /// Angular factor of the limiting spectral density `|x|^(alpha - nu) a_0(x/|x|)`
    /// whose Fourier transform is `|n|^(-alpha) a(n/|n|)`.
    pub fn spectral_angular(&self) -> AngularFactor {
        let (nu, alpha) = (self.nu as f64, self.alpha);
        match self.angular {
            AngularFactor::Constant { value } => AngularFactor::Constant { value: value / riesz_constant(nu, alpha, 0) },
            AngularFactor::Harmonic { c0, c2 } => {
                if self.nu == 1 {
                    AngularFactor::Constant { value: (c0 + c2) / riesz_constant(nu, alpha, 0) }
                } else {
                    AngularFactor::Harmonic {
                        c0: c0 / riesz_constant(nu, alpha, 0),
                        c2: c2 / riesz_constant(nu, alpha, 2),
                    }
                }
            }
        }
    }
}

/// Fourier transform constant of a homogeneous function: the transform of
/// `|x|^(alpha - nu) Y(x/|x|)` is `K |n|^(-alpha) Y(n/|n|)` for a spherical harmonic
/// `Y` of degree `k`.
pub fn riesz_constant(nu: f64, alpha: f64, k: usize) -> f64 {
    let sign = match k % 4 {
        0 => 1.0,
        2 => -1.0,
        _ => 0.0,
    };
    let kf = k as f64;
    sign * std::f64::consts::PI.powf(nu / 2.0) * 2f64.powf(alpha) * gamma((kf + alpha) / 2.0)
        / gamma((kf + nu - alpha) / 2.0)
}

/// Correlation of a stationary Gaussian field on the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Correlation {
    PowerLaw(CorrelationModel),
    /// `r(n) = 1` at the origin and 0 elsewhere.
    WhiteNoise { nu: usize },
}

impl Correlation {
    pub fn nu(&self) -> usize {
        match self {
            Correlation::PowerLaw(m) => m.nu,
            Correlation::WhiteNoise { nu } => *nu,
        }
    }

    pub fn r(&self, n: &[i64]) -> f64 {
        match self {
            Correlation::PowerLaw(m) => m.correlation(n),
            Correlation::WhiteNoise { .. } => {
                if n.iter().all(|&k| k == 0) { 1.0 } else { 0.0 }
            }
        }
    }

    pub fn model(&self) -> Option<&CorrelationModel> {
        match self {
            Correlation::PowerLaw(m) => Some(m),
            Correlation::WhiteNoise { .. } => None,
        }
    }
}

/// Continuous cutoff `h` multiplying the model spectral density, with `h(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regularizer {
    Gaussian { width: f64 },
    Bump { radius: f64 },
}

impl Default for Regularizer {
    fn default() -> Self {
        Regularizer::Gaussian { width: 1.0 }
    }
}

impl Regularizer {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        match *self {
            Regularizer::Gaussian { width } => (-0.5 * r2 / (width * width)).exp(),
            Regularizer::Bump { radius } => {
                let s = r2 / (radius * radius);
                if s >= 1.0 { 0.0 } else { (1.0 - 1.0 / (1.0 - s)).exp() }
            }
        }
    }
}
