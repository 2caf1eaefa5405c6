//! Flags, the optional JSON config file, and validation.

use std::path::PathBuf;

use clap::Args;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use spectral_chaos::fields::{Method, NormingRegime};
use spectral_chaos::hermite::HermiteExpansion;
use spectral_chaos::spectral::{AngularFactor, CorrelationModel, SlowlyVarying};

/// A configuration problem, reported with exit status 2.
#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: &str, message: impl Into<String>) -> Self {
        ConfigError { field: field.to_string(), message: message.into() }
    }
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid `{}`: {}", self.field, self.message)
    }
}

pub type ConfigResult<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Root seed of every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo replicates (suite default when omitted).
    #[arg(long, global = true)]
    pub reps: Option<usize>,
    /// Output directory for the CSV results and the manifest.
    #[arg(long, global = true, env = "SPECTRAL_CHAOS_OUT")]
    pub out: Option<PathBuf>,
    /// Worker threads; affects speed only.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// JSON file with default values; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

/// Overlays the flags that were given on top of the config file values.
pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, file: Option<&Value>) -> ConfigResult<T> {
    let mut base = match file {
        Some(Value::Object(m)) => m.clone(),
        Some(_) => return Err(ConfigError::new("config", "expected a JSON object")),
        None => Default::default(),
    };
    let Value::Object(given) = serde_json::to_value(flags).map_err(|e| ConfigError::new("config", e.to_string()))? else {
        unreachable!("argument structs serialize to objects")
    };
    for (k, v) in given {
        if !v.is_null() {
            base.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| ConfigError::new("config", e.to_string()))
}

pub fn parse_list<T: std::str::FromStr>(field: &str, s: &str) -> ConfigResult<Vec<T>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse().map_err(|_| ConfigError::new(field, format!("cannot parse `{p}`"))))
        .collect()
}

/// Points separated by `;`, coordinates by `,`.
pub fn parse_points(field: &str, s: &str, nu: usize) -> ConfigResult<Vec<Vec<f64>>> {
    let pts: Vec<Vec<f64>> = s.split(';').map(|p| parse_list(field, p)).collect::<ConfigResult<_>>()?;
    if pts.iter().any(|p| p.len() != nu) {
        return Err(ConfigError::new(field, format!("every point needs {nu} coordinates")));
    }
    Ok(pts)
}

/// Correlation model and subordinating function.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ModelArgs {
    /// Lattice dimension (1 or 2).
    #[arg(long)]
    pub nu: Option<usize>,
    /// Decay exponent, 0 < alpha < nu.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Constant part of the angular factor of the correlation.
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Coefficient of cos(2 theta) in the angular factor (plane only).
    #[arg(long)]
    pub angular_c2: Option<f64>,
    /// Slowly varying factor: constant, log, iterated-log.
    #[arg(long)]
    pub slowly_varying: Option<String>,
}

pub const DEFAULT_AMPLITUDE: f64 = 0.5;

impl ModelArgs {
    pub fn model(&self, default_alpha: f64) -> ConfigResult<CorrelationModel> {
        let nu = self.nu.unwrap_or(1);
        if !(1..=2).contains(&nu) {
            return Err(ConfigError::new("nu", "only 1 and 2 are supported"));
        }
        let alpha = self.alpha.unwrap_or(default_alpha);
        if !(alpha > 0.0 && alpha < nu as f64) {
            return Err(ConfigError::new("alpha", format!("must lie in (0, {nu})")));
        }
        let c0 = self.amplitude.unwrap_or(DEFAULT_AMPLITUDE);
        if !(c0 > 0.0) {
            return Err(ConfigError::new("amplitude", "must be positive"));
        }
        let angular = match self.angular_c2 {
            None => AngularFactor::Constant { value: c0 },
            Some(c2) if nu == 2 && c2.abs() < c0 => AngularFactor::Harmonic { c0, c2 },
            Some(_) => return Err(ConfigError::new("angular_c2", "needs nu = 2 and |c2| < amplitude")),
        };
        let slowly_varying = match self.slowly_varying.as_deref().unwrap_or("constant") {
            "constant" => SlowlyVarying::one(),
            "log" => SlowlyVarying::Log,
            "iterated-log" => SlowlyVarying::IteratedLog,
            other => return Err(ConfigError::new("slowly_varying", format!("unknown kind `{other}`"))),
        };
        let m = CorrelationModel { nu, alpha, angular, slowly_varying };
        let field = if self.angular_c2.is_some() { "angular_c2" } else { "alpha" };
        m.validate().map_err(|e| ConfigError::new(field, e.to_string()))?;
        Ok(m)
    }
}

/// `H_k` when only `k` is given, otherwise the listed Hermite coefficients `c_0, c_1, ...`.
pub fn expansion(k: Option<usize>, coeffs: Option<&str>) -> ConfigResult<HermiteExpansion> {
    let h = match (k, coeffs) {
        (_, Some(c)) => HermiteExpansion::from_coeffs(parse_list("coeffs", c)?),
        (Some(k), None) => HermiteExpansion::pure(k),
        (None, None) => HermiteExpansion::pure(2),
    };
    let rank = h.rank.ok_or_else(|| ConfigError::new("coeffs", "no nonzero coefficient above order 0"))?;
    if let Some(k) = k {
        if k != rank {
            return Err(ConfigError::new("k", format!("the coefficients have Hermite rank {rank}")));
        }
    }
    Ok(h)
}

pub fn regime(s: Option<&str>, rank: usize) -> ConfigResult<NormingRegime> {
    match s.unwrap_or("noncentral") {
        "noncentral" => Ok(NormingRegime::Noncentral { k: rank }),
        "central" => Ok(NormingRegime::Central),
        other => Err(ConfigError::new("regime", format!("unknown regime `{other}`"))),
    }
}

pub fn method(s: Option<&str>) -> ConfigResult<Method> {
    s.unwrap_or("circulant").parse().map_err(|_| ConfigError::new("method", "use circulant or cholesky"))
}
