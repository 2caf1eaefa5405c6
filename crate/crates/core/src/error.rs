use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("diagram enumeration over {arity} vertices is too large (about {estimate:.3e} diagrams); use the count or a sampled check")]
    EnumerationTooLarge { arity: usize, estimate: f64 },

    #[error("kernel is not adapted to this regular system")]
    NotAdapted,

    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("kernel violates Hermitian symmetry (imaginary residue {imag:.3e} against magnitude {magnitude:.3e})")]
    SymmetryViolation { imag: f64, magnitude: f64 },

    #[error("correlation power {power} is not summable (partial sums still grow by {growth:.3e} per doubling)")]
    NonSummable { power: usize, growth: f64 },

    #[error("noncentral norming needs k*alpha < nu, got k={k}, alpha={alpha}, nu={nu}")]
    NoncentralDivergent { k: usize, alpha: f64, nu: usize },

    #[error("covariance is not positive definite (smallest eigenvalue estimate {min_eig:.3e})")]
    IndefiniteEmbedding { min_eig: f64 },

    #[error("Hermite truncation leaves relative residual {residual:.3e} above tolerance {tol:.1e}")]
    TruncationResidual { residual: f64, tol: f64 },

    #[error("tail bound holds only for x > {x0:.4}, got x = {x}")]
    BelowThreshold { x: f64, x0: f64 },

    #[error("need at least {min} samples, got {n}")]
    InsufficientSamples { n: usize, min: usize },

    #[error("quadrature: {0}")]
    Quadrature(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
