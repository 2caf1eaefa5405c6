//! Stationary Gaussian fields on the lattice, their subordinated block sums, and
//! exact formulas for the block-sum moments.

mod diagnostics;
mod exact;
mod experiment;
mod renormalize;
mod simulate;

pub use diagnostics::{limit_diagnostics, psi_limit_check, LimitReport, PsiRow, PsiTable, MIN_REPLICATES};
pub use exact::{
    block_covariance_exact, check_summable, covariance_sequence, displacement_sums, lattice_sum, sigma_limit,
    sigma_total, variance_exact, CovarianceStep, SigmaLimit,
};
pub use experiment::{BlockExperiment, BlockSamples};
pub use renormalize::{norming, renormalize, NormingRegime, RenormalizedField};
pub use simulate::{simulate_field, subordinate, FieldSample, Method, Sampler, Subordinator, CHOLESKY_LIMIT};
