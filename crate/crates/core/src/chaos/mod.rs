//! Regular systems, simple kernels and their multiple Wiener-Itô integrals with
//! respect to a random spectral measure.

mod integral;
mod kernel;
mod realization;
mod system;

pub use integral::{
    adapted_together, change_of_variables, inner, integrate, integrate_product, ito_compare, ItoComparison,
};
pub use kernel::GridKernel;
pub use realization::SpectralRealization;
pub use system::RegularSystem;

pub(crate) use kernel::{distinct_classes, same_system};
