//! Spectral measures of stationary fields: grids, model densities with a power-law
//! singularity at the origin, rescaling, and the limiting homogeneous measure.

mod density;
mod grid;
pub mod limit;
mod model;
pub mod integrability;

pub use density::{density_from_model, SpectralDensity};
pub use grid::Grid;
pub use model::{
    riesz_constant, AngularFactor, Correlation, CorrelationModel, Decay, Regularizer, SlowlyVarying,
};
