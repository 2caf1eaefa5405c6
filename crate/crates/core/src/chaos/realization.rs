use std::sync::Arc;

use num_complex::Complex64;

use super::kernel::same_system;
use super::system::RegularSystem;
use crate::error::{Error, Result};
use crate::rng::normal_pair;

/// Values `Z_G(Δ_j)` of the random spectral measure on every cell of a regular system.
///
/// Real and imaginary parts of `Z_j`, `j > 0`, are independent centered normals with
/// variance `G(Δ_j)/2`, and `Z_{-j} = conj(Z_j)`.
#[derive(Debug, Clone)]
pub struct SpectralRealization {
    pub system: Arc<RegularSystem>,
    /// By cell position.
    pub z: Vec<Complex64>,
}

impl SpectralRealization {
    /// Draws `Z_j` from the normal pair number `j - 1` of the replicate stream.
    pub fn sample(system: Arc<RegularSystem>, seed: u64, replicate: u64) -> Self {
        let m = system.pairs();
        let mut z = vec![Complex64::new(0.0, 0.0); system.len()];
        for j in 1..=m {
            let pos = system.position(j as i64);
            let s = (0.5 * system.mass(pos)).sqrt();
            let (a, b) = normal_pair(seed, replicate, (j - 1) as u64);
            let v = Complex64::new(s * a, s * b);
            z[pos] = v;
            z[system.mirror(pos)] = v.conj();
        }
        SpectralRealization { system, z }
    }

    /// Sums over the children of each cell of a coarser system, which gives the
    /// realization of the same random measure on the coarse cells.
    pub fn coarsen(&self, coarse: Arc<RegularSystem>) -> Result<Self> {
        let parent = self.system.parent_map(&coarse)?;
        let mut z = vec![Complex64::new(0.0, 0.0); coarse.len()];
        for (p, &q) in parent.iter().enumerate() {
            z[q] += self.z[p];
        }
        Ok(SpectralRealization { system: coarse, z })
    }

    pub(crate) fn check(&self, system: &Arc<RegularSystem>) -> Result<()> {
        if same_system(&self.system, system) { Ok(()) } else { Err(Error::NotAdapted) }
    }
}
