use serde::Serialize;

use crate::error::{invalid, Result};
use crate::spectral::{Grid, SpectralDensity};

/// A regular system of sets: the cells of an even grid, paired with their mirror images.
///
/// Cells are addressed by a signed index `j` in `±1..=±M`, where `-j` is the mirror of
/// `j`, or by the storage position `0..2M` (the row-major cell number). The cell of
/// index `j > 0` is `M + j - 1` and the cell of `-j` is `M - j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularSystem {
    pub grid: Grid,
    /// `G(Δ)` for every cell, by position.
    pub masses: Vec<f64>,
}

impl RegularSystem {
    /// Aggregates `g` onto a grid with `resolution` cells per axis.
    pub fn build(g: &SpectralDensity, resolution: usize) -> Result<Self> {
        let coarse = Grid::new(g.grid.nu, resolution, g.grid.half_width)?;
        let parent = g.grid.parent_map(&coarse)?;
        let mut masses = vec![0.0; coarse.cells()];
        for (c, &p) in parent.iter().enumerate() {
            masses[p] += g.masses[c];
        }
        if !(masses.iter().sum::<f64>() > 0.0) {
            return Err(invalid("spectral measure has no mass on the grid"));
        }
        let scale = masses.iter().cloned().fold(0.0, f64::max);
        for c in 0..coarse.cells() {
            if (masses[c] - masses[coarse.mirror(c)]).abs() > 1e-9 * scale {
                return Err(invalid("spectral measure is not even"));
            }
        }
        Ok(RegularSystem { grid: coarse, masses })
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// Number of mirror pairs `M`.
    pub fn pairs(&self) -> usize {
        self.masses.len() / 2
    }

    pub fn position(&self, j: i64) -> usize {
        let m = self.pairs() as i64;
        if j > 0 { (m + j - 1) as usize } else { (m + j) as usize }
    }

    pub fn index(&self, pos: usize) -> i64 {
        let m = self.pairs() as i64;
        let p = pos as i64;
        if p >= m { p - m + 1 } else { p - m }
    }

    /// `|j|` for the cell at `pos`, in `1..=M`.
    pub fn class(&self, pos: usize) -> usize {
        let m = self.pairs();
        if pos >= m { pos - m + 1 } else { m - pos }
    }

    pub fn mirror(&self, pos: usize) -> usize {
        self.masses.len() - 1 - pos
    }

    pub fn mass(&self, pos: usize) -> f64 {
        self.masses[pos]
    }

    pub fn center(&self, pos: usize) -> Vec<f64> {
        self.grid.center(pos)
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Position in `coarse` of the cell containing each cell of `self`.
    pub fn parent_map(&self, coarse: &RegularSystem) -> Result<Vec<usize>> {
        self.grid.parent_map(&coarse.grid)
    }

    /// Same cells with masses taken from another measure.
    pub fn with_masses(&self, masses: Vec<f64>) -> Result<Self> {
        if masses.len() != self.masses.len() {
            return Err(invalid("mass vector does not match the system"));
        }
        Ok(RegularSystem { grid: self.grid.clone(), masses })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_position_round_trip() {
        let g = SpectralDensity::uniform(Grid::torus(1, 4).unwrap(), 1.0);
        let s = RegularSystem::build(&g, 4).unwrap();
        assert_eq!(s.pairs(), 2);
        // (0, pi/2) carries index 1 and its mirror (-pi/2, 0) carries -1
        assert_eq!(s.position(1), 2);
        assert_eq!(s.position(-1), 1);
        assert_eq!(s.position(-2), 0);
        for p in 0..4 {
            assert_eq!(s.position(s.index(p)), p);
            assert_eq!(s.index(s.mirror(p)), -s.index(p));
            assert_eq!(s.class(p), s.index(p).unsigned_abs() as usize);
        }
        assert!(s.center(s.position(1))[0] > 0.0);
    }

    #[test]
    fn rejects_odd_and_empty() {
        let g = SpectralDensity::uniform(Grid::torus(1, 6).unwrap(), 1.0);
        assert!(RegularSystem::build(&g, 3).is_err());
        let z = SpectralDensity::uniform(Grid::torus(1, 4).unwrap(), 0.0);
        assert!(RegularSystem::build(&z, 2).is_err());
    }

    #[test]
    fn aggregation_preserves_mass() {
        let g = SpectralDensity::from_fn(Grid::torus(2, 8).unwrap(), |x| 1.0 + x[0].cos() * x[1].cos());
        let s = RegularSystem::build(&g, 4).unwrap();
        assert!((s.total_mass() - g.total_mass()).abs() < 1e-12);
    }
}
