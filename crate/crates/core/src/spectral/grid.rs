use serde::Serialize;

use crate::error::{invalid, Result};

/// The cube `[-half_width, half_width)^nu` cut into `resolution^nu` equal half-open cells,
/// numbered in row-major order. With an even resolution the cell numbered `L` is the mirror
/// image of the cell numbered `cells - 1 - L`, and no cell straddles a coordinate hyperplane.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub nu: usize,
    pub resolution: usize,
    pub half_width: f64,
}

impl Grid {
    pub fn new(nu: usize, resolution: usize, half_width: f64) -> Result<Self> {
        if !(1..=2).contains(&nu) {
            return Err(invalid(format!("dimension {nu} is not supported (use 1 or 2)")));
        }
        if resolution == 0 || resolution % 2 != 0 {
            return Err(invalid(format!("grid resolution must be even and positive, got {resolution}")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(invalid("grid half width must be positive"));
        }
        Ok(Grid { nu, resolution, half_width })
    }

    /// The torus `[-pi, pi)^nu`.
    pub fn torus(nu: usize, resolution: usize) -> Result<Self> {
        Self::new(nu, resolution, std::f64::consts::PI)
    }

    pub fn cells(&self) -> usize {
        self.resolution.pow(self.nu as u32)
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / self.resolution as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.step().powi(self.nu as i32)
    }

    pub fn mirror(&self, cell: usize) -> usize {
        self.cells() - 1 - cell
    }

    pub fn multi_index(&self, cell: usize) -> Vec<usize> {
        let mut idx = vec![0; self.nu];
        let mut rest = cell;
        for d in (0..self.nu).rev() {
            idx[d] = rest % self.resolution;
            rest /= self.resolution;
        }
        idx
    }

    pub fn linear(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.resolution + i)
    }

    /// Lower corner of the cell along each axis.
    pub fn lower(&self, cell: usize) -> Vec<f64> {
        let h = self.step();
        self.multi_index(cell).iter().map(|&i| -self.half_width + i as f64 * h).collect()
    }

    pub fn center(&self, cell: usize) -> Vec<f64> {
        let h = self.step();
        self.lower(cell).iter().map(|x| x + 0.5 * h).collect()
    }

    /// Whether `coarse` is obtained from `self` by merging blocks of cells.
    pub fn refines(&self, coarse: &Grid) -> bool {
        self.nu == coarse.nu
            && self.half_width == coarse.half_width
            && self.resolution >= coarse.resolution
            && self.resolution % coarse.resolution == 0
    }

    /// Coarse cell containing each fine cell.
    pub fn parent_map(&self, coarse: &Grid) -> Result<Vec<usize>> {
        if !self.refines(coarse) {
            return Err(invalid("grids are not nested"));
        }
        let f = self.resolution / coarse.resolution;
        Ok((0..self.cells())
            .map(|c| {
                let idx: Vec<usize> = self.multi_index(c).iter().map(|i| i / f).collect();
                coarse.linear(&idx)
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirror_cells_have_opposite_centers() {
        let g = Grid::torus(2, 6).unwrap();
        for c in 0..g.cells() {
            let a = g.center(c);
            let b = g.center(g.mirror(c));
            for (x, y) in a.iter().zip(&b) {
                assert!((x + y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn odd_resolution_rejected() {
        assert!(Grid::torus(1, 5).is_err());
    }

    #[test]
    fn parents_nest() {
        let fine = Grid::torus(2, 8).unwrap();
        let coarse = Grid::torus(2, 4).unwrap();
        let p = fine.parent_map(&coarse).unwrap();
        for c in 0..fine.cells() {
            let x = fine.center(c);
            let lo = coarse.lower(p[c]);
            for d in 0..2 {
                assert!(x[d] > lo[d] && x[d] < lo[d] + coarse.step());
            }
            assert_eq!(p[fine.mirror(c)], coarse.mirror(p[c]));
        }
    }
}
