use rayon::prelude::*;
use serde::Serialize;

use super::grid::Grid;
use super::model::{CorrelationModel, Regularizer};
use crate::error::{invalid, Result};
use crate::io::Table;
use crate::quad;

/// A finite even measure on a [`Grid`], stored as cell masses.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralDensity {
    pub grid: Grid,
    pub masses: Vec<f64>,
}

impl SpectralDensity {
    pub fn from_masses(grid: Grid, masses: Vec<f64>) -> Result<Self> {
        if masses.len() != grid.cells() {
            return Err(invalid("mass vector does not match the grid"));
        }
        if masses.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            return Err(invalid("cell masses must be finite and nonnegative"));
        }
        Ok(SpectralDensity { grid, masses })
    }

    pub fn uniform(grid: Grid, total: f64) -> Self {
        let m = total / grid.cells() as f64;
        let masses = vec![m; grid.cells()];
        SpectralDensity { grid, masses }
    }

    /// Cell integrals of a density that is smooth inside every cell.
    pub fn from_fn<F: Fn(&[f64]) -> f64 + Sync>(grid: Grid, g: F) -> Self {
        let masses = (0..grid.cells()).into_par_iter().map(|c| smooth_cell_integral(&grid, c, &g, 4)).collect();
        SpectralDensity { grid, masses }
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn is_even(&self, tol: f64) -> bool {
        let scale = self.masses.iter().cloned().fold(0.0, f64::max);
        (0..self.grid.cells()).all(|c| (self.masses[c] - self.masses[self.grid.mirror(c)]).abs() <= tol * scale)
    }

    pub fn density_at_cell(&self, c: usize) -> f64 {
        self.masses[c] / self.grid.cell_volume()
    }

    /// Largest lattice shift per axis for which a cell spans at most a quarter period.
    pub fn max_lag(&self) -> i64 {
        (std::f64::consts::PI / (4.0 * self.grid.step())).floor() as i64
    }

    /// `int e^{i(n,x)} G(dx)`, treating the density as constant inside each cell.
    pub fn correlation(&self, n: &[i64]) -> Result<f64> {
        if n.len() != self.grid.nu {
            return Err(invalid("lag dimension does not match the grid"));
        }
        let lim = self.max_lag();
        if n.iter().any(|k| k.abs() > lim) {
            return Err(invalid(format!("lag {n:?} exceeds the grid resolution limit {lim}")));
        }
        let h = self.grid.step();
        let damp: f64 = n.iter().map(|&k| sinc(0.5 * k as f64 * h)).product();
        let sum: f64 = (0..self.grid.cells())
            .map(|c| {
                if self.masses[c] == 0.0 {
                    return 0.0;
                }
                let x = self.grid.center(c);
                let phase: f64 = n.iter().zip(&x).map(|(&k, xi)| k as f64 * xi).sum();
                self.masses[c] * phase.cos()
            })
            .sum();
        Ok(sum * damp)
    }

    /// `r(0), ..., r(nmax)` along the first axis.
    pub fn correlation_table(&self, nmax: i64) -> Result<Vec<f64>> {
        (0..=nmax)
            .into_par_iter()
            .map(|k| {
                let mut n = vec![0; self.grid.nu];
                n[0] = k;
                self.correlation(&n)
            })
            .collect()
    }

    /// `G_N(A) = N^alpha / L(N) G(A / N)`, as a measure on the dilated grid.
    pub fn rescale(&self, n: f64, model: &CorrelationModel) -> Result<Self> {
        if !(n > 0.0) {
            return Err(invalid("rescaling parameter must be positive"));
        }
        let factor = n.powf(model.alpha) / model.slowly_varying.eval(n);
        let grid = Grid::new(self.grid.nu, self.grid.resolution, self.grid.half_width * n)?;
        Ok(SpectralDensity { grid, masses: self.masses.iter().map(|m| m * factor).collect() })
    }

    /// Mass of the box `[lo, hi]`, splitting cells in proportion to overlap.
    pub fn measure_of_box(&self, lo: &[f64], hi: &[f64]) -> f64 {
        let g = &self.grid;
        let h = g.step();
        // restrict to the index range that can overlap the box on each axis
        let range: Vec<(usize, usize)> = (0..g.nu)
            .map(|d| {
                let a = ((lo[d] + g.half_width) / h).floor().max(0.0) as usize;
                let b = (((hi[d] + g.half_width) / h).ceil().max(0.0) as usize).min(g.resolution);
                (a.min(g.resolution), b)
            })
            .collect();
        let overlap = |d: usize, i: usize| {
            let c0 = -g.half_width + i as f64 * h;
            ((hi[d].min(c0 + h) - lo[d].max(c0)) / h).max(0.0)
        };
        let mut total = 0.0;
        match g.nu {
            1 => {
                for i in range[0].0..range[0].1 {
                    total += self.masses[i] * overlap(0, i);
                }
            }
            _ => {
                for i in range[0].0..range[0].1 {
                    let fi = overlap(0, i);
                    if fi == 0.0 {
                        continue;
                    }
                    for j in range[1].0..range[1].1 {
                        total += self.masses[g.linear(&[i, j])] * fi * overlap(1, j);
                    }
                }
            }
        }
        total
    }

    pub fn to_table(&self) -> Table {
        let mut header: Vec<String> = (0..self.grid.nu).map(|d| format!("x{}", d + 1)).collect();
        header.push("mass".into());
        header.push("density".into());
        let mut t = Table::new(header);
        for c in 0..self.grid.cells() {
            let mut row = self.grid.center(c);
            row.push(self.masses[c]);
            row.push(self.density_at_cell(c));
            t.push_f64(&row);
        }
        t
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x }
}

fn smooth_cell_integral<F: Fn(&[f64]) -> f64>(grid: &Grid, c: usize, g: &F, order: usize) -> f64 {
    let rule = quad::legendre(order);
    let h = grid.step();
    let lo = grid.lower(c);
    let half = 0.5 * h;
    match grid.nu {
        1 => rule.iter().map(|&(x, w)| w * g(&[lo[0] + half * (1.0 + x)])).sum::<f64>() * half,
        _ => {
            let mut s = 0.0;
            for &(x, wx) in rule.iter() {
                for &(y, wy) in rule.iter() {
                    s += wx * wy * g(&[lo[0] + half * (1.0 + x), lo[1] + half * (1.0 + y)]);
                }
            }
            s * half * half
        }
    }
}

/// Spectral density of the model, `|x|^(alpha - nu) a_0(x/|x|) L(1/|x|) h(x)`, restricted
/// to the grid, where `a_0` is chosen so that the correlation decays like the model.
/// Cells touching the origin are integrated in radial coordinates.
pub fn density_from_model(model: &CorrelationModel, regularizer: &Regularizer, grid: &Grid) -> Result<SpectralDensity> {
    model.validate()?;
    if grid.nu != model.nu {
        return Err(invalid("grid and model dimensions differ"));
    }
    let angular = model.spectral_angular();
    let alpha = model.alpha;
    let nu = model.nu as f64;
    let sv = model.slowly_varying;
    let reg = *regularizer;
    let g = move |x: &[f64]| {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r == 0.0 {
            return 0.0;
        }
        let unit: Vec<f64> = x.iter().map(|v| v / r).collect();
        r.powf(alpha - nu) * angular.eval(&unit) * sv.eval(1.0 / r) * reg.eval(x)
    };
    let half = grid.resolution / 2;
    let masses: Vec<f64> = (0..grid.cells())
        .into_par_iter()
        .map(|c| {
            let idx = grid.multi_index(c);
            let touches = idx.iter().all(|&i| i == half || i + 1 == half);
            if touches {
                origin_cell_integral(grid, c, &g, alpha)
            } else {
                smooth_cell_integral(grid, c, &g, 6)
            }
        })
        .collect();
    SpectralDensity::from_masses(grid.clone(), masses)
}

/// Integral over a cell with a corner at the origin, where the density behaves like
/// `|x|^(alpha - nu)`.
fn origin_cell_integral<F: Fn(&[f64]) -> f64>(grid: &Grid, c: usize, g: &F, alpha: f64) -> f64 {
    let h = grid.step();
    let lo = grid.lower(c);
    let sgn: Vec<f64> = lo.iter().map(|&l| if l < 0.0 { -1.0 } else { 1.0 }).collect();
    match grid.nu {
        1 => quad::endpoint_singular(|x| g(&[x]), 0.0, sgn[0] * h, 1.0 - alpha),
        _ => quad::rect_corner(|x, y| g(&[x, y]), [0.0, 0.0], sgn[0] * h, sgn[1] * h, 2.0 - alpha),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::model::CorrelationModel;
    use statrs::function::gamma::gamma;

    #[test]
    fn correlation_of_closed_form_density() {
        // g(x) = |x|^(a-1) e^{-|x|} has r(t) = 2 Gamma(a) cos(a atan t) / (1+t^2)^(a/2)
        let a = 0.4;
        let grid = Grid::new(1, 1 << 16, 60.0).unwrap();
        let h = grid.step();
        let masses: Vec<f64> = (0..grid.cells())
            .map(|c| {
                let lo = grid.lower(c)[0];
                let (e, d) = if lo < 0.0 { (lo + h, -h) } else { (lo, h) };
                let beta = if e == 0.0 { 1.0 - a } else { 0.0 };
                quad::endpoint_singular(|x: f64| x.abs().powf(a - 1.0) * (-x.abs()).exp(), e, d, beta)
            })
            .collect();
        let g = SpectralDensity::from_masses(grid, masses).unwrap();
        for t in [0i64, 1, 3, 8, 16] {
            let tf = t as f64;
            let exact = 2.0 * gamma(a) * (a * tf.atan()).cos() / (1.0 + tf * tf).powf(a / 2.0);
            let got = g.correlation(&[t]).unwrap();
            assert!((got - exact).abs() < 1e-4 * exact.abs().max(1.0), "{t}: {got} vs {exact}");
        }
    }

    #[test]
    fn nyquist_guard() {
        let g = SpectralDensity::uniform(Grid::torus(1, 64).unwrap(), 1.0);
        assert!(g.correlation(&[8]).is_ok());
        assert!(g.correlation(&[9]).is_err());
    }

    #[test]
    fn rescale_identity_and_scaling() {
        let model = CorrelationModel::power_law(1, 0.6).unwrap();
        let g = density_from_model(&model, &Regularizer::default(), &Grid::torus(1, 1 << 12).unwrap()).unwrap();
        assert_eq!(g.rescale(1.0, &model).unwrap(), g);
        // G_{uN}(uA) = u^alpha L(N)/L(uN) G_N(A)
        let (n, u) = (8.0, 2.0);
        let gn = g.rescale(n, &model).unwrap();
        let gun = g.rescale(u * n, &model).unwrap();
        let (lo, hi) = ([0.3], [1.7]);
        let lhs = gun.measure_of_box(&[u * lo[0]], &[u * hi[0]]);
        let rhs = u.powf(model.alpha) * gn.measure_of_box(&lo, &hi);
        assert!((lhs / rhs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn model_density_is_even_and_tail_matches() {
        let model = CorrelationModel::power_law(1, 0.5).unwrap();
        let g = density_from_model(&model, &Regularizer::default(), &Grid::torus(1, 1 << 14).unwrap()).unwrap();
        assert!(g.is_even(1e-12));
        // total mass of the origin cell matches the exact radial integral
        let half = g.grid.resolution / 2;
        let h = g.grid.step();
        let k = riesz(0.5);
        let exact_approx = h.powf(0.5) / 0.5 / k;
        assert!((g.masses[half] / exact_approx - 1.0).abs() < 1e-3);
    }

    fn riesz(alpha: f64) -> f64 {
        crate::spectral::model::riesz_constant(1.0, alpha, 0)
    }

    #[test]
    fn box_measure_splits_cells() {
        let g = SpectralDensity::uniform(Grid::new(2, 4, 2.0).unwrap(), 16.0);
        // unit density; box of area 1.5 * 0.5
        let m = g.measure_of_box(&[-0.25, 0.1], &[1.25, 0.6]);
        assert!((m - 0.75).abs() < 1e-12);
    }
}
