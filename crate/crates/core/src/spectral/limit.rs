//! The limit measure `G_0` of the rescaled spectral measures, the Fourier identity it
//! satisfies, and the limit `psi_0` of the normalized block-sum moment transforms.

use serde::Serialize;

use super::density::SpectralDensity;
use super::model::{AngularFactor, CorrelationModel};
use crate::error::{invalid, Error, Result};
use crate::quad;

/// Homogeneous measure with density `c |x|^(alpha - nu) shape(x/|x|)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LimitMeasure {
    pub nu: usize,
    pub alpha: f64,
    pub c: f64,
    pub shape: AngularFactor,
}

fn unit_shape(a: AngularFactor) -> (f64, AngularFactor) {
    match a {
        AngularFactor::Constant { value } => (value, AngularFactor::one()),
        AngularFactor::Harmonic { c0, c2 } => (c0, AngularFactor::Harmonic { c0: 1.0, c2: c2 / c0 }),
    }
}

impl LimitMeasure {
    /// The limit measure whose Fourier transform is the model's correlation decay.
    pub fn from_model(model: &CorrelationModel) -> Self {
        let (c, shape) = unit_shape(model.spectral_angular());
        let shape = if model.nu == 1 { AngularFactor::one() } else { shape };
        LimitMeasure { nu: model.nu, alpha: model.alpha, c, shape }
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r == 0.0 {
            return f64::INFINITY;
        }
        let unit: Vec<f64> = x.iter().map(|v| v / r).collect();
        self.c * r.powf(self.alpha - self.nu as f64) * self.shape.eval(&unit)
    }

    /// Mass of a box; in the plane the box must avoid the origin.
    pub fn box_measure(&self, lo: &[f64], hi: &[f64]) -> Result<f64> {
        match self.nu {
            1 => {
                let prim = |x: f64| x.signum() * x.abs().powf(self.alpha) / self.alpha;
                Ok(self.c * self.shape.eval(&[1.0]) * (prim(hi[0]) - prim(lo[0])))
            }
            _ => {
                let contains = (0..2).all(|d| lo[d] <= 0.0 && hi[d] >= 0.0);
                if contains {
                    return Err(invalid("planar probe box must not contain the origin"));
                }
                Ok(quad::rect(|x, y| self.density(&[x, y]), [lo[0], hi[0]], [lo[1], hi[1]], 4, 16))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LimitFit {
    pub measure: LimitMeasure,
    /// The constant fitted at half the rescaling parameter, as a convergence gauge.
    pub c_half: f64,
}

/// Fits the constant of `G_0` from `G_N(A)` for the probe box `A`.
pub fn fit_limit(g: &SpectralDensity, model: &CorrelationModel, n: f64, lo: &[f64], hi: &[f64]) -> Result<LimitFit> {
    let base = LimitMeasure::from_model(model);
    let unit = LimitMeasure { c: 1.0, ..base };
    let shape_mass = unit.box_measure(lo, hi)?;
    let c_at = |m: f64| -> Result<f64> { Ok(g.rescale(m, model)?.measure_of_box(lo, hi) / shape_mass) };
    let c = c_at(n)?;
    Ok(LimitFit { measure: LimitMeasure { c, ..base }, c_half: c_at(0.5 * n)? })
}

/// `G_N(tA) / G_N(A)`, which tends to `t^alpha`.
pub fn homogeneity_ratio(g: &SpectralDensity, model: &CorrelationModel, n: f64, lo: &[f64], hi: &[f64], t: f64) -> Result<f64> {
    let gn = g.rescale(n, model)?;
    let tlo: Vec<f64> = lo.iter().map(|x| t * x).collect();
    let thi: Vec<f64> = hi.iter().map(|x| t * x).collect();
    Ok(gn.measure_of_box(&tlo, &thi) / gn.measure_of_box(lo, hi))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoxIdentity {
    pub lhs: f64,
    pub rhs: f64,
    pub diff: f64,
    /// Change of each side between the two quadrature levels.
    pub lhs_error: f64,
    pub rhs_error: f64,
}

fn one_minus_cos(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    2.0 * s * s
}

/// `2 (1 - cos x) / x^2`, the squared modulus of the transform of the unit interval.
fn fejer(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 12.0
    } else {
        2.0 * one_minus_cos(x) / (x * x)
    }
}

/// `int e^{i(t,x)} prod_j fejer(x_j) G_0(dx)` over the whole space.
pub fn fourier_side(limit: &LimitMeasure, t: &[f64], level: usize) -> Result<f64> {
    let alpha = limit.alpha;
    let tmax = t.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    match limit.nu {
        1 => {
            // even integrand: 2 int_0^inf cos(tx) fejer(x) c x^(alpha-1) dx
            let t = t[0].abs();
            let f = |x: f64| (t * x).cos() * fejer(x) * x.powf(alpha - 1.0);
            let x_max = 200.0;
            let near = quad::endpoint_singular(f, 0.0, 1.0, 1.0 - alpha);
            let ppu = (2.0 * (1.0 + t)) as usize * (1 << level);
            let mid = quad::gl(f, 1.0, x_max, ((x_max - 1.0) * ppu as f64).ceil() as usize, 10);
            let tail = 2.0 * quad::cosine_power_tail(&[(1.0, t), (-0.5, t + 1.0), (-0.5, t - 1.0)], x_max, 3.0 - alpha);
            Ok(2.0 * limit.c * limit.shape.eval(&[1.0]) * (near + mid + tail))
        }
        2 => {
            let f = |x: f64, y: f64| {
                (t[0] * x + t[1] * y).cos() * fejer(x) * fejer(y) * limit.density(&[x, y])
            };
            let x_max = 60.0;
            let h = 0.5 / ((1.0 + tmax) * (1 << level) as f64);
            let cells = (x_max / h).round() as i64;
            let h = x_max / cells as f64;
            // the integrand is even: integrate over y > 0 and double
            let mut total = 0.0;
            for i in -cells..cells {
                let x0 = i as f64 * h;
                for j in 0..cells {
                    let y0 = j as f64 * h;
                    if j == 0 && (i == 0 || i == -1) {
                        let dx = if i == 0 { h } else { -h };
                        total += quad::rect_corner(f, [0.0, 0.0], dx, h, 2.0 - alpha);
                    } else {
                        total += quad::rect(f, [x0, x0 + h], [y0, y0 + h], 1, 6);
                    }
                }
            }
            // strips along the axes beyond the box, where one factor stays of order one
            let strip = |ta: f64, tb: f64, axis: [f64; 2]| {
                let far = quad::cosine_power_tail(&[(2.0, ta), (-1.0, ta + 1.0), (-1.0, ta - 1.0)], x_max, 4.0 - alpha);
                let across = 2.0 * std::f64::consts::PI * (1.0 - tb.abs()).max(0.0);
                2.0 * far * across * limit.c * limit.shape.eval(&axis)
            };
            let tails = strip(t[0], t[1], [1.0, 0.0]) + strip(t[1], t[0], [0.0, 1.0]);
            Ok(2.0 * total + tails)
        }
        nu => Err(invalid(format!("dimension {nu} is not supported"))),
    }
}

/// `int_{[-1,1]^nu} prod_j (1 - |x_j|) prod_p a((x+t_p)/|x+t_p|) |x+t_p|^(-alpha) dx`,
/// integrated through the singular points with matching substitutions.
pub fn box_side(nu: usize, alpha: f64, a: &AngularFactor, ts: &[Vec<f64>]) -> Result<f64> {
    if ts.iter().any(|t| t.len() != nu) {
        return Err(invalid("point dimension does not match"));
    }
    let k = ts.len();
    if !(k as f64 * alpha < nu as f64) {
        return Err(invalid("the limit integrand is integrable only when k alpha < nu"));
    }
    let f = |x: &[f64]| -> f64 {
        let mut v: f64 = x.iter().map(|xi| 1.0 - xi.abs()).product();
        for t in ts {
            let y: Vec<f64> = x.iter().zip(t).map(|(a, b)| a + b).collect();
            let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            let unit: Vec<f64> = y.iter().map(|v| v / r).collect();
            v *= a.eval(&unit) * r.powf(-alpha);
        }
        v
    };
    let exponent_at = |p: &[f64]| -> f64 {
        alpha
            * ts.iter()
                .filter(|t| t.iter().zip(p).all(|(a, b)| (a + b).abs() < 1e-15))
                .count() as f64
    };
    let mut breaks: Vec<Vec<f64>> = (0..nu).map(|_| vec![-1.0, 0.0, 1.0]).collect();
    for t in ts {
        for d in 0..nu {
            if t[d].abs() < 1.0 {
                breaks[d].push(-t[d]);
            }
        }
    }
    for b in breaks.iter_mut() {
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
    }
    match nu {
        1 => {
            let mut total = 0.0;
            for w in breaks[0].windows(2) {
                let (lo, hi) = (w[0], w[1]);
                total += quad::singular(|x| f(&[x]), lo, hi, exponent_at(&[lo]), exponent_at(&[hi]));
            }
            Ok(total)
        }
        2 => {
            // singular points sit on corners of the break grid; split each rectangle in
            // four so every piece has at most one singular corner
            let g = |x: f64, y: f64| f(&[x, y]);
            let mut total = 0.0;
            for wx in breaks[0].windows(2) {
                for wy in breaks[1].windows(2) {
                    let (mx, my) = (0.5 * (wx[0] + wx[1]), 0.5 * (wy[0] + wy[1]));
                    for &cx in &[wx[0], wx[1]] {
                        for &cy in &[wy[0], wy[1]] {
                            let beta = exponent_at(&[cx, cy]);
                            let (dx, dy) = (mx - cx, my - cy);
                            total += if beta > 0.0 {
                                quad::rect_corner(g, [cx, cy], dx, dy, beta)
                            } else {
                                let (x0, x1) = (cx.min(mx), cx.max(mx));
                                let (y0, y1) = (cy.min(my), cy.max(my));
                                quad::rect(g, [x0, x1], [y0, y1], 2, 12)
                            };
                        }
                    }
                }
            }
            Ok(total)
        }
        _ => Err(invalid(format!("dimension {nu} is not supported"))),
    }
}

/// Both sides of the identity linking `G_0` to the correlation decay `a`, at two
/// quadrature levels.
pub fn check_box_identity(limit: &LimitMeasure, a: &AngularFactor, t: &[f64], level: usize) -> Result<BoxIdentity> {
    if t.len() != limit.nu {
        return Err(invalid("point dimension does not match"));
    }
    let coarse = fourier_side(limit, t, level)?;
    let lhs = fourier_side(limit, t, level + 1)?;
    let rhs = box_side(limit.nu, limit.alpha, a, &[t.to_vec()])?;
    let lhs_error = (lhs - coarse).abs();
    if !(lhs_error <= 1e-2 * lhs.abs().max(1.0)) {
        return Err(Error::Quadrature(format!("Fourier side did not settle (change {lhs_error:.3e})")));
    }
    Ok(BoxIdentity { lhs, rhs, diff: lhs - rhs, lhs_error, rhs_error: 0.0 })
}

/// Integer part in the sense of truncation towards zero.
fn trunc_int(x: f64) -> i64 {
    x.trunc() as i64
}

/// `psi_N(t_1..t_k)`: the normalized sum over two blocks of products of shifted
/// correlations, evaluated through displacement counts.
pub fn psi_n(model: &CorrelationModel, ts: &[Vec<f64>], n: usize) -> Result<f64> {
    let nu = model.nu;
    if ts.iter().any(|t| t.len() != nu) {
        return Err(invalid("point dimension does not match"));
    }
    let k = ts.len();
    let nf = n as f64;
    let js: Vec<Vec<i64>> = ts.iter().map(|t| t.iter().map(|x| trunc_int(x * nf)).collect()).collect();
    let norm = nf.powf(2.0 * nu as f64 - k as f64 * model.alpha) * model.slowly_varying.eval(nf).powi(k as i32);
    let ni = n as i64;
    let term = |l: &[i64]| -> f64 {
        let count: f64 = l.iter().map(|&li| (ni - li.abs()) as f64).product();
        let mut v = count;
        let mut shifted = vec![0i64; nu];
        for j in &js {
            for d in 0..nu {
                shifted[d] = l[d] + j[d];
            }
            v *= model.correlation(&shifted);
        }
        v
    };
    let total: f64 = match nu {
        1 => (-ni + 1..ni).map(|l| term(&[l])).sum(),
        _ => {
            use rayon::prelude::*;
            let rows: Vec<f64> = (-ni + 1..ni)
                .into_par_iter()
                .map(|a| (-ni + 1..ni).map(|b| term(&[a, b])).sum())
                .collect();
            rows.iter().sum()
        }
    };
    Ok(total / norm)
}

#[derive(Debug, Clone, Serialize)]
pub struct PsiLimit {
    pub psi0: f64,
    /// The same integral with balls of radius `eps` around the singular points removed.
    pub psi0_excised: f64,
    /// Hölder bound on the mass inside the balls.
    pub ball_bound: f64,
    pub eps: f64,
}

/// `psi_0 = int f_0` together with the excised integral and its ball bound.
pub fn psi_0(model: &CorrelationModel, ts: &[Vec<f64>], eps: f64) -> Result<PsiLimit> {
    let (nu, alpha, k) = (model.nu, model.alpha, ts.len());
    let a = &model.angular;
    let psi0 = box_side(nu, alpha, a, ts)?;
    let nuf = nu as f64;
    let kf = k as f64;
    let sphere = if nu == 1 { 2.0 } else { 2.0 * std::f64::consts::PI };
    let radius = if nu == 1 { 1.0 } else { 2.0 / std::f64::consts::PI.sqrt() };
    let amax = match *a {
        AngularFactor::Constant { value } => value,
        AngularFactor::Harmonic { c0, c2 } => c0 + c2.abs(),
    };
    let e = nuf - kf * alpha;
    let ball = |r: f64| sphere * r.powf(e) / e;
    let per_point = amax.powf(kf) * ball(radius).powf((kf - 1.0) / kf) * ball(eps).powf(1.0 / kf);
    let ball_bound = kf * per_point;
    // mass inside the balls, integrated with the same substitutions
    let inside = ball_mass(model, ts, eps)?;
    Ok(PsiLimit { psi0, psi0_excised: psi0 - inside, ball_bound, eps })
}

fn ball_mass(model: &CorrelationModel, ts: &[Vec<f64>], eps: f64) -> Result<f64> {
    if model.nu != 1 {
        // in the plane the excised value is reported through the bound only
        return Ok(0.0);
    }
    let alpha = model.alpha;
    let a = model.angular;
    let f = |x: f64| -> f64 {
        let mut v = 1.0 - x.abs();
        for t in ts {
            let y = x + t[0];
            v *= a.eval(&[y.signum()]) * y.abs().powf(-alpha);
        }
        v
    };
    let mut centers: Vec<f64> = ts.iter().map(|t| -t[0]).collect();
    centers.sort_by(|x, y| x.partial_cmp(y).unwrap());
    centers.dedup();
    let mut total = 0.0;
    for c in centers {
        let mult = ts.iter().filter(|t| (t[0] + c).abs() < 1e-15).count() as f64;
        let beta = mult * alpha;
        for d in [-eps, eps] {
            let end = (c + d).clamp(-1.0, 1.0);
            if end == c {
                continue;
            }
            // kinks at 0 and other singular points inside a ball are ignored: eps is small
            total += quad::endpoint_singular(f, c, end - c, beta);
        }
    }
    Ok(total)
}

/// Pointwise integrand `f_N` of `psi_N` at `x` in `[-1,1]^nu`.
pub fn f_n(model: &CorrelationModel, ts: &[Vec<f64>], n: usize, x: &[f64]) -> f64 {
    let nf = n as f64;
    let l: Vec<i64> = x.iter().map(|v| trunc_int(v * nf)).collect();
    let mut v: f64 = l.iter().map(|&li| 1.0 - (li.abs() as f64) / nf).product();
    let scale = nf.powf(-model.alpha) * model.slowly_varying.eval(nf);
    for t in ts {
        let shifted: Vec<i64> = l.iter().zip(t).map(|(&li, tp)| li + trunc_int(tp * nf)).collect();
        v *= model.correlation(&shifted) / scale;
    }
    v
}

/// Pointwise limit integrand `f_0`.
pub fn f_0(model: &CorrelationModel, ts: &[Vec<f64>], x: &[f64]) -> f64 {
    let mut v: f64 = x.iter().map(|xi| 1.0 - xi.abs()).product();
    for t in ts {
        let y: Vec<f64> = x.iter().zip(t).map(|(a, b)| a + b).collect();
        let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let unit: Vec<f64> = y.iter().map(|v| v / r).collect();
        v *= model.angular.eval(&unit) * r.powf(-model.alpha);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{density_from_model, Grid, Regularizer};

    #[test]
    fn box_side_closed_form_at_origin() {
        for alpha in [0.3, 0.5, 0.8] {
            let v = box_side(1, alpha, &AngularFactor::one(), &[vec![0.0]]).unwrap();
            let exact = 2.0 * (1.0 / (1.0 - alpha) - 1.0 / (2.0 - alpha));
            assert!((v - exact).abs() < 1e-10, "{alpha}: {v} vs {exact}");
        }
    }

    #[test]
    fn identity_in_one_dimension() {
        for alpha in [0.3, 0.4, 0.7] {
            let model = CorrelationModel::power_law(1, alpha).unwrap();
            let limit = LimitMeasure::from_model(&model);
            for t in [0.0, 0.5, -0.5, 1.7] {
                let r = check_box_identity(&limit, &model.angular, &[t], 0).unwrap();
                assert!(r.diff.abs() < 1e-4 * r.rhs.abs(), "alpha={alpha} t={t}: {r:?}");
            }
        }
    }

    #[test]
    fn identity_in_the_plane() {
        let model = CorrelationModel::power_law(2, 0.8).unwrap();
        let limit = LimitMeasure::from_model(&model);
        for t in [[0.0, 0.0], [0.5, 0.25]] {
            let r = check_box_identity(&limit, &model.angular, &t, 0).unwrap();
            assert!(r.diff.abs() < 1e-3 * r.rhs.abs(), "{t:?}: {r:?}");
        }
    }

    #[test]
    fn fitted_constant_matches_model() {
        let model = CorrelationModel::power_law(1, 0.5).unwrap();
        let g = density_from_model(&model, &Regularizer::default(), &Grid::torus(1, 1 << 18).unwrap()).unwrap();
        let fit = fit_limit(&g, &model, 256.0, &[0.5], &[2.0]).unwrap();
        let exact = LimitMeasure::from_model(&model).c;
        assert!((fit.measure.c / exact - 1.0).abs() < 1e-3, "{} vs {exact}", fit.measure.c);
    }

    #[test]
    fn psi_limit_single_point() {
        let model = CorrelationModel::power_law(1, 0.4).unwrap();
        let p = psi_0(&model, &[vec![0.0]], 1e-3).unwrap();
        let exact = 2.0 * (1.0 / 0.6 - 1.0 / 1.6);
        assert!((p.psi0 - exact).abs() < 1e-10);
        assert!((p.psi0_excised - exact).abs() < p.ball_bound);
        let excised = exact - 2.0 * (1e-3f64.powf(0.6) / 0.6 - 1e-3f64.powf(1.6) / 1.6);
        assert!((p.psi0_excised - excised).abs() < 1e-10);
    }

    #[test]
    fn pointwise_integrand_converges() {
        let model = CorrelationModel::power_law(1, 0.3).unwrap();
        let ts = vec![vec![0.5], vec![-0.25]];
        for &x in &[-0.9, -0.1, 0.05, 0.7] {
            let f0 = f_0(&model, &ts, &[x]);
            let fn_ = f_n(&model, &ts, 1 << 16, &[x]);
            assert!((fn_ / f0 - 1.0).abs() < 1e-3, "{x}");
        }
    }
}
