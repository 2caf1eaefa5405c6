//! One-dimensional quadrature helpers on top of Gauss-Legendre rules.
//!
//! Integrable endpoint singularities are removed with a power substitution and the
//! remaining smooth integrand is handled on geometrically graded panels.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::legendre::GaussLegendre;

pub type Rule = Arc<Vec<(f64, f64)>>;

/// Gauss-Legendre nodes and weights on [-1, 1], cached per order.
pub fn legendre(order: usize) -> Rule {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    map.entry(order)
        .or_insert_with(|| {
            let rule = GaussLegendre::new(NonZeroUsize::new(order.max(1)).unwrap());
            Arc::new(rule.as_node_weight_pairs().to_vec())
        })
        .clone()
}

/// Composite Gauss-Legendre over `panels` equal panels.
pub fn gl<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let rule = legendre(order);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let half = 0.5 * h;
        let mid = lo + half;
        let mut s = 0.0;
        for &(x, w) in rule.iter() {
            s += w * f(mid + half * x);
        }
        total += half * s;
    }
    total
}

/// Integral over [0, 1] on panels graded geometrically towards 0.
pub fn graded_unit<F: FnMut(f64) -> f64>(mut f: F, levels: usize, order: usize) -> f64 {
    let mut total = 0.0;
    let mut hi = 1.0;
    for _ in 0..levels {
        let lo = 0.5 * hi;
        total += gl(&mut f, lo, hi, 1, order);
        hi = lo;
    }
    total + gl(&mut f, 0.0, hi, 1, order)
}

/// Integral over the segment from `e` to `e + d` of a function behaving like
/// `|x - e|^(-beta)` at `e` and smoothly (or at worst with a kink) elsewhere.
pub fn endpoint_singular<F: FnMut(f64) -> f64>(mut f: F, e: f64, d: f64, beta: f64) -> f64 {
    offset_singular(
        |t| {
            let x = e + t;
            if x == e { 0.0 } else { f(x) }
        },
        d,
        beta,
    )
}

/// Like [`endpoint_singular`] with the integrand given as a function of the signed
/// offset `t` from the singular point, so that tiny offsets keep full precision.
pub fn offset_singular<F: FnMut(f64) -> f64>(mut f: F, d: f64, beta: f64) -> f64 {
    if d == 0.0 {
        return 0.0;
    }
    let p = if beta > 0.0 { 1.0 / (1.0 - beta) } else { 1.0 };
    let scale = d.abs() * p;
    graded_unit(
        |u| {
            if u <= 0.0 {
                return 0.0;
            }
            let up = u.powf(p);
            let t = d * up;
            if t == 0.0 {
                return 0.0;
            }
            f(t) * scale * up / u
        },
        40,
        12,
    )
}

/// Integral over [a, b] of a function with algebraic singularities of strength
/// `beta_a` at `a` and `beta_b` at `b`.
pub fn singular<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, beta_a: f64, beta_b: f64) -> f64 {
    let m = 0.5 * (a + b);
    endpoint_singular(&mut f, a, m - a, beta_a) + endpoint_singular(&mut f, b, m - b, beta_b)
}

/// Integral over [a, b] with 0 < a < b, evaluated in the variable `s = ln x`.
pub fn logarithmic<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels_per_unit: usize) -> f64 {
    let (la, lb) = (a.ln(), b.ln());
    let panels = (((lb - la) * panels_per_unit as f64).ceil() as usize).max(1);
    gl(
        |s| {
            let x = s.exp();
            f(x) * x
        },
        la,
        lb,
        panels,
        10,
    )
}

/// `sum_k c_k * int_X^inf cos(w_k x) x^(-p) dx` for p > 1, by repeated integration by
/// parts (three terms), with the non-oscillatory case done exactly.
pub fn cosine_power_tail(terms: &[(f64, f64)], x: f64, p: f64) -> f64 {
    let mut total = 0.0;
    for &(c, w) in terms {
        if w.abs() < 1e-14 {
            total += c * x.powf(1.0 - p) / (p - 1.0);
        } else {
            let (s, co) = (w * x).sin_cos();
            let t1 = -s * x.powf(-p) / w;
            let t2 = co * p * x.powf(-p - 1.0) / (w * w);
            let t3 = s * p * (p + 1.0) * x.powf(-p - 2.0) / (w * w * w);
            total += c * (t1 + t2 + t3);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = gl(|x| x.powi(5) - 2.0 * x, 0.0, 2.0, 1, 4);
        assert!((v - (64.0 / 6.0 - 4.0)).abs() < 1e-12);
    }

    #[test]
    fn strong_endpoint_singularity() {
        // int_0^1 x^(-0.96) dx = 25
        let v = endpoint_singular(|x| x.powf(-0.96), 0.0, 1.0, 0.96);
        assert!((v - 25.0).abs() < 1e-9, "{v}");
        let beta = statrs::function::beta::beta(0.3, 0.6);
        let v = singular(|x| x.powf(-0.7) * (1.0 - x).powf(-0.4), 0.0, 1.0, 0.7, 0.4);
        assert!((v - beta).abs() < 1e-9, "{v} {beta}");
    }

    #[test]
    fn log_panels() {
        let v = logarithmic(|x| x.powf(-1.5), 1.0, 1e12, 4);
        let exact = 2.0 * (1.0 - 1e-6);
        assert!((v - exact).abs() < 1e-10);
    }

    #[test]
    fn tail_expansion() {
        let x = 200.0;
        let direct = gl(|u| (3.0 * u).cos() * u.powf(-2.5), x, 20_000.0, 20_000, 8);
        let far = cosine_power_tail(&[(1.0, 3.0)], 20_000.0, 2.5);
        let tail = cosine_power_tail(&[(1.0, 3.0)], x, 2.5);
        assert!((direct + far - tail).abs() < 1e-12, "{} {}", direct + far, tail);
    }
}

/// Integral over the triangle `(p, a, b)` of a function behaving like
/// `|x - p|^(-beta)` near the apex `p`, by the Duffy map
/// `x = p + s ((1 - w) a + w b - p)`.
pub fn triangle_apex<F: FnMut(f64, f64) -> f64>(mut f: F, p: [f64; 2], a: [f64; 2], b: [f64; 2], beta: f64) -> f64 {
    let (ax, ay) = (a[0] - p[0], a[1] - p[1]);
    let (bx, by) = (b[0] - p[0], b[1] - p[1]);
    let jac = (ax * by - ay * bx).abs();
    if jac == 0.0 {
        return 0.0;
    }
    let rule = legendre(16);
    let mut total = 0.0;
    for &(u, wu) in rule.iter() {
        let w = 0.5 * (1.0 + u);
        let (dx, dy) = (ax + w * (bx - ax), ay + w * (by - ay));
        // the radial factor s from the Jacobian offsets the singularity
        let radial = endpoint_singular(|s| s * f(p[0] + s * dx, p[1] + s * dy), 0.0, 1.0, beta - 1.0);
        total += 0.5 * wu * radial;
    }
    total * jac
}

/// Integral over the rectangle spanned from corner `p` by the signed extents `dx, dy`,
/// singular like `|x - p|^(-beta)` at `p`.
pub fn rect_corner<F: FnMut(f64, f64) -> f64>(mut f: F, p: [f64; 2], dx: f64, dy: f64, beta: f64) -> f64 {
    let q = [p[0] + dx, p[1] + dy];
    triangle_apex(&mut f, p, [p[0] + dx, p[1]], q, beta) + triangle_apex(&mut f, p, q, [p[0], p[1] + dy], beta)
}

/// Tensor Gauss-Legendre over `[x0, x1] x [y0, y1]` split into `sub x sub` panels.
pub fn rect<F: FnMut(f64, f64) -> f64>(mut f: F, x: [f64; 2], y: [f64; 2], sub: usize, order: usize) -> f64 {
    let rule = legendre(order);
    let hx = (x[1] - x[0]) / sub as f64;
    let hy = (y[1] - y[0]) / sub as f64;
    let mut total = 0.0;
    for i in 0..sub {
        let cx = x[0] + (i as f64 + 0.5) * hx;
        for j in 0..sub {
            let cy = y[0] + (j as f64 + 0.5) * hy;
            for &(u, wu) in rule.iter() {
                for &(v, wv) in rule.iter() {
                    total += wu * wv * f(cx + 0.5 * hx * u, cy + 0.5 * hy * v);
                }
            }
        }
    }
    total * 0.25 * hx * hy
}

#[cfg(test)]
mod planar_tests {
    use super::*;

    #[test]
    fn corner_singularity() {
        // int over [0,1]^2 of |x|^(-1.2): exact via polar = 2 int_0^{pi/4} sec^0.8 / 0.8
        let v = rect_corner(|x, y| (x * x + y * y).powf(-0.6), [0.0, 0.0], 1.0, 1.0, 1.2);
        let inner = gl(|t: f64| t.cos().powf(-0.8), 0.0, std::f64::consts::FRAC_PI_4, 4, 20);
        assert!((v - 2.0 * inner / 0.8).abs() < 1e-9, "{v}");
        // a mirrored corner gives the same value
        let w = rect_corner(|x, y| (x * x + y * y).powf(-0.6), [0.0, 0.0], -1.0, 1.0, 1.2);
        assert!((v - w).abs() < 1e-12);
    }

    #[test]
    fn smooth_rectangle() {
        let v = rect(|x, y| x * x * y.exp(), [0.0, 2.0], [0.0, 1.0], 2, 8);
        assert!((v - 8.0 / 3.0 * (1f64.exp() - 1.0)).abs() < 1e-12);
    }
}
