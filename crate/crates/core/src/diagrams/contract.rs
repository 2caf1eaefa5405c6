use num_complex::Complex64;

use super::{enumerate_complete, Diagram};
use crate::chaos::{distinct_classes, same_system, GridKernel};
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy)]
enum Slot {
    Free(usize),
    /// Edge number and whether this end takes the mirrored cell.
    Edge(usize, bool),
}

/// The kernel `h_γ` of a diagram: every edge joins its two arguments into a pair of
/// mirrored cells `(j, -j)` summed with weight `G(Δ_j)`; free vertices become the
/// arguments of the result in row-major order.
pub fn contract(kernels: &[&GridKernel], d: &Diagram) -> Result<GridKernel> {
    if kernels.len() != d.order.len() {
        return Err(invalid("one kernel per diagram row is required"));
    }
    for (k, &n) in kernels.iter().zip(&d.order) {
        if k.arity != n {
            return Err(Error::ArityMismatch { expected: n, found: k.arity });
        }
    }
    let system = kernels[0].system.clone();
    if kernels.iter().any(|k| !same_system(&k.system, &system)) {
        return Err(Error::NotAdapted);
    }
    let free = d.free_vertices();
    let mut slots: Vec<Vec<Slot>> = d.order.iter().map(|&n| vec![Slot::Free(0); n]).collect();
    for (i, v) in free.iter().enumerate() {
        slots[v.row][v.pos] = Slot::Free(i);
    }
    for (e, (a, b)) in d.edges.iter().enumerate() {
        slots[a.row][a.pos] = Slot::Edge(e, false);
        slots[b.row][b.pos] = Slot::Edge(e, true);
    }
    let n = system.len();
    let f = free.len();
    let m = d.edges.len();
    let mut out = GridKernel::zeros(system.clone(), f);
    let inner_len = n.pow(m as u32);
    let mut fpos = vec![0; f];
    let mut epos = vec![0; m];
    let mut args: Vec<Vec<usize>> = d.order.iter().map(|&k| vec![0; k]).collect();
    for oidx in 0..out.values.len() {
        out.decode(oidx, &mut fpos);
        if !distinct_classes(&system, &fpos) {
            continue;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        'edges: for eidx in 0..inner_len {
            let mut rest = eidx;
            let mut w = 1.0;
            for slot in epos.iter_mut().rev() {
                *slot = rest % n;
                rest /= n;
                w *= system.mass(*slot);
            }
            if w == 0.0 {
                continue;
            }
            let mut prod = Complex64::new(w, 0.0);
            for (r, k) in kernels.iter().enumerate() {
                for (a, s) in args[r].iter_mut().zip(&slots[r]) {
                    *a = match *s {
                        Slot::Free(i) => fpos[i],
                        Slot::Edge(e, false) => epos[e],
                        Slot::Edge(e, true) => system.mirror(epos[e]),
                    };
                }
                let v = k.get(&args[r]);
                if v == Complex64::new(0.0, 0.0) {
                    continue 'edges;
                }
                prod *= v;
            }
            acc += prod;
        }
        out.values[oidx] = acc;
    }
    Ok(out)
}

/// `E prod_i (n_i! I(h_i))`: the sum of the fully contracted complete diagrams.
pub fn product_expectation(kernels: &[&GridKernel]) -> Result<f64> {
    let order: Vec<usize> = kernels.iter().map(|k| k.arity).collect();
    let mut total = Complex64::new(0.0, 0.0);
    let mut magnitude = 0.0;
    for d in enumerate_complete(&order)? {
        let v = contract(kernels, &d)?.values[0];
        total += v;
        magnitude += v.norm();
    }
    if total.im.abs() > 1e-9 * (1.0 + magnitude) {
        return Err(Error::SymmetryViolation { imag: total.im, magnitude });
    }
    Ok(total.re)
}

/// Sum over complete diagrams of the product of `gram(row_a, row_b)` over edges. With
/// rows standing for Wick powers of jointly Gaussian variables, this is the expectation
/// of their product when `gram` is their covariance.
pub fn product_expectation_gram<F: Fn(usize, usize) -> f64>(order: &[usize], gram: F) -> Result<f64> {
    Ok(enumerate_complete(order)?
        .iter()
        .map(|d| d.edges.iter().map(|(a, b)| gram(a.row, b.row)).product::<f64>())
        .sum())
}

/// `E H_m(ξ)^p` for a standard normal `ξ`, by enumerating complete diagrams.
pub fn moment_hermite(m: usize, p: usize) -> Result<f64> {
    product_expectation_gram(&vec![m; p], |_, _| 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::RegularSystem;
    use crate::diagrams::enumerate;
    use crate::hermite::{factorial, GaussHermiteRule, hermite};
    use crate::spectral::{Grid, SpectralDensity};
    use std::sync::Arc;

    fn system(res: usize) -> Arc<RegularSystem> {
        let g = SpectralDensity::from_fn(Grid::torus(1, res).unwrap(), |x| 1.0 + 0.5 * x[0].cos());
        Arc::new(RegularSystem::build(&g, res).unwrap())
    }

    #[test]
    fn hermite_moments_match_quadrature() {
        let rule = GaussHermiteRule::new(40).unwrap();
        for m in 1..=4 {
            for p in 1..=4 {
                if m * p > 16 {
                    continue;
                }
                let q = rule.expect(|x| hermite(m, x).powi(p as i32));
                let d = moment_hermite(m, p).unwrap();
                assert!((q - d).abs() < 1e-8 * (1.0 + d), "m={m} p={p}: {q} vs {d}");
            }
        }
        assert_eq!(moment_hermite(2, 4).unwrap(), 60.0);
    }

    #[test]
    fn second_moment_is_norm() {
        // E (n! I(h))^2 = n! |Sym h|^2 for Hermitian h
        let s = system(8);
        for n in 1..=3 {
            let h = GridKernel::random_hermitian(s.clone(), n, 11, n as u64);
            let e = product_expectation(&[&h, &h]).unwrap();
            let want = factorial(n) * h.symmetrize().norm_sq();
            assert!((e - want).abs() < 1e-10 * want, "n={n}: {e} vs {want}");
        }
    }

    #[test]
    fn contraction_norm_bound() {
        let s = system(6);
        let a = GridKernel::random_hermitian(s.clone(), 2, 1, 0);
        let b = GridKernel::random_hermitian(s.clone(), 2, 1, 1);
        let c = GridKernel::random_hermitian(s.clone(), 1, 1, 2);
        let bound = a.norm() * b.norm() * c.norm();
        for d in enumerate(&[2, 2, 1]).unwrap() {
            let h = contract(&[&a, &b, &c], &d).unwrap();
            assert!(h.norm() <= bound * (1.0 + 1e-12), "{d}");
            assert!(h.symmetrize().norm() <= h.norm() + 1e-12);
        }
    }

    #[test]
    fn empty_diagram_is_tensor_product() {
        let s = system(6);
        let a = GridKernel::random_hermitian(s.clone(), 2, 2, 0);
        let b = GridKernel::random_hermitian(s.clone(), 1, 2, 1);
        let d = Diagram { order: vec![2, 1], edges: vec![] };
        let h = contract(&[&a, &b], &d).unwrap();
        let t = GridKernel::tensor(&[&a, &b]).unwrap();
        for idx in 0..h.len() {
            let mut pos = vec![0; 3];
            h.decode(idx, &mut pos);
            assert!((h.get(&pos) - t.get(&pos)).norm() < 1e-14);
        }
    }
}
