use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use super::kernel::{same_system, GridKernel};
use super::realization::SpectralRealization;
use super::system::RegularSystem;
use crate::error::{invalid, Error, Result};
use crate::hermite::{factorial, hermite};

const IMAG_TOL: f64 = 1e-9;

fn real_part(v: Complex64, magnitude: f64) -> Result<f64> {
    if v.im.abs() > IMAG_TOL * (1.0 + magnitude) {
        return Err(Error::SymmetryViolation { imag: v.im, magnitude });
    }
    Ok(v.re)
}

/// The multiple integral `int f dZ...dZ = n! I_G(f)`: the sum of
/// `f(j_1..j_n) Z_{j_1}...Z_{j_n}` over tuples with distinct mirror pairs.
pub fn integrate(kernel: &GridKernel, w: &SpectralRealization) -> Result<f64> {
    w.check(&kernel.system)?;
    let sys = &kernel.system;
    let n = sys.len();
    let mut used = vec![false; sys.pairs() + 1];
    let mut sum = Complex64::new(0.0, 0.0);
    let mut magnitude = 0.0;

    #[allow(clippy::too_many_arguments)]
    fn rec(
        slot: usize,
        flat: usize,
        prod: Complex64,
        k: &GridKernel,
        w: &SpectralRealization,
        n: usize,
        used: &mut [bool],
        sum: &mut Complex64,
        magnitude: &mut f64,
    ) {
        if slot == k.arity {
            let t = k.values[flat] * prod;
            *sum += t;
            *magnitude += t.norm();
            return;
        }
        for p in 0..n {
            let c = k.system.class(p);
            if used[c] {
                continue;
            }
            used[c] = true;
            rec(slot + 1, flat * n + p, prod * w.z[p], k, w, n, used, sum, magnitude);
            used[c] = false;
        }
    }

    rec(0, 0, Complex64::new(1.0, 0.0), kernel, w, n, &mut used, &mut sum, &mut magnitude);
    real_part(sum, magnitude)
}

/// Multiple integral of `g_1 x ... x g_1 x g_2 x ... x g_m` with `g_s` repeated
/// `counts[s]` times, summed over assignments of mirror pairs to slots.
pub fn integrate_product(factors: &[&GridKernel], counts: &[usize], w: &SpectralRealization) -> Result<f64> {
    if factors.len() != counts.len() {
        return Err(invalid("one count per factor is required"));
    }
    let sys = w.system.clone();
    for f in factors {
        if f.arity != 1 {
            return Err(Error::ArityMismatch { expected: 1, found: f.arity });
        }
        w.check(&f.system)?;
    }
    // states are the numbers of slots of each type already filled, in mixed radix
    let radix: Vec<usize> = counts.iter().map(|c| c + 1).collect();
    let states: usize = radix.iter().product();
    let mut stride = vec![1; counts.len()];
    for s in (0..counts.len().saturating_sub(1)).rev() {
        stride[s] = stride[s + 1] * radix[s + 1];
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut dp = vec![zero; states];
    let mut mag = vec![0.0; states];
    dp[0] = Complex64::new(1.0, 0.0);
    mag[0] = 1.0;
    let mut v = vec![zero; factors.len()];
    for j in 1..=sys.pairs() {
        let (p, q) = (sys.position(j as i64), sys.position(-(j as i64)));
        for (s, f) in factors.iter().enumerate() {
            v[s] = f.values[p] * w.z[p] + f.values[q] * w.z[q];
        }
        // descending order keeps each pair used at most once
        for u in (0..states).rev() {
            if dp[u] == zero && mag[u] == 0.0 {
                continue;
            }
            for s in 0..factors.len() {
                let filled = (u / stride[s]) % radix[s];
                if filled < counts[s] {
                    let t = u + stride[s];
                    let add = dp[u] * v[s];
                    dp[t] += add;
                    let add = mag[u] * v[s].norm();
                    mag[t] += add;
                }
            }
        }
    }
    let mult: f64 = counts.iter().map(|&c| factorial(c)).product();
    real_part(dp[states - 1] * mult, mag[states - 1] * mult)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ItoComparison {
    /// `prod_s H_{j_s}(int phi_s dZ)`
    pub lhs: f64,
    /// The multiple integral of the tensor product kernel.
    pub rhs: f64,
    pub diff: f64,
}

/// `<phi, psi> = sum phi(j) conj(psi(j)) G(Δ_j)`.
pub fn inner(a: &GridKernel, b: &GridKernel) -> Complex64 {
    let sys = &a.system;
    (0..sys.len()).map(|p| a.values[p] * b.values[p].conj() * sys.mass(p)).sum()
}

/// Both sides of Itô's formula for an orthonormal Hermitian family.
pub fn ito_compare(phis: &[&GridKernel], powers: &[usize], w: &SpectralRealization) -> Result<ItoComparison> {
    for (s, a) in phis.iter().enumerate() {
        if a.arity != 1 {
            return Err(Error::ArityMismatch { expected: 1, found: a.arity });
        }
        if a.hermitian_defect() > 1e-12 {
            return Err(Error::SymmetryViolation { imag: a.hermitian_defect(), magnitude: 1.0 });
        }
        for (t, b) in phis.iter().enumerate() {
            let target = if s == t { 1.0 } else { 0.0 };
            if (inner(a, b) - target).norm() > 1e-6 {
                return Err(invalid("functions are not orthonormal on this system"));
            }
        }
    }
    let mut lhs = 1.0;
    for (a, &k) in phis.iter().zip(powers) {
        lhs *= hermite(k, integrate(a, w)?);
    }
    let rhs = integrate_product(phis, powers, w)?;
    Ok(ItoComparison { lhs, rhs, diff: lhs - rhs })
}

/// Rewrites `f` as a kernel for the measure `G'` with `G = |g|^2 G'`, by multiplying
/// each argument by `g`. The two integrals have the same law.
pub fn change_of_variables<F: Fn(&[f64]) -> Complex64>(
    kernel: &GridKernel,
    g: F,
    target: Arc<RegularSystem>,
) -> Result<GridKernel> {
    let src = &kernel.system;
    if src.grid != target.grid {
        return Err(Error::NotAdapted);
    }
    let gv: Vec<Complex64> = (0..src.len()).map(|p| g(&src.center(p))).collect();
    for p in 0..src.len() {
        let expect = gv[p].norm_sqr() * target.mass(p);
        if (expect - src.mass(p)).abs() > 1e-9 * src.mass(p).max(1e-300) {
            return Err(invalid("measures are not related by |g|^2 on this system"));
        }
        if (gv[src.mirror(p)] - gv[p].conj()).norm() > 1e-12 * (1.0 + gv[p].norm()) {
            return Err(invalid("g must satisfy g(-x) = conj g(x)"));
        }
    }
    let mut out = GridKernel { system: target, arity: kernel.arity, values: kernel.values.clone() };
    let mut pos = vec![0; kernel.arity];
    for idx in 0..out.values.len() {
        out.decode(idx, &mut pos);
        let f: Complex64 = pos.iter().map(|&p| gv[p]).product();
        out.values[idx] *= f;
    }
    Ok(out)
}

impl SpectralRealization {
    /// The realization `Z(dx) e^{i(t,x)}` of the shifted field.
    pub fn shifted(&self, t: &[f64]) -> Result<Self> {
        if t.len() != self.system.grid.nu {
            return Err(invalid("shift dimension does not match the system"));
        }
        let z = (0..self.system.len())
            .map(|p| {
                let x = self.system.center(p);
                self.z[p] * Complex64::from_polar(1.0, t.iter().zip(&x).map(|(a, b)| a * b).sum())
            })
            .collect();
        Ok(SpectralRealization { system: self.system.clone(), z })
    }
}

/// Whether two kernels live on the same system.
pub fn adapted_together(a: &GridKernel, b: &GridKernel) -> bool {
    same_system(&a.system, &b.system)
}
