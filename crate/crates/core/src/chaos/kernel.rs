use std::sync::Arc;

use num_complex::Complex64;

use super::system::RegularSystem;
use crate::error::{invalid, Error, Result};
use crate::rng::Normals;

/// A simple function adapted to a regular system: constant on products of cells and
/// zero whenever two arguments share a mirror pair. Values are stored densely by cell
/// position, row-major over the arguments.
#[derive(Debug, Clone)]
pub struct GridKernel {
    pub system: Arc<RegularSystem>,
    pub arity: usize,
    pub values: Vec<Complex64>,
}

pub(crate) fn same_system(a: &Arc<RegularSystem>, b: &Arc<RegularSystem>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Distinct mirror-pair classes, the admissibility condition for argument tuples.
pub(crate) fn distinct_classes(system: &RegularSystem, pos: &[usize]) -> bool {
    for i in 0..pos.len() {
        let ci = system.class(pos[i]);
        for &p in &pos[i + 1..] {
            if system.class(p) == ci {
                return false;
            }
        }
    }
    true
}

impl GridKernel {
    pub fn zeros(system: Arc<RegularSystem>, arity: usize) -> Self {
        let len = system.len().pow(arity as u32);
        GridKernel { system, arity, values: vec![Complex64::new(0.0, 0.0); len] }
    }

    pub fn scalar(system: Arc<RegularSystem>, value: Complex64) -> Self {
        GridKernel { system, arity: 0, values: vec![value] }
    }

    pub fn from_positions<F: FnMut(&[usize]) -> Complex64>(system: Arc<RegularSystem>, arity: usize, mut f: F) -> Self {
        let mut k = Self::zeros(system, arity);
        let mut pos = vec![0; arity];
        for idx in 0..k.values.len() {
            k.decode(idx, &mut pos);
            if distinct_classes(&k.system, &pos) {
                k.values[idx] = f(&pos);
            }
        }
        k
    }

    /// Evaluates `f` at the cell centers of every admissible tuple.
    pub fn from_fn<F: FnMut(&[Vec<f64>]) -> Complex64>(system: Arc<RegularSystem>, arity: usize, mut f: F) -> Self {
        let centers: Vec<Vec<f64>> = (0..system.len()).map(|p| system.center(p)).collect();
        Self::from_positions(system, arity, |pos| {
            let xs: Vec<Vec<f64>> = pos.iter().map(|&p| centers[p].clone()).collect();
            f(&xs)
        })
    }

    /// Independent complex normal values, made Hermitian.
    pub fn random_hermitian(system: Arc<RegularSystem>, arity: usize, seed: u64, replicate: u64) -> Self {
        let mut g = Normals::new(seed, replicate);
        let mut k = Self::from_positions(system, arity, |_| {
            let (a, b) = g.pair();
            Complex64::new(a, b)
        });
        k.make_hermitian();
        k
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn flat(&self, pos: &[usize]) -> usize {
        let n = self.system.len();
        pos.iter().fold(0, |acc, &p| acc * n + p)
    }

    pub fn decode(&self, mut idx: usize, pos: &mut [usize]) {
        let n = self.system.len();
        for slot in pos.iter_mut().rev() {
            *slot = idx % n;
            idx /= n;
        }
    }

    pub fn get(&self, pos: &[usize]) -> Complex64 {
        if distinct_classes(&self.system, pos) {
            self.values[self.flat(pos)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Value at signed indices.
    pub fn at(&self, js: &[i64]) -> Complex64 {
        let pos: Vec<usize> = js.iter().map(|&j| self.system.position(j)).collect();
        self.get(&pos)
    }

    fn mirror_flat(&self, idx: usize, pos: &mut [usize]) -> usize {
        self.decode(idx, pos);
        for p in pos.iter_mut() {
            *p = self.system.mirror(*p);
        }
        self.flat(pos)
    }

    pub fn make_hermitian(&mut self) {
        let mut pos = vec![0; self.arity];
        let old = self.values.clone();
        for idx in 0..old.len() {
            let m = self.mirror_flat(idx, &mut pos);
            self.values[idx] = 0.5 * (old[idx] + old[m].conj());
        }
    }

    /// Largest `|f(-x) - conj f(x)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut pos = vec![0; self.arity];
        (0..self.values.len())
            .map(|idx| {
                let m = self.mirror_flat(idx, &mut pos);
                (self.values[m] - self.values[idx].conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Average over all permutations of the arguments.
    pub fn symmetrize(&self) -> Self {
        let perms = permutations(self.arity);
        let mut out = Self::zeros(self.system.clone(), self.arity);
        let mut pos = vec![0; self.arity];
        let mut perm_pos = vec![0; self.arity];
        let w = 1.0 / perms.len() as f64;
        for idx in 0..self.values.len() {
            self.decode(idx, &mut pos);
            let mut s = Complex64::new(0.0, 0.0);
            for p in &perms {
                for (k, &pk) in p.iter().enumerate() {
                    perm_pos[k] = pos[pk];
                }
                s += self.values[self.flat(&perm_pos)];
            }
            out.values[idx] = s * w;
        }
        out
    }

    /// `sum |f|^2 prod G(Δ)` over admissible tuples.
    pub fn norm_sq(&self) -> f64 {
        let mut pos = vec![0; self.arity];
        let mut total = 0.0;
        for idx in 0..self.values.len() {
            let v = self.values[idx];
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            self.decode(idx, &mut pos);
            if !distinct_classes(&self.system, &pos) {
                continue;
            }
            let w: f64 = pos.iter().map(|&p| self.system.mass(p)).product();
            total += v.norm_sqr() * w;
        }
        total
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for v in out.values.iter_mut() {
            *v *= c;
        }
        out
    }

    /// `f_1(x_1) ... f_k(x_k)` with the arguments concatenated.
    pub fn tensor(kernels: &[&GridKernel]) -> Result<Self> {
        let system = kernels.first().ok_or_else(|| invalid("empty tensor product"))?.system.clone();
        if kernels.iter().any(|k| !same_system(&k.system, &system)) {
            return Err(Error::NotAdapted);
        }
        let arity: usize = kernels.iter().map(|k| k.arity).sum();
        Ok(Self::from_positions(system, arity, |pos| {
            let mut v = Complex64::new(1.0, 0.0);
            let mut off = 0;
            for k in kernels {
                v *= k.values[k.flat(&pos[off..off + k.arity])];
                off += k.arity;
            }
            v
        }))
    }

    /// Multiplication by `exp(i (t, x_1 + ... + x_n))` at cell centers: the kernel of
    /// the shifted integral.
    pub fn shift(&self, t: &[f64]) -> Result<Self> {
        if t.len() != self.system.grid.nu {
            return Err(invalid("shift dimension does not match the system"));
        }
        let phase: Vec<Complex64> = (0..self.system.len())
            .map(|p| {
                let x = self.system.center(p);
                Complex64::from_polar(1.0, t.iter().zip(&x).map(|(a, b)| a * b).sum())
            })
            .collect();
        let mut out = self.clone();
        let mut pos = vec![0; self.arity];
        for idx in 0..out.values.len() {
            out.decode(idx, &mut pos);
            let f: Complex64 = pos.iter().map(|&p| phase[p]).product();
            out.values[idx] *= f;
        }
        Ok(out)
    }

    /// The same function viewed on a refinement of its system.
    pub fn lift(&self, fine: Arc<RegularSystem>) -> Result<Self> {
        let parent = fine.parent_map(&self.system)?;
        let coarse = self.system.clone();
        let mut cpos = vec![0; self.arity];
        Ok(Self::from_positions(fine, self.arity, |pos| {
            for (c, &p) in cpos.iter_mut().zip(pos) {
                *c = parent[p];
            }
            if distinct_classes(&coarse, &cpos) {
                self.values[self.flat(&cpos)]
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }
}

pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    fn rec(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for i in k..cur.len() {
            cur.swap(k, i);
            rec(k + 1, cur, out);
            cur.swap(k, i);
        }
    }
    rec(0, &mut cur, &mut out);
    out
}
