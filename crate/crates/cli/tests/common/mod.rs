//! Independent oracles for the acceptance suite.

use num_complex::Complex64;
use spectral_chaos::chaos::GridKernel;

/// `E prod_i sum_{tuples} h_i(tuple) Z_tuple` by Isserlis' theorem: every perfect matching
/// of all vertices, within rows included, with `E Z_p Z_q = G(Δ_p)` when `q` is the
/// mirror of `p` and zero otherwise. Inadmissible tuples vanish through `get`.
pub fn isserlis(kernels: &[&GridKernel]) -> Complex64 {
    let total: usize = kernels.iter().map(|k| k.arity).sum();
    if total % 2 == 1 {
        return Complex64::new(0.0, 0.0);
    }
    let sys = kernels[0].system.clone();
    let mut matchings = Vec::new();
    let mut current = Vec::new();
    let mut free: Vec<usize> = (0..total).collect();
    perfect_matchings(&mut free, &mut current, &mut matchings);

    let cells = sys.len();
    let mut pos = vec![0usize; total];
    let mut sum = Complex64::new(0.0, 0.0);
    for m in &matchings {
        let pairs = m.len();
        // odometer over the cell of the first vertex of every pair
        let mut digits = vec![0usize; pairs];
        loop {
            let mut weight = 1.0;
            for (&(a, b), &p) in m.iter().zip(&digits) {
                pos[a] = p;
                pos[b] = sys.mirror(p);
                weight *= sys.mass(p);
            }
            let mut v = Complex64::new(weight, 0.0);
            let mut off = 0;
            for k in kernels {
                v *= k.get(&pos[off..off + k.arity]);
                off += k.arity;
            }
            sum += v;
            let mut i = 0;
            while i < pairs {
                digits[i] += 1;
                if digits[i] < cells {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
            if i == pairs {
                break;
            }
        }
    }
    sum
}

fn perfect_matchings(free: &mut Vec<usize>, current: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
    if free.is_empty() {
        out.push(current.clone());
        return;
    }
    let a = free.remove(0);
    for i in 0..free.len() {
        let b = free.remove(i);
        current.push((a, b));
        perfect_matchings(free, current, out);
        current.pop();
        free.insert(i, b);
    }
    free.insert(0, a);
}

/// All multisets of positive arities with sum at most `max_total`, in non-increasing order.
pub fn arity_sets(max_total: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, cap: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        for a in (1..=cap.min(left)).rev() {
            cur.push(a);
            rec(left - a, a, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(max_total, max_total, &mut Vec::new(), &mut out);
    out
}
