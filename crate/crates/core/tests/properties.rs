use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;
use spectral_chaos::chaos::{integrate, GridKernel, RegularSystem, SpectralRealization};
use spectral_chaos::diagrams::{contract, count_all, enumerate, from_text, to_text};
use spectral_chaos::fbm::{covariance, simulate, FbmMethod, FbmSpec};
use spectral_chaos::hermite::{factorial, hermite, hermite_covariance, GaussHermiteRule};
use spectral_chaos::spectral::integrability::{check_integrability, SelfSimilarParams};
use spectral_chaos::spectral::{density_from_model, CorrelationModel, Grid, Regularizer, SpectralDensity};
use spectral_chaos::tails::{moment_bound, moment_exact_hermite, ChaosVariable, TailConstants};

fn system(res: usize) -> Arc<RegularSystem> {
    let g = SpectralDensity::from_fn(Grid::torus(1, res).unwrap(), |x| 1.0 + 0.6 * x[0].cos());
    Arc::new(RegularSystem::build(&g, res).unwrap())
}

/// Explicit sum `n! sum_k (-1)^k x^(n-2k) / (k! (n-2k)! 2^k)` from the Rodrigues formula.
fn rodrigues(n: usize, x: f64) -> f64 {
    (0..=n / 2)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * factorial(n) / (factorial(k) * factorial(n - 2 * k) * 2f64.powi(k as i32)) * x.powi((n - 2 * k) as i32)
        })
        .sum()
}

fn binom(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hermite_orthogonality(j in 0usize..=6, l in 0usize..=6) {
        let rule = GaussHermiteRule::new(30).unwrap();
        let v = rule.expect(|x| hermite(j, x) * hermite(l, x));
        let want = if j == l { factorial(j) } else { 0.0 };
        prop_assert!((v - want).abs() <= 1e-10 * factorial(j.max(l)));
    }

    #[test]
    fn recursion_matches_rodrigues(n in 0usize..=8, x in -6.0f64..6.0) {
        let a = hermite(n, x);
        let b = rodrigues(n, x);
        prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn bivariate_covariance_against_quadrature(j in 0usize..=4, l in 0usize..=4, ri in 0usize..5) {
        let r: f64 = [-0.9, -0.5, 0.0, 0.5, 0.9][ri];
        let rule = GaussHermiteRule::new(30).unwrap();
        let s = (1.0 - r * r).sqrt();
        let q = rule.expect(|a| rule.expect(|b| hermite(j, a) * hermite(l, r * a + s * b)));
        prop_assert!((q - hermite_covariance(j, l, r)).abs() <= 1e-8);
    }

    #[test]
    fn two_row_count(n in 0usize..=4, m in 0usize..=4) {
        let formula: f64 = (0..=n.min(m)).map(|k| binom(n, k) * binom(m, k) * factorial(k)).sum();
        prop_assert_eq!(count_all(&[n, m]) as f64, formula);
        prop_assert_eq!(enumerate(&[n, m]).unwrap().len() as f64, formula);
    }

    #[test]
    fn contraction_norm_bound(a in 1usize..=3, b in 1usize..=2, c in 0usize..=2, seed in 0u64..1000) {
        let sys = system(8);
        let arities: Vec<usize> = [a, b, c].into_iter().filter(|&x| x > 0).collect();
        let ks: Vec<GridKernel> = arities.iter().enumerate()
            .map(|(i, &n)| GridKernel::random_hermitian(sys.clone(), n, seed, i as u64)).collect();
        let refs: Vec<&GridKernel> = ks.iter().collect();
        let bound: f64 = ks.iter().map(|k| k.norm()).product();
        for d in enumerate(&arities).unwrap() {
            let h = contract(&refs, &d).unwrap();
            prop_assert!(h.norm() <= bound + 1e-12, "{:?}", d.edges);
        }
    }

    #[test]
    fn symmetrization_contracts(n in 1usize..=3, seed in 0u64..1000) {
        let k = GridKernel::random_hermitian(system(8), n, seed, 0);
        prop_assert!(k.symmetrize().norm() <= k.norm() + 1e-12);
    }

    #[test]
    fn one_row_against_a_single_vertex(n in 1usize..=5) {
        // the product with a first-order kernel: one full term and n single contractions
        let ds = enumerate(&[n, 1]).unwrap();
        prop_assert_eq!(ds.iter().filter(|d| d.edges.is_empty()).count(), 1);
        prop_assert_eq!(ds.iter().filter(|d| d.edges.len() == 1).count(), n);
        prop_assert_eq!(ds.len(), n + 1);
    }

    #[test]
    fn realization_is_hermitian(seed in any::<u64>(), rep in any::<u64>()) {
        let sys = system(8);
        let w = SpectralRealization::sample(sys.clone(), seed, rep);
        for p in 0..sys.len() {
            prop_assert_eq!(w.z[sys.mirror(p)], w.z[p].conj());
        }
    }

    #[test]
    fn integral_ignores_argument_order(n in 2usize..=3, seed in 0u64..1000, rep in 0u64..1000) {
        let sys = system(6);
        let k = GridKernel::random_hermitian(sys.clone(), n, seed, 1);
        let w = SpectralRealization::sample(sys, seed, rep);
        let a = integrate(&k, &w).unwrap();
        let b = integrate(&k.symmetrize(), &w).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn model_density_is_even(alpha in 0.1f64..0.9, res_log in 6u32..10) {
        let model = CorrelationModel::power_law(1, alpha).unwrap();
        let g = density_from_model(&model, &Regularizer::default(), &Grid::torus(1, 1 << res_log).unwrap()).unwrap();
        prop_assert!(g.is_even(1e-12));
    }

    #[test]
    fn integrability_flips_at_critical_kappa(step in 1usize..=3, above in any::<bool>(), k in 1usize..=3) {
        let nu = 1;
        let crit = nu as f64 / (2.0 * k as f64);
        let kappa = if above { crit + 0.02 * step as f64 } else { crit - 0.02 * step as f64 };
        prop_assume!(kappa > 0.0 && kappa < 0.5);
        let v = check_integrability(&SelfSimilarParams { nu, kappa, k }).unwrap();
        prop_assert_eq!(v.finite, !above);
    }

    #[test]
    fn fbm_paths_start_at_zero(h in 0.05f64..0.95, seed in any::<u64>()) {
        let spec = FbmSpec::new(h, (0..16).map(|i| i as f64 * 0.125).collect(), 1.0).unwrap();
        for method in [FbmMethod::Cholesky, FbmMethod::CirculantFgn] {
            prop_assert_eq!(simulate(&spec, seed, 0, method).unwrap()[0], 0.0);
        }
    }

    #[test]
    fn fbm_increment_variance(h in 0.05f64..0.95, s in 0.0f64..3.0, t in 0.0f64..3.0, scale in 0.1f64..4.0) {
        let v = covariance(h, scale, t, t) + covariance(h, scale, s, s) - 2.0 * covariance(h, scale, s, t);
        let want = scale * (t - s).abs().powf(2.0 * h);
        prop_assert!((v - want).abs() <= 1e-12 * (1.0 + want));
    }

    #[test]
    fn moment_bound_chain(m in 1usize..=3, n in 1usize..=3) {
        let exact = moment_exact_hermite(m, 2 * n).unwrap();
        let b = moment_bound(m, n, factorial(m)).unwrap();
        prop_assert!(exact <= b.diagram * (1.0 + 1e-12));
        prop_assert!(b.diagram <= b.double_factorial * (1.0 + 1e-12));
    }

    #[test]
    fn k2_decreases_with_variance(m in 1usize..=4, v in 0.1f64..50.0, f in 1.01f64..10.0) {
        let a = TailConstants::new(m, v).unwrap();
        let b = TailConstants::new(m, v * f).unwrap();
        prop_assert!(b.k2 < a.k2);
    }

    #[test]
    fn k2_depends_on_variance_only(c in 0.2f64..5.0, seed in 0u64..100) {
        let k = GridKernel::random_hermitian(system(8), 2, seed, 0);
        let base = ChaosVariable::Kernel(Arc::new(k.clone()));
        let scaled = ChaosVariable::Kernel(Arc::new(k.scaled(c)));
        let a = TailConstants::new(2, base.second_moment() * c * c).unwrap();
        let b = TailConstants::new(2, scaled.second_moment()).unwrap();
        prop_assert!((a.k2 / b.k2 - 1.0).abs() < 1e-12);
    }
}

#[test]
fn golden_diagrams_of_two_rows() {
    let text = include_str!("data/rows_2_2.txt");
    let (order, ds) = from_text(text).unwrap();
    assert_eq!(order, vec![2, 2]);
    assert_eq!(ds, enumerate(&[2, 2]).unwrap());
    assert_eq!(to_text(&order, &ds), text);
}

#[test]
fn hermitian_kernels_have_real_integrals() {
    let sys = system(8);
    let k = GridKernel::random_hermitian(sys.clone(), 2, 3, 0);
    let w = SpectralRealization::sample(sys.clone(), 3, 0);
    let direct: Complex64 = (0..sys.len())
        .flat_map(|p| (0..sys.len()).map(move |q| (p, q)))
        .map(|(p, q)| k.get(&[p, q]) * w.z[p] * w.z[q])
        .sum();
    assert!(direct.im.abs() < 1e-12);
    assert!((integrate(&k, &w).unwrap() - direct.re).abs() < 1e-12);
}
