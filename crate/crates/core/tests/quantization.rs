use nambu_core::geometry::quadrature::{closed_form_defect, doubling_change, DOUBLING_TOL};
use nambu_core::geometry::{
    quantize, quantize_triple, toeplitz_matrix, BasisCache, QuadratureGrid, ThetaBasis, TorusGeometry,
};
use nambu_core::operator::{dense_norm, hilbert_schmidt, max_abs, random_matrix, seeded_rng};
use nambu_core::symbol::{preset, random_symbol, sup_norm};
use nambu_core::{Matrix, Symbol};
use num_complex::Complex64;
use proptest::prelude::*;

fn identity_defect(geom: &TorusGeometry<f64>, r: usize, k: u32, cache: &BasisCache<f64>) -> f64 {
    let t = quantize(&Symbol::one(geom.dim()), geom, r, k, cache).unwrap();
    let n = t.size();
    max_abs(&(t.matrix - Matrix::identity(n, n)))
}

#[test]
fn invariants_on_small_levels() {
    let cache = BasisCache::new();
    for (geom, levels) in [(TorusGeometry::t2(), vec![4u32, 8]), (TorusGeometry::t4(), vec![2, 3])] {
        let f = random_symbol::<f64>(7, geom.dim(), 2, true).unwrap();
        let sup = sup_norm(&f, 64).value;
        for r in 1..=geom.num_structures() {
            for &k in &levels {
                assert!(identity_defect(&geom, r, k, &cache) < 1e-8);
                let t = quantize(&f, &geom, r, k, &cache).unwrap();
                assert!(t.hermitian_defect() < 1e-9);
                assert!(t.norm() <= sup + 1e-6, "{} > {sup}", t.norm());
                let basis = cache.get(&geom, r, k).unwrap();
                let grid = QuadratureGrid::rule(k, f.max_freq());
                assert!(doubling_change(&f, &basis, grid).unwrap() <= DOUBLING_TOL);
                assert!(closed_form_defect(&f, &basis, grid).unwrap() <= 1e-9);
            }
        }
    }
}

#[test]
fn dimensions_follow_the_theta_count() {
    let t2 = TorusGeometry::<f64>::t2();
    let t4 = TorusGeometry::<f64>::t4();
    assert_eq!(ThetaBasis::new(&t2, 1, 1).unwrap().dim(), 1);
    assert_eq!(ThetaBasis::new(&t2, 1, 8).unwrap().dim(), 8);
    for r in 1..=3 {
        assert_eq!(ThetaBasis::new(&t4, r, 3).unwrap().dim(), 9);
    }
    assert!(ThetaBasis::new(&t2, 1, 0).is_err());
}

#[test]
fn exponentials_sit_on_one_wrapped_diagonal() {
    let geom = TorusGeometry::<f64>::t2();
    let cache = BasisCache::new();
    let k = 7u32;
    for (m1, m2) in [(1, 0), (0, 1), (2, -1), (-3, 2)] {
        let f = Symbol::monomial(2, &[m1, m2], Complex64::new(1.0, 0.0)).unwrap();
        let t = quantize(&f, &geom, 1, k, &cache).unwrap().matrix;
        let n = k as i32;
        let on: Vec<f64> = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .filter(|(a, b)| (a - b - m1).rem_euclid(n) == 0)
            .map(|(a, b)| t[(a as usize, b as usize)].norm())
            .collect();
        let off = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .filter(|(a, b)| (a - b - m1).rem_euclid(n) != 0)
            .map(|(a, b)| t[(a as usize, b as usize)].norm())
            .fold(0.0, f64::max);
        assert!(off < 1e-12, "({m1},{m2}) off-diagonal {off}");
        assert!(on.iter().all(|v| (v - on[0]).abs() < 1e-12 && *v > 0.0));
    }
}

#[test]
fn norm_gap_closes_with_level() {
    // |f|_sup - ||T_f|| should shrink roughly like 1/k
    let geom = TorusGeometry::<f64>::t2();
    let cache = BasisCache::new();
    let f = preset::<f64>("cos1*cos2", 2).unwrap();
    let gaps: Vec<f64> = [8u32, 16, 32]
        .iter()
        .map(|&k| 1.0 - quantize(&f, &geom, 1, k, &cache).unwrap().norm())
        .collect();
    assert!(gaps.iter().all(|g| *g >= -1e-12));
    assert!(gaps[1] < 0.7 * gaps[0] && gaps[2] < 0.7 * gaps[1], "{gaps:?}");
}

#[test]
fn section_normalization_does_not_matter() {
    let geom = TorusGeometry::<f64>::t4();
    let f = random_symbol::<f64>(3, 4, 2, true).unwrap();
    for r in 1..=3 {
        let basis = ThetaBasis::new(&geom, r, 3).unwrap();
        let t = toeplitz_matrix(&f, &basis).unwrap().matrix;
        // positive rescaling of each section: same orthonormal frame
        let d = Matrix::from_fn(9, 9, |i, j| Complex64::new(if i == j { 0.3 + i as f64 } else { 0.0 }, 0.0));
        let scaled = toeplitz_matrix(&f, &basis.with_raw_transform(d).unwrap()).unwrap().matrix;
        assert!(max_abs(&(&scaled - &t)) < 1e-12);
        // a general change of basis: unitarily equivalent
        let mut rng = seeded_rng(r as u64);
        let g = random_matrix::<f64>(&mut rng, 9) + Matrix::identity(9, 9) * Complex64::new(3.0, 0.0);
        let moved = toeplitz_matrix(&f, &basis.with_raw_transform(g).unwrap()).unwrap();
        assert!(moved.hermitian_defect() < 1e-12);
        assert!((dense_norm(&moved.matrix) - dense_norm(&t)).abs() < 1e-10);
        assert!((hilbert_schmidt(&moved.matrix) - hilbert_schmidt(&t)).abs() < 1e-10);
        let (a, b) = (moved.matrix.trace(), t.trace());
        assert!((a - b).norm() < 1e-10);
    }
}

#[test]
fn triple_needs_the_four_torus() {
    let cache = BasisCache::new();
    assert!(quantize_triple(&Symbol::one(2), &TorusGeometry::t2(), 3, &cache).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn quantization_is_linear(seed in 0u64..1_000_000, re in -2.0f64..2.0, im in -2.0f64..2.0, k in 2u32..5) {
        let geom = TorusGeometry::<f64>::t4();
        let cache = BasisCache::new();
        let f = random_symbol::<f64>(seed, 4, 1, false).unwrap();
        let g = random_symbol::<f64>(seed + 1, 4, 1, false).unwrap();
        let c = Complex64::new(re, im);
        let lhs = quantize_triple(&(&f.scale(c) + &g), &geom, k, &cache).unwrap();
        let tf = quantize_triple(&f, &geom, k, &cache).unwrap();
        let tg = quantize_triple(&g, &geom, k, &cache).unwrap();
        for r in 0..3 {
            let rhs = &tf[r].matrix * c + &tg[r].matrix;
            prop_assert!(dense_norm(&(&lhs[r].matrix - &rhs)) < 1e-12 * (1.0 + dense_norm(&rhs)));
        }
    }

    #[test]
    fn adjoint_is_conjugate_symbol(seed in 0u64..1_000_000, r in 1usize..=3) {
        let geom = TorusGeometry::<f64>::t4();
        let cache = BasisCache::new();
        let f = random_symbol::<f64>(seed, 4, 2, false).unwrap();
        let t = quantize(&f, &geom, r, 3, &cache).unwrap();
        let tc = quantize(&f.conj(), &geom, r, 3, &cache).unwrap();
        prop_assert!(max_abs(&(t.adjoint().matrix - tc.matrix)) < 1e-12);
    }
}
