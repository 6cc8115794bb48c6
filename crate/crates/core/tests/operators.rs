use std::sync::Arc;

use nambu_core::operator::{
    commutator, dense_norm, gen_commutator, kron3, kron_commutator, kron_dense, kron_product, max_abs, op_norm,
    random_matrix, seeded_rng, CommutatorMethod, KronSum, KronTerm, NormOptions, StructuredOperator,
};
use nambu_core::Matrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn mats(seed: u64, n: usize, count: usize) -> Vec<Matrix> {
    let mut rng = seeded_rng(seed);
    (0..count).map(|_| random_matrix(&mut rng, n)).collect()
}

fn kron_all(a: &Matrix, b: &Matrix, c: &Matrix) -> Matrix {
    kron_dense(&kron_dense(a, b), c)
}

fn term(a: &Matrix, b: &Matrix, c: &Matrix) -> KronSum<f64> {
    let one = Complex64::new(1.0, 0.0);
    KronSum::single(KronTerm::new(one, Arc::new(a.clone()), Arc::new(b.clone()), Arc::new(c.clone()))).unwrap()
}

fn close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
    max_abs(&(a - b)) <= tol * max_abs(a).max(max_abs(b)).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn commutator_methods_agree(seed in 0u64..1_000_000, n in 2usize..6, pairs in 1usize..=3) {
        let ms = mats(seed, n, 2 * pairs);
        let refs: Vec<&Matrix> = ms.iter().collect();
        let d = gen_commutator(&refs, CommutatorMethod::Direct).unwrap();
        let r = gen_commutator(&refs, CommutatorMethod::Restricted).unwrap();
        let h = gen_commutator(&refs, CommutatorMethod::Halved).unwrap();
        let scale = ms.iter().map(|m| m.norm()).product::<f64>();
        prop_assert!(max_abs(&(&d - &r)) < 1e-12 * scale);
        prop_assert!(max_abs(&(&d - &h)) < 1e-12 * scale);
    }

    #[test]
    fn pair_commutator_is_the_binary_case(seed in 0u64..1_000_000, n in 1usize..7) {
        let ms = mats(seed, n, 2);
        let g = gen_commutator(&[&ms[0], &ms[1]], CommutatorMethod::Direct).unwrap();
        prop_assert!(close(&g, &commutator(&ms[0], &ms[1]), 1e-13));
    }

    #[test]
    fn generalized_commutator_alternates(seed in 0u64..1_000_000, i in 0usize..4, j in 0usize..4) {
        prop_assume!(i != j);
        let ms = mats(seed, 5, 4);
        let mut refs: Vec<&Matrix> = ms.iter().collect();
        let a = gen_commutator(&refs, CommutatorMethod::Restricted).unwrap();
        refs.swap(i, j);
        let b = gen_commutator(&refs, CommutatorMethod::Restricted).unwrap();
        prop_assert!(close(&a, &-b, 1e-12));
    }

    #[test]
    fn generalized_commutator_is_multilinear(seed in 0u64..1_000_000, slot in 0usize..4, re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let ms = mats(seed, 4, 5);
        let c = Complex64::new(re, im);
        let eval = |x: &Matrix| {
            let mut refs: Vec<&Matrix> = ms[..4].iter().collect();
            refs[slot] = x;
            gen_commutator(&refs, CommutatorMethod::Restricted).unwrap()
        };
        let mix = &ms[slot] * c + &ms[4];
        prop_assert!(close(&eval(&mix), &(eval(&ms[slot]) * c + eval(&ms[4])), 1e-12));
    }

    #[test]
    fn three_factor_difference_bound(seed in 0u64..1_000_000, eps in 0.0f64..1.0) {
        let ms = mats(seed, 3, 6);
        let (m, n0) = (&ms[..3], &ms[3..]);
        // keep N close to M for a mix of small and large differences
        let n: Vec<Matrix> = m.iter().zip(n0).map(|(a, b)| a + b * Complex64::new(eps, 0.0)).collect();
        let lhs = dense_norm(&(kron_all(&m[0], &m[1], &m[2]) - kron_all(&n[0], &n[1], &n[2])));
        let d: Vec<f64> = (0..3).map(|i| dense_norm(&(&m[i] - &n[i]))).collect();
        let nm: Vec<f64> = m.iter().map(dense_norm).collect();
        let nn: Vec<f64> = n.iter().map(dense_norm).collect();
        let rhs = d[0] * d[1] * d[2] + d[0] * nm[1] * nn[2] + nm[0] * nn[1] * d[2] + nn[0] * d[1] * nm[2];
        prop_assert!(lhs <= rhs * (1.0 + 1e-10), "{lhs} > {rhs}");
    }

    #[test]
    fn kron_commutator_matches_dense(seed in 0u64..1_000_000) {
        let ms = mats(seed, 3, 6);
        let x = term(&ms[0], &ms[1], &ms[2]);
        let y = term(&ms[3], &ms[4], &ms[5]);
        let dense = commutator(&x.to_dense(), &y.to_dense());
        prop_assert!(close(&kron_commutator(&x, &y).unwrap().to_dense(), &dense, 1e-12));
        let prod = kron_product(&x, &y).unwrap().to_dense();
        prop_assert!(close(&prod, &(x.to_dense() * y.to_dense()), 1e-12));
    }

    #[test]
    fn mixed_product_rule(seed in 0u64..1_000_000) {
        let ms = mats(seed, 2, 6);
        let lhs = kron_all(&ms[0], &ms[1], &ms[2]) * kron_all(&ms[3], &ms[4], &ms[5]);
        let rhs = kron_all(&(&ms[0] * &ms[3]), &(&ms[1] * &ms[4]), &(&ms[2] * &ms[5]));
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }
}

#[test]
fn lanczos_matches_dense_on_small_kron_sum() {
    let ms = mats(11, 3, 6);
    let mut sum = term(&ms[0], &ms[1], &ms[2]);
    sum.push(KronTerm::new(
        Complex64::new(0.5, -1.0),
        Arc::new(ms[3].clone()),
        Arc::new(ms[4].clone()),
        Arc::new(ms[5].clone()),
    ))
    .unwrap();
    let dense = dense_norm(&sum.to_dense());
    let est = op_norm(&StructuredOperator::Kron(sum), &NormOptions::default()).unwrap();
    assert!(est.converged);
    assert!((est.value - dense).abs() <= 1e-9 * dense, "{} vs {dense}", est.value);
}

#[test]
fn lanczos_matches_dense_at_size_512() {
    let ms = mats(5, 8, 6);
    let x = kron3(Arc::new(ms[0].clone()), Arc::new(ms[1].clone()), Arc::new(ms[2].clone())).unwrap();
    let y = kron3(Arc::new(ms[3].clone()), Arc::new(ms[4].clone()), Arc::new(ms[5].clone())).unwrap();
    let c = x.commutator(&y).unwrap();
    let dense = dense_norm(&c.to_dense());
    let est = op_norm(&c, &NormOptions::default()).unwrap();
    assert!((est.value - dense).abs() <= 1e-8 * dense, "{} vs {dense}", est.value);
}

#[test]
fn direct_sum_norm_is_the_largest_block() {
    let ms = mats(9, 4, 3);
    let want = ms.iter().map(dense_norm).fold(0.0, f64::max);
    let ds = StructuredOperator::DirectSum(ms.into_iter().map(Arc::new).collect());
    let est = op_norm(&ds, &NormOptions::default()).unwrap();
    assert!((est.value - want).abs() <= 1e-12 * want);
}

#[test]
fn odd_arity_rejected() {
    let ms = mats(1, 3, 3);
    let refs: Vec<&Matrix> = ms.iter().collect();
    assert!(gen_commutator(&refs, CommutatorMethod::Direct).is_err());
}
