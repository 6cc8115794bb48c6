use num_complex::Complex;

use super::{matmul, CMat};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Evaluation strategy for the generalized commutator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CommutatorMethod {
    /// Signed sum of all `(2n)!` ordered products.
    Direct,
    /// Sum over permutations increasing within each pair, of products of
    /// ordinary commutators: `(2n)! / 2^n` products.
    Restricted,
    /// `2^-n` times the sum over all permutations of products of commutators.
    Halved,
}

pub const MAX_ARITY: usize = 6;

pub fn commutator<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    matmul(a, b) - matmul(b, a)
}

fn check<T: Real>(ops: &[&CMat<T>]) -> Result<usize> {
    let arity = ops.len();
    if !(2..=MAX_ARITY).contains(&arity) || !arity.is_multiple_of(2) {
        return Err(Error::BadArity(arity));
    }
    let n = ops[0].nrows();
    for op in ops {
        if op.nrows() != n || op.ncols() != n {
            return Err(Error::SizeMismatch {
                left: n,
                right: op.nrows(),
            });
        }
    }
    Ok(n)
}

/// `[A_1, ..., A_2n] = sum_sigma sign(sigma) A_sigma(1) ... A_sigma(2n)`.
pub fn gen_commutator<T: Real>(ops: &[&CMat<T>], method: CommutatorMethod) -> Result<CMat<T>> {
    let n = check(ops)?;
    let mut acc = CMat::zeros(n, n);
    let mut used = vec![false; ops.len()];
    match method {
        CommutatorMethod::Direct => direct(ops, &mut used, None, 1, &mut acc),
        CommutatorMethod::Restricted => {
            let pairs = pair_commutators(ops);
            restricted(&pairs, &mut used, None, 1, &mut acc)
        }
        CommutatorMethod::Halved => {
            let pairs = pair_commutators(ops);
            halved(&pairs, &mut used, None, 1, &mut acc);
            let scale = T::one() / T::lit((1u64 << (ops.len() / 2)) as f64);
            acc *= Complex::new(scale, T::zero());
        }
    }
    Ok(acc)
}

/// Sign change from appending `i` after the already used indices: one
/// transposition for each unused index smaller than `i`.
fn append_sign(used: &[bool], i: usize) -> i32 {
    let smaller_unused = used[..i].iter().filter(|u| !**u).count();
    if smaller_unused % 2 == 0 {
        1
    } else {
        -1
    }
}

fn accumulate<T: Real>(acc: &mut CMat<T>, prod: &CMat<T>, sign: i32) {
    if sign > 0 {
        *acc += prod;
    } else {
        *acc -= prod;
    }
}

fn extend<T: Real>(prefix: Option<&CMat<T>>, next: &CMat<T>) -> CMat<T> {
    match prefix {
        Some(p) => matmul(p, next),
        None => next.clone(),
    }
}

fn direct<T: Real>(
    ops: &[&CMat<T>],
    used: &mut [bool],
    prefix: Option<&CMat<T>>,
    sign: i32,
    acc: &mut CMat<T>,
) {
    let remaining = used.iter().filter(|u| !**u).count();
    for i in 0..ops.len() {
        if used[i] {
            continue;
        }
        let s = sign * append_sign(used, i);
        let prod = extend(prefix, ops[i]);
        if remaining == 1 {
            accumulate(acc, &prod, s);
        } else {
            used[i] = true;
            direct(ops, used, Some(&prod), s, acc);
            used[i] = false;
        }
    }
}

/// `pairs[a][b] = [A_a, A_b]`.
fn pair_commutators<T: Real>(ops: &[&CMat<T>]) -> Vec<Vec<CMat<T>>> {
    let m = ops.len();
    (0..m)
        .map(|a| (0..m).map(|b| commutator(ops[a], ops[b])).collect())
        .collect()
}

fn restricted<T: Real>(
    pairs: &[Vec<CMat<T>>],
    used: &mut [bool],
    prefix: Option<&CMat<T>>,
    sign: i32,
    acc: &mut CMat<T>,
) {
    let m = pairs.len();
    let remaining = used.iter().filter(|u| !**u).count();
    for a in 0..m {
        if used[a] {
            continue;
        }
        let sa = sign * append_sign(used, a);
        used[a] = true;
        for b in a + 1..m {
            if used[b] {
                continue;
            }
            let s = sa * append_sign(used, b);
            let prod = extend(prefix, &pairs[a][b]);
            if remaining == 2 {
                accumulate(acc, &prod, s);
            } else {
                used[b] = true;
                restricted(pairs, used, Some(&prod), s, acc);
                used[b] = false;
            }
        }
        used[a] = false;
    }
}

fn halved<T: Real>(
    pairs: &[Vec<CMat<T>>],
    used: &mut [bool],
    prefix: Option<&CMat<T>>,
    sign: i32,
    acc: &mut CMat<T>,
) {
    let m = pairs.len();
    let remaining = used.iter().filter(|u| !**u).count();
    for a in 0..m {
        if used[a] {
            continue;
        }
        let sa = sign * append_sign(used, a);
        used[a] = true;
        for b in 0..m {
            if used[b] {
                continue;
            }
            let s = sa * append_sign(used, b);
            let prod = extend(prefix, &pairs[a][b]);
            if remaining == 2 {
                accumulate(acc, &prod, s);
            } else {
                used[b] = true;
                halved(pairs, used, Some(&prod), s, acc);
                used[b] = false;
            }
        }
        used[a] = false;
    }
}

/// The six-product expansion of the 4-ary commutator.
pub fn comm4_expand<T: Real>(a: &CMat<T>, b: &CMat<T>, c: &CMat<T>, d: &CMat<T>) -> Result<CMat<T>> {
    check(&[a, b, c, d])?;
    let ab = commutator(a, b);
    let ac = commutator(a, c);
    let ad = commutator(a, d);
    let bc = commutator(b, c);
    let bd = commutator(b, d);
    let cd = commutator(c, d);
    let m = matmul;
    Ok(m(&ab, &cd) - m(&ac, &bd) + m(&ad, &bc) + m(&cd, &ab) - m(&bd, &ac) + m(&bc, &ad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{max_abs, random_matrix, seeded_rng};
    use itertools::Itertools;

    fn naive(ops: &[&CMat<f64>]) -> CMat<f64> {
        let n = ops[0].nrows();
        let mut acc = CMat::zeros(n, n);
        for perm in (0..ops.len()).permutations(ops.len()) {
            let mut prod = CMat::identity(n, n);
            for &i in &perm {
                prod *= ops[i];
            }
            if crate::brackets::permutation_sign(&perm) > 0 {
                acc += prod;
            } else {
                acc -= prod;
            }
        }
        acc
    }

    #[test]
    fn methods_agree_with_naive_permutation_sum() {
        let mut rng = seeded_rng(3);
        for arity in [2, 4, 6] {
            let mats: Vec<CMat<f64>> = (0..arity).map(|_| random_matrix(&mut rng, 4)).collect();
            let ops: Vec<&CMat<f64>> = mats.iter().collect();
            let want = naive(&ops);
            let scale = max_abs(&want);
            for method in [CommutatorMethod::Direct, CommutatorMethod::Restricted, CommutatorMethod::Halved] {
                let got = gen_commutator(&ops, method).unwrap();
                assert!(max_abs(&(got - &want)) <= 1e-12 * scale, "{arity} {method:?}");
            }
        }
    }

    #[test]
    fn identity_slot_and_repeats_vanish() {
        let mut rng = seeded_rng(5);
        let a = random_matrix::<f64>(&mut rng, 3);
        let b = random_matrix::<f64>(&mut rng, 3);
        let c = random_matrix::<f64>(&mut rng, 3);
        let id = CMat::identity(3, 3);
        let scale = max_abs(&a).powi(4);
        for m in [CommutatorMethod::Direct, CommutatorMethod::Restricted, CommutatorMethod::Halved] {
            assert!(max_abs(&gen_commutator(&[&a, &b, &id, &c], m).unwrap()) < 1e-12 * scale);
            assert!(max_abs(&gen_commutator(&[&a, &b, &a, &c], m).unwrap()) < 1e-12 * scale);
        }
        assert!(max_abs(&comm4_expand(&a, &id, &b, &c).unwrap()) < 1e-12 * scale);
    }

    #[test]
    fn expansion_matches_direct() {
        let mut rng = seeded_rng(8);
        let m: Vec<CMat<f64>> = (0..4).map(|_| random_matrix(&mut rng, 5)).collect();
        let e = comm4_expand(&m[0], &m[1], &m[2], &m[3]).unwrap();
        let d = gen_commutator(&[&m[0], &m[1], &m[2], &m[3]], CommutatorMethod::Direct).unwrap();
        assert!(max_abs(&(e - &d)) <= 1e-12 * max_abs(&d));
    }

    #[test]
    fn bad_arity_and_sizes() {
        let a = CMat::<f64>::identity(2, 2);
        let b = CMat::<f64>::identity(3, 3);
        assert_eq!(gen_commutator(&[&a, &a, &a], CommutatorMethod::Direct), Err(Error::BadArity(3)));
        assert_eq!(gen_commutator(&[&a; 8], CommutatorMethod::Direct), Err(Error::BadArity(8)));
        assert!(matches!(
            gen_commutator(&[&a, &b], CommutatorMethod::Direct),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn commuting_diagonals_give_zero() {
        let d = |v: [f64; 3]| CMat::from_diagonal(&nalgebra::DVector::from_iterator(3, v.iter().map(|x| Complex::new(*x, 0.0))));
        let e = comm4_expand(&d([1., 2., 3.]), &d([0., 1., 5.]), &d([2., 2., 1.]), &d([7., 1., 0.])).unwrap();
        assert_eq!(max_abs(&e), 0.0);
    }
}
