//! Matrix-free operators on `C^{N1} (x) C^{N2} (x) C^{N3}` and on direct sums.
//!
//! Vectors on the tensor product are stored row-major in `(i1, i2, i3)`, so
//! that the dense materialization is `A.kronecker(B).kronecker(C)`.

use std::sync::Arc;

use num_complex::Complex;

use super::commutator::commutator;
use super::{matmul, CMat};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// `coeff * A (x) B (x) C`.
#[derive(Clone, Debug)]
pub struct KronTerm<T: Real> {
    pub coeff: Complex<T>,
    pub factors: [Arc<CMat<T>>; 3],
}

impl<T: Real> KronTerm<T> {
    pub fn new(coeff: Complex<T>, a: Arc<CMat<T>>, b: Arc<CMat<T>>, c: Arc<CMat<T>>) -> Self {
        Self {
            coeff,
            factors: [a, b, c],
        }
    }

    fn sizes(&self) -> [usize; 3] {
        [
            self.factors[0].nrows(),
            self.factors[1].nrows(),
            self.factors[2].nrows(),
        ]
    }

    fn same_factors(&self, other: &Self) -> bool {
        (0..3).all(|i| Arc::ptr_eq(&self.factors[i], &other.factors[i]))
    }
}

/// Linear combination of Kronecker triples sharing factor sizes.
#[derive(Clone, Debug)]
pub struct KronSum<T: Real> {
    sizes: [usize; 3],
    terms: Vec<KronTerm<T>>,
}

impl<T: Real> KronSum<T> {
    pub fn empty(sizes: [usize; 3]) -> Self {
        Self {
            sizes,
            terms: Vec::new(),
        }
    }

    pub fn single(term: KronTerm<T>) -> Result<Self> {
        let sizes = term.sizes();
        let mut s = Self::empty(sizes);
        s.push(term)?;
        Ok(s)
    }

    /// Appends a term, merging it into an existing term with identical
    /// (pointer-equal) factors.
    pub fn push(&mut self, term: KronTerm<T>) -> Result<()> {
        for (i, f) in term.factors.iter().enumerate() {
            if f.nrows() != self.sizes[i] || f.ncols() != self.sizes[i] {
                return Err(Error::SizeMismatch {
                    left: self.sizes[i],
                    right: f.nrows(),
                });
            }
        }
        if let Some(t) = self.terms.iter_mut().find(|t| t.same_factors(&term)) {
            t.coeff += term.coeff;
        } else {
            self.terms.push(term);
        }
        Ok(())
    }

    pub fn sizes(&self) -> [usize; 3] {
        self.sizes
    }

    pub fn terms(&self) -> &[KronTerm<T>] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn scale(&self, a: Complex<T>) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff *= a;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.sizes != other.sizes {
            return Err(Error::SizeMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        let mut out = self.clone();
        for t in &other.terms {
            out.push(t.clone())?;
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> CMat<T> {
        let n = self.dim();
        let mut acc = CMat::zeros(n, n);
        for t in &self.terms {
            let k = t.factors[0].kronecker(&t.factors[1]).kronecker(&t.factors[2]);
            acc += k * t.coeff;
        }
        acc
    }

    fn apply_into(&self, x: &[Complex<T>], y: &mut [Complex<T>], adjoint: bool) {
        let mut s1 = vec![Complex::default(); x.len()];
        let mut s2 = vec![Complex::default(); x.len()];
        for t in &self.terms {
            apply_kron_term(t, self.sizes, x, &mut s1, &mut s2, adjoint);
            let c = if adjoint { t.coeff.conj() } else { t.coeff };
            for (yi, si) in y.iter_mut().zip(&s1) {
                *yi += c * *si;
            }
        }
    }
}

/// Entry `(i, j)` of `m` or of `m^*`.
#[inline]
fn entry<T: Real>(m: &CMat<T>, i: usize, j: usize, adjoint: bool) -> Complex<T> {
    if adjoint {
        m[(j, i)].conj()
    } else {
        m[(i, j)]
    }
}

/// `out = (A (x) B (x) C) x` (or its adjoint) through three mode products;
/// `scratch` has the length of `x`.
fn apply_kron_term<T: Real>(
    t: &KronTerm<T>,
    sizes: [usize; 3],
    x: &[Complex<T>],
    out: &mut [Complex<T>],
    scratch: &mut [Complex<T>],
    adjoint: bool,
) {
    let [n1, n2, n3] = sizes;
    let [a, b, c] = &t.factors;
    let zero = Complex::default();
    // mode 3: rows of length n3
    for row in 0..n1 * n2 {
        let xr = &x[row * n3..(row + 1) * n3];
        let sr = &mut scratch[row * n3..(row + 1) * n3];
        for i3 in 0..n3 {
            let mut acc = zero;
            for (j3, xv) in xr.iter().enumerate() {
                acc += entry(c, i3, j3, adjoint) * *xv;
            }
            sr[i3] = acc;
        }
    }
    // mode 2: within each i1 block, axpy over rows of length n3
    for v in out.iter_mut() {
        *v = zero;
    }
    for i1 in 0..n1 {
        let base = i1 * n2 * n3;
        for i2 in 0..n2 {
            for j2 in 0..n2 {
                let coef = entry(b, i2, j2, adjoint);
                if coef == zero {
                    continue;
                }
                let src = base + j2 * n3;
                let dst = base + i2 * n3;
                for i3 in 0..n3 {
                    let v = coef * scratch[src + i3];
                    out[dst + i3] += v;
                }
            }
        }
    }
    // mode 1: axpy over blocks of length n2 * n3
    let block = n2 * n3;
    for v in scratch.iter_mut() {
        *v = zero;
    }
    for i1 in 0..n1 {
        for j1 in 0..n1 {
            let coef = entry(a, i1, j1, adjoint);
            if coef == zero {
                continue;
            }
            let (src, dst) = (j1 * block, i1 * block);
            for r in 0..block {
                let v = coef * out[src + r];
                scratch[dst + r] += v;
            }
        }
    }
    out.copy_from_slice(scratch);
}

/// Expression tree of structured operators, applied without materialization.
#[derive(Clone, Debug)]
pub enum StructuredOperator<T: Real> {
    /// Block-diagonal operator.
    DirectSum(Vec<Arc<CMat<T>>>),
    Kron(KronSum<T>),
    /// `sum_i c_i X_i`.
    Sum(Vec<(Complex<T>, StructuredOperator<T>)>),
    /// `X_1 X_2 ... X_m` (the last factor acts first).
    Product(Vec<StructuredOperator<T>>),
}

impl<T: Real> StructuredOperator<T> {
    pub fn dim(&self) -> usize {
        match self {
            Self::DirectSum(blocks) => blocks.iter().map(|b| b.nrows()).sum(),
            Self::Kron(k) => k.dim(),
            Self::Sum(items) => items.first().map(|(_, x)| x.dim()).unwrap_or(0),
            Self::Product(items) => items.first().map(|x| x.dim()).unwrap_or(0),
        }
    }

    /// Number of Kronecker-term or block applications per matvec.
    pub fn cost(&self) -> usize {
        match self {
            Self::DirectSum(blocks) => blocks.len(),
            Self::Kron(k) => k.len(),
            Self::Sum(items) => items.iter().map(|(_, x)| x.cost()).sum(),
            Self::Product(items) => items.iter().map(|x| x.cost()).sum(),
        }
    }

    pub fn scale(self, a: Complex<T>) -> Self {
        match self {
            Self::Kron(k) => Self::Kron(k.scale(a)),
            Self::DirectSum(blocks) => Self::DirectSum(
                blocks
                    .into_iter()
                    .map(|b| Arc::new(b.as_ref() * a))
                    .collect(),
            ),
            other => Self::Sum(vec![(a, other)]),
        }
    }

    /// `self - other`, merging Kronecker sums where possible.
    pub fn sub(self, other: Self) -> Result<Self> {
        let minus = Complex::new(-T::one(), T::zero());
        self.add(other.scale(minus))
    }

    pub fn add(self, other: Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::SizeMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        let one = Complex::new(T::one(), T::zero());
        Ok(match (self, other) {
            (Self::Kron(a), Self::Kron(b)) if a.sizes == b.sizes => Self::Kron(a.add(&b)?),
            (Self::DirectSum(a), Self::DirectSum(b)) if same_blocks(&a, &b) => Self::DirectSum(
                a.iter()
                    .zip(&b)
                    .map(|(x, y)| Arc::new(x.as_ref() + y.as_ref()))
                    .collect(),
            ),
            (Self::Sum(mut a), Self::Sum(b)) => {
                a.extend(b);
                Self::Sum(a)
            }
            (Self::Sum(mut a), b) => {
                a.push((one, b));
                Self::Sum(a)
            }
            (a, b) => Self::Sum(vec![(one, a), (one, b)]),
        })
    }

    /// Lazy product `self * other`.
    pub fn mul(self, other: Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::SizeMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(match (self, other) {
            (Self::DirectSum(a), Self::DirectSum(b)) if same_blocks(&a, &b) => Self::DirectSum(
                a.iter()
                    .zip(&b)
                    .map(|(x, y)| Arc::new(x.as_ref() * y.as_ref()))
                    .collect(),
            ),
            (Self::Product(mut a), Self::Product(b)) => {
                a.extend(b);
                Self::Product(a)
            }
            (Self::Product(mut a), b) => {
                a.push(b);
                Self::Product(a)
            }
            (a, Self::Product(mut b)) => {
                b.insert(0, a);
                Self::Product(b)
            }
            (a, b) => Self::Product(vec![a, b]),
        })
    }

    /// `[self, other]`: the four-term identity for Kronecker triples,
    /// blockwise for direct sums, lazy otherwise.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        match (self, other) {
            (Self::Kron(a), Self::Kron(b)) => Ok(Self::Kron(kron_commutator(a, b)?)),
            (Self::DirectSum(a), Self::DirectSum(b)) if same_blocks(a, b) => Ok(Self::DirectSum(
                a.iter()
                    .zip(b)
                    .map(|(x, y)| Arc::new(commutator(x, y)))
                    .collect(),
            )),
            _ => {
                let ab = self.clone().mul(other.clone())?;
                let ba = other.clone().mul(self.clone())?;
                ab.sub(ba)
            }
        }
    }

    /// 4-ary generalized commutator through the six-product expansion of
    /// pairwise commutators, each product kept lazy.
    pub fn gen_commutator4(ops: [&Self; 4]) -> Result<Self> {
        let c = |i: usize, j: usize| ops[i].commutator(ops[j]);
        let one = Complex::new(T::one(), T::zero());
        let minus = -one;
        let items = vec![
            (one, c(0, 1)?.mul(c(2, 3)?)?),
            (minus, c(0, 2)?.mul(c(1, 3)?)?),
            (one, c(0, 3)?.mul(c(1, 2)?)?),
            (one, c(2, 3)?.mul(c(0, 1)?)?),
            (minus, c(1, 3)?.mul(c(0, 2)?)?),
            (one, c(1, 2)?.mul(c(0, 3)?)?),
        ];
        Ok(Self::Sum(items))
    }

    pub fn apply(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        self.apply_impl(x, false)
    }

    pub fn apply_adjoint(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        self.apply_impl(x, true)
    }

    fn apply_impl(&self, x: &[Complex<T>], adjoint: bool) -> Vec<Complex<T>> {
        match self {
            Self::DirectSum(blocks) => {
                let mut y = Vec::with_capacity(x.len());
                let mut off = 0;
                for b in blocks {
                    let n = b.nrows();
                    let xs = &x[off..off + n];
                    for i in 0..n {
                        let mut acc = Complex::default();
                        for (j, xv) in xs.iter().enumerate() {
                            acc += entry(b, i, j, adjoint) * *xv;
                        }
                        y.push(acc);
                    }
                    off += n;
                }
                y
            }
            Self::Kron(k) => {
                let mut y = vec![Complex::default(); x.len()];
                k.apply_into(x, &mut y, adjoint);
                y
            }
            Self::Sum(items) => {
                let mut y = vec![Complex::default(); x.len()];
                for (c, op) in items {
                    let c = if adjoint { c.conj() } else { *c };
                    for (yi, v) in y.iter_mut().zip(op.apply_impl(x, adjoint)) {
                        *yi += c * v;
                    }
                }
                y
            }
            Self::Product(items) => {
                // (X_1 ... X_m)^* = X_m^* ... X_1^*
                let mut v = x.to_vec();
                if adjoint {
                    for op in items {
                        v = op.apply_impl(&v, true);
                    }
                } else {
                    for op in items.iter().rev() {
                        v = op.apply_impl(&v, false);
                    }
                }
                v
            }
        }
    }

    /// Dense materialization (for verification at small sizes).
    pub fn to_dense(&self) -> CMat<T> {
        match self {
            Self::DirectSum(blocks) => {
                let n = self.dim();
                let mut m = CMat::zeros(n, n);
                let mut off = 0;
                for b in blocks {
                    let s = b.nrows();
                    m.view_mut((off, off), (s, s)).copy_from(b.as_ref());
                    off += s;
                }
                m
            }
            Self::Kron(k) => k.to_dense(),
            Self::Sum(items) => {
                let n = self.dim();
                let mut m = CMat::zeros(n, n);
                for (c, op) in items {
                    m += op.to_dense() * *c;
                }
                m
            }
            Self::Product(items) => {
                let n = self.dim();
                items
                    .iter()
                    .fold(CMat::identity(n, n), |acc, op| matmul(&acc, &op.to_dense()))
            }
        }
    }
}

fn same_blocks<T: Real>(a: &[Arc<CMat<T>>], b: &[Arc<CMat<T>>]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.nrows() == y.nrows())
}

pub fn direct_sum3<T: Real>(a: CMat<T>, b: CMat<T>, c: CMat<T>) -> StructuredOperator<T> {
    StructuredOperator::DirectSum(vec![Arc::new(a), Arc::new(b), Arc::new(c)])
}

pub fn kron3<T: Real>(a: Arc<CMat<T>>, b: Arc<CMat<T>>, c: Arc<CMat<T>>) -> Result<StructuredOperator<T>> {
    let one = Complex::new(T::one(), T::zero());
    Ok(StructuredOperator::Kron(KronSum::single(KronTerm::new(one, a, b, c))?))
}

/// Commutator of Kronecker sums, expanded bilinearly; each pair of terms
/// contributes the four-term identity
/// `[A1 (x) A2 (x) A3, B1 (x) B2 (x) B3] = [A1,B1] (x) [A2,B2] (x) [A3,B3]
///  + [A1,B1] (x) B2A2 (x) A3B3 + A1B1 (x) [A2,B2] (x) B3A3
///  + B1A1 (x) A2B2 (x) [A3,B3]`.
pub fn kron_commutator<T: Real>(x: &KronSum<T>, y: &KronSum<T>) -> Result<KronSum<T>> {
    if x.sizes != y.sizes {
        return Err(Error::SizeMismatch {
            left: x.dim(),
            right: y.dim(),
        });
    }
    let mut out = KronSum::empty(x.sizes);
    for s in &x.terms {
        for t in &y.terms {
            let [a1, a2, a3] = &s.factors;
            let [b1, b2, b3] = &t.factors;
            let c = s.coeff * t.coeff;
            let com = |a: &CMat<T>, b: &CMat<T>| Arc::new(commutator(a, b));
            let prod = |a: &CMat<T>, b: &CMat<T>| Arc::new(a * b);
            let (c1, c2, c3) = (com(a1, b1), com(a2, b2), com(a3, b3));
            out.push(KronTerm::new(c, c1.clone(), c2.clone(), c3.clone()))?;
            out.push(KronTerm::new(c, c1, prod(b2, a2), prod(a3, b3)))?;
            out.push(KronTerm::new(c, prod(a1, b1), c2, prod(b3, a3)))?;
            out.push(KronTerm::new(c, prod(b1, a1), prod(a2, b2), c3))?;
        }
    }
    Ok(out)
}

/// `(sum_s A_s (x) B_s (x) C_s)(sum_t D_t (x) E_t (x) F_t)` with materialized
/// factor products `A_s D_t (x) B_s E_t (x) C_s F_t`.
pub fn kron_product<T: Real>(x: &KronSum<T>, y: &KronSum<T>) -> Result<KronSum<T>> {
    if x.sizes != y.sizes {
        return Err(Error::SizeMismatch {
            left: x.dim(),
            right: y.dim(),
        });
    }
    let mut out = KronSum::empty(x.sizes);
    for s in &x.terms {
        for t in &y.terms {
            let f = |i: usize| Arc::new(s.factors[i].as_ref() * t.factors[i].as_ref());
            out.push(KronTerm::new(s.coeff * t.coeff, f(0), f(1), f(2)))?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{max_abs, random_matrix, seeded_rng};

    fn rand_arc(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> Arc<CMat<f64>> {
        Arc::new(random_matrix(rng, n))
    }

    fn dense_apply(m: &CMat<f64>, x: &[Complex<f64>]) -> Vec<Complex<f64>> {
        let v = nalgebra::DVector::from_column_slice(x);
        (m * v).iter().copied().collect()
    }

    #[test]
    fn kron_matvec_matches_dense() {
        let mut rng = seeded_rng(1);
        let (a, b, c) = (rand_arc(&mut rng, 2), rand_arc(&mut rng, 3), rand_arc(&mut rng, 4));
        let op = kron3(a, b, c).unwrap();
        let dense = op.to_dense();
        for j in 0..24 {
            let mut e = vec![Complex::default(); 24];
            e[j] = Complex::new(1.0, 0.0);
            let y = op.apply(&e);
            for i in 0..24 {
                assert!((y[i] - dense[(i, j)]).norm() < 1e-14);
            }
            let ya = op.apply_adjoint(&e);
            for i in 0..24 {
                assert!((ya[i] - dense[(j, i)].conj()).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn kron_commutator_matches_dense() {
        let mut rng = seeded_rng(2);
        let x = kron3(rand_arc(&mut rng, 3), rand_arc(&mut rng, 3), rand_arc(&mut rng, 3)).unwrap();
        let y = kron3(rand_arc(&mut rng, 3), rand_arc(&mut rng, 3), rand_arc(&mut rng, 3)).unwrap();
        let com = x.commutator(&y).unwrap();
        let (dx, dy) = (x.to_dense(), y.to_dense());
        let want = &dx * &dy - &dy * &dx;
        assert!(max_abs(&(com.to_dense() - &want)) < 1e-12 * max_abs(&want));
        assert!(max_abs(&x.commutator(&x).unwrap().to_dense()) < 1e-12);
    }

    #[test]
    fn kron_product_and_lazy_product_agree() {
        let mut rng = seeded_rng(4);
        let mut xs = KronSum::empty([2, 3, 2]);
        let mut ys = KronSum::empty([2, 3, 2]);
        for _ in 0..2 {
            xs.push(KronTerm::new(Complex::new(0.5, 1.0), rand_arc(&mut rng, 2), rand_arc(&mut rng, 3), rand_arc(&mut rng, 2))).unwrap();
            ys.push(KronTerm::new(Complex::new(-1.0, 0.3), rand_arc(&mut rng, 2), rand_arc(&mut rng, 3), rand_arc(&mut rng, 2))).unwrap();
        }
        let p = kron_product(&xs, &ys).unwrap();
        assert_eq!(p.len(), 4);
        let want = xs.to_dense() * ys.to_dense();
        assert!(max_abs(&(p.to_dense() - &want)) < 1e-12 * max_abs(&want));
        let lazy = StructuredOperator::Kron(xs).mul(StructuredOperator::Kron(ys)).unwrap();
        let x: Vec<Complex<f64>> = (0..12).map(|i| Complex::new(i as f64, 1.0)).collect();
        let got = lazy.apply(&x);
        let exp = dense_apply(&want, &x);
        for (g, e) in got.iter().zip(&exp) {
            assert!((g - e).norm() < 1e-11);
        }
    }

    #[test]
    fn identity_term_is_neutral_and_duplicates_merge() {
        let mut rng = seeded_rng(6);
        let a = rand_arc(&mut rng, 2);
        let id = Arc::new(CMat::<f64>::identity(2, 2));
        let x = KronSum::single(KronTerm::new(Complex::new(2.0, 0.0), a.clone(), a.clone(), a.clone())).unwrap();
        let i = KronSum::single(KronTerm::new(Complex::new(1.0, 0.0), id.clone(), id.clone(), id)).unwrap();
        let p = kron_product(&x, &i).unwrap();
        assert!(max_abs(&(p.to_dense() - x.to_dense())) < 1e-14);
        let doubled = x.add(&x).unwrap();
        assert_eq!(doubled.len(), 1);
        assert_eq!(doubled.terms()[0].coeff, Complex::new(4.0, 0.0));
    }

    #[test]
    fn gen_commutator4_matches_dense() {
        use crate::operator::{gen_commutator, CommutatorMethod};
        let mut rng = seeded_rng(7);
        let ops: Vec<StructuredOperator<f64>> = (0..4)
            .map(|_| kron3(rand_arc(&mut rng, 2), rand_arc(&mut rng, 2), rand_arc(&mut rng, 2)).unwrap())
            .collect();
        let lazy = StructuredOperator::gen_commutator4([&ops[0], &ops[1], &ops[2], &ops[3]]).unwrap();
        assert_eq!(lazy.cost(), 48);
        let dense: Vec<CMat<f64>> = ops.iter().map(|o| o.to_dense()).collect();
        let want = gen_commutator(&[&dense[0], &dense[1], &dense[2], &dense[3]], CommutatorMethod::Direct).unwrap();
        assert!(max_abs(&(lazy.to_dense() - &want)) < 1e-11 * max_abs(&want));
    }

    #[test]
    fn direct_sum_commutator_is_blockwise() {
        let mut rng = seeded_rng(9);
        let x = direct_sum3(random_matrix::<f64>(&mut rng, 2), random_matrix(&mut rng, 3), random_matrix(&mut rng, 2));
        let y = direct_sum3(random_matrix::<f64>(&mut rng, 2), random_matrix(&mut rng, 3), random_matrix(&mut rng, 2));
        let c = x.commutator(&y).unwrap();
        assert!(matches!(c, StructuredOperator::DirectSum(_)));
        let (dx, dy) = (x.to_dense(), y.to_dense());
        assert!(max_abs(&(c.to_dense() - (&dx * &dy - &dy * &dx))) < 1e-13);
    }
}
