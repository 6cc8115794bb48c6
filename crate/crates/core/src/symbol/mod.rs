//! Trigonometric polynomials on the flat torus `R^d / Z^d`.
//!
//! A symbol is stored as a sparse map from integer frequency vectors to
//! complex coefficients, `f(x) = sum_m c_m exp(2 pi i m.x)`. Every operation
//! used by the brackets (products, partial derivatives, linear combinations)
//! is closed on this class, so classical computations are exact up to
//! floating-point rounding.

mod conv;
pub(crate) use conv::pointwise;
mod presets;
mod random;
mod supnorm;

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use presets::{preset, CoeffRecord};
pub use random::random_symbol;
pub use supnorm::{grid_max, sup_norm, SupNorm};

/// Largest torus dimension handled by the crate.
pub const MAX_DIM: usize = 4;

/// Integer frequency vector; entries past the symbol dimension are zero.
pub type Freq = [i32; MAX_DIM];

/// Coefficients with modulus at or below this are dropped after every operation.
pub const PRUNE_TOL: f64 = 1e-15;

/// Complex-valued trigonometric polynomial on a `dim`-torus.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSymbol<T: Real> {
    dim: usize,
    coeffs: BTreeMap<Freq, Complex<T>>,
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::UnsupportedDimension(dim));
    }
    Ok(())
}

fn freq_from_slice(dim: usize, m: &[i32]) -> Result<Freq> {
    if m.len() != dim {
        return Err(Error::DimensionMismatch {
            left: dim,
            right: m.len(),
        });
    }
    let mut out = [0; MAX_DIM];
    out[..dim].copy_from_slice(m);
    Ok(out)
}

pub(crate) fn neg_freq(m: &Freq) -> Freq {
    let mut out = *m;
    for v in out.iter_mut() {
        *v = -*v;
    }
    out
}

impl<T: Real> FourierSymbol<T> {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: Complex<T>) -> Self {
        let mut s = Self::zero(dim);
        s.insert([0; MAX_DIM], c);
        s
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, Complex::new(T::one(), T::zero()))
    }

    /// `c * exp(2 pi i m.x)`.
    pub fn monomial(dim: usize, m: &[i32], c: Complex<T>) -> Result<Self> {
        check_dim(dim)?;
        let f = freq_from_slice(dim, m)?;
        let mut s = Self::zero(dim);
        s.insert(f, c);
        Ok(s)
    }

    /// Builds a symbol from `(frequency, coefficient)` pairs, summing repeats.
    pub fn from_coeffs<I>(dim: usize, items: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<i32>, Complex<T>)>,
    {
        check_dim(dim)?;
        let mut acc: BTreeMap<Freq, Complex<T>> = BTreeMap::new();
        for (m, c) in items {
            let f = freq_from_slice(dim, &m)?;
            let e = acc.entry(f).or_default();
            *e += c;
        }
        let mut s = Self { dim, coeffs: acc };
        s.prune();
        Ok(s)
    }

    pub(crate) fn from_map(dim: usize, coeffs: BTreeMap<Freq, Complex<T>>) -> Self {
        let mut s = Self { dim, coeffs };
        s.prune();
        s
    }

    fn insert(&mut self, m: Freq, c: Complex<T>) {
        if c.norm_sqr().as_f64().sqrt() > PRUNE_TOL {
            self.coeffs.insert(m, c);
        } else {
            self.coeffs.remove(&m);
        }
    }

    fn prune(&mut self) {
        self.prune_below(PRUNE_TOL);
    }

    pub(crate) fn prune_below(&mut self, tol: f64) {
        let tol2 = T::lit(tol * tol);
        self.coeffs.retain(|_, c| c.norm_sqr() > tol2);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored (nonzero) coefficients.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Iterates `(frequency, coefficient)` in lexicographic frequency order.
    pub fn iter(&self) -> impl Iterator<Item = (&[i32], Complex<T>)> + '_ {
        let d = self.dim;
        self.coeffs.iter().map(move |(m, c)| (&m[..d], *c))
    }

    pub(crate) fn raw(&self) -> &BTreeMap<Freq, Complex<T>> {
        &self.coeffs
    }

    pub fn coeff(&self, m: &[i32]) -> Complex<T> {
        match freq_from_slice(self.dim, m) {
            Ok(f) => self.coeffs.get(&f).copied().unwrap_or_default(),
            Err(_) => Complex::default(),
        }
    }

    /// Largest `|m|_inf` over the support (0 for the zero symbol).
    pub fn max_freq(&self) -> u32 {
        self.coeffs
            .keys()
            .flat_map(|m| m.iter().map(|v| v.unsigned_abs()))
            .max()
            .unwrap_or(0)
    }

    /// Largest `|m_i|` along each axis.
    pub fn freq_bound(&self) -> Freq {
        let mut b = [0; MAX_DIM];
        for m in self.coeffs.keys() {
            for (bi, mi) in b.iter_mut().zip(m) {
                *bi = (*bi).max(mi.abs());
            }
        }
        b
    }

    /// Sum of coefficient moduli, an upper bound for the sup norm.
    pub fn l1_norm(&self) -> T {
        self.coeffs
            .values()
            .fold(T::zero(), |acc, c| acc + c.norm_sqr().sqrt())
    }

    pub fn max_coeff(&self) -> T {
        self.coeffs
            .values()
            .fold(T::zero(), |acc, c| acc.max(c.norm_sqr().sqrt()))
    }

    /// Point evaluation at `x` (length `dim`).
    pub fn eval(&self, x: &[T]) -> Complex<T> {
        debug_assert_eq!(x.len(), self.dim);
        let two_pi = T::two_pi();
        let mut acc = Complex::default();
        for (m, c) in &self.coeffs {
            let mut phase = T::zero();
            for i in 0..self.dim {
                phase += T::lit(m[i] as f64) * x[i];
            }
            let (s, co) = (two_pi * phase).sin_cos();
            acc += *c * Complex::new(co, s);
        }
        acc
    }

    /// Complex conjugate function: `conj(f)(x) = conj(f(x))`.
    pub fn conj(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(m, c)| (neg_freq(m), c.conj()))
            .collect();
        Self {
            dim: self.dim,
            coeffs,
        }
    }

    /// Largest deviation from the reality condition `c_{-m} = conj(c_m)`.
    pub fn reality_defect(&self) -> T {
        let mut worst = T::zero();
        for (m, c) in &self.coeffs {
            let partner = self.coeffs.get(&neg_freq(m)).copied().unwrap_or_default();
            worst = worst.max((*c - partner.conj()).norm_sqr().sqrt());
        }
        worst
    }

    pub fn is_real_valued(&self, tol: T) -> bool {
        self.reality_defect() <= tol
    }

    /// Real part as a symbol, `(f + conj f) / 2`.
    pub fn real_part(&self) -> Self {
        let half = Complex::new(T::lit(0.5), T::zero());
        (self + &self.conj()).scale(half)
    }

    pub fn scale(&self, a: Complex<T>) -> Self {
        let coeffs = self.coeffs.iter().map(|(m, c)| (*m, *c * a)).collect();
        Self::from_map(self.dim, coeffs)
    }

    pub fn scale_real(&self, a: T) -> Self {
        self.scale(Complex::new(a, T::zero()))
    }

    fn combine(&self, other: &Self, sign: T) -> Self {
        let mut coeffs = self.coeffs.clone();
        for (m, c) in &other.coeffs {
            let e = coeffs.entry(*m).or_default();
            *e += c.scale(sign);
        }
        Self::from_map(self.dim, coeffs)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(self.combine(other, T::one()))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(self.combine(other, -T::one()))
    }

    /// Exact product of trigonometric polynomials.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(conv::multiply(self, other))
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    /// `d f / d x_axis` (axis is 0-based): `c_m -> 2 pi i m_axis c_m`.
    pub fn partial_derivative(&self, axis: usize) -> Result<Self> {
        if axis >= self.dim {
            return Err(Error::AxisOutOfRange {
                axis,
                dim: self.dim,
            });
        }
        let two_pi = T::two_pi();
        let coeffs = self
            .coeffs
            .iter()
            .map(|(m, c)| {
                let factor = Complex::new(T::zero(), two_pi * T::lit(m[axis] as f64));
                (*m, *c * factor)
            })
            .collect();
        Ok(Self::from_map(self.dim, coeffs))
    }

    /// Gradient as `dim` symbols.
    pub fn gradient(&self) -> Vec<Self> {
        (0..self.dim)
            .map(|i| self.partial_derivative(i).expect("axis in range"))
            .collect()
    }

    /// Largest coefficientwise difference.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut worst = T::zero();
        for (m, c) in &self.coeffs {
            let o = other.coeffs.get(m).copied().unwrap_or_default();
            worst = worst.max((*c - o).norm_sqr().sqrt());
        }
        for (m, c) in &other.coeffs {
            if !self.coeffs.contains_key(m) {
                worst = worst.max(c.norm_sqr().sqrt());
            }
        }
        worst
    }

    /// Coefficientwise difference relative to the larger coefficient scale.
    pub fn rel_diff(&self, other: &Self) -> T {
        let scale = T::one().max(self.max_coeff()).max(other.max_coeff());
        self.max_abs_diff(other) / scale
    }

    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.dim == other.dim && self.max_abs_diff(other) <= tol
    }

    /// Values on the uniform grid `{j / n}^dim`, row-major with axis 0 slowest.
    pub fn eval_grid(&self, n: usize) -> Vec<Complex<T>> {
        conv::eval_grid(self, n)
    }
}

impl<T: Real> Add for &FourierSymbol<T> {
    type Output = FourierSymbol<T>;
    fn add(self, rhs: Self) -> FourierSymbol<T> {
        self.checked_add(rhs).expect("symbol dimensions agree")
    }
}

impl<T: Real> Sub for &FourierSymbol<T> {
    type Output = FourierSymbol<T>;
    fn sub(self, rhs: Self) -> FourierSymbol<T> {
        self.checked_sub(rhs).expect("symbol dimensions agree")
    }
}

impl<T: Real> Mul for &FourierSymbol<T> {
    type Output = FourierSymbol<T>;
    fn mul(self, rhs: Self) -> FourierSymbol<T> {
        self.checked_mul(rhs).expect("symbol dimensions agree")
    }
}

impl<T: Real> Neg for &FourierSymbol<T> {
    type Output = FourierSymbol<T>;
    fn neg(self) -> FourierSymbol<T> {
        self.scale_real(-T::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type S = FourierSymbol<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn cos_axis(dim: usize, axis: usize, freq: i32) -> S {
        let mut m = vec![0; dim];
        m[axis] = freq;
        let mut mm = vec![0; dim];
        mm[axis] = -freq;
        S::from_coeffs(dim, vec![(m, c(0.5, 0.0)), (mm, c(0.5, 0.0))]).unwrap()
    }

    #[test]
    fn identity_is_neutral_for_products() {
        let g = random_symbol::<f64>(7, 2, 2, false).unwrap();
        assert_eq!(&S::one(2) * &g, g);
    }

    #[test]
    fn inverse_frequencies_multiply_to_one() {
        let f = S::monomial(2, &[1, 0], c(1.0, 0.0)).unwrap();
        let g = S::monomial(2, &[-1, 0], c(1.0, 0.0)).unwrap();
        assert_eq!(&f * &g, S::one(2));
    }

    #[test]
    fn cos_squared_matches_pointwise() {
        let f = cos_axis(2, 0, 1);
        let sq = &f * &f;
        let expected = S::from_coeffs(
            2,
            vec![
                (vec![0, 0], c(0.5, 0.0)),
                (vec![2, 0], c(0.25, 0.0)),
                (vec![-2, 0], c(0.25, 0.0)),
            ],
        )
        .unwrap();
        assert!(sq.approx_eq(&expected, 1e-15));
        for i in 0..9 {
            for j in 0..9 {
                let x = [i as f64 / 9.0 + 0.013, j as f64 / 9.0 - 0.2];
                let direct = (2.0 * std::f64::consts::PI * x[0]).cos().powi(2);
                assert!((sq.eval(&x) - c(direct, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let f = S::one(2);
        let g = S::one(4);
        assert!(matches!(
            f.checked_mul(&g),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        assert!(S::constant(4, c(3.0, 1.0))
            .partial_derivative(2)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn derivative_of_sine() {
        let sin = S::from_coeffs(
            2,
            vec![(vec![1, 0], c(0.0, -0.5)), (vec![-1, 0], c(0.0, 0.5))],
        )
        .unwrap();
        let d = sin.partial_derivative(0).unwrap();
        let expected = cos_axis(2, 0, 1).scale_real(2.0 * std::f64::consts::PI);
        assert!(d.approx_eq(&expected, 1e-14));
        assert!(matches!(
            sin.partial_derivative(2),
            Err(Error::AxisOutOfRange { axis: 2, dim: 2 })
        ));
    }

    #[test]
    fn derivative_matches_central_differences() {
        let f = random_symbol::<f64>(3, 4, 2, false).unwrap();
        let x = [0.11, 0.37, 0.73, 0.91];
        for axis in 0..4 {
            let exact = f.partial_derivative(axis).unwrap().eval(&x);
            let mut errs = Vec::new();
            for h in [1e-2, 5e-3] {
                let mut xp = x;
                let mut xm = x;
                xp[axis] += h;
                xm[axis] -= h;
                let fd = (f.eval(&xp) - f.eval(&xm)) / (2.0 * h);
                errs.push((fd - exact).norm());
            }
            // second order: halving h divides the error by about four
            let ratio = errs[0] / errs[1];
            assert!(ratio > 3.5 && ratio < 4.5, "axis {axis}: ratio {ratio}");
        }
    }

    #[test]
    fn zero_coefficients_are_not_stored() {
        let f = S::from_coeffs(2, vec![(vec![1, 1], c(1.0, 0.0)), (vec![1, 1], c(-1.0, 0.0))])
            .unwrap();
        assert!(f.is_zero());
        assert_eq!(f, S::zero(2));
    }

    #[test]
    fn grid_evaluation_matches_pointwise() {
        let f = random_symbol::<f64>(11, 2, 2, false).unwrap();
        let n = 7;
        let grid = f.eval_grid(n);
        for i in 0..n {
            for j in 0..n {
                let x = [i as f64 / n as f64, j as f64 / n as f64];
                assert!((grid[i * n + j] - f.eval(&x)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn conj_and_real_part() {
        let f = random_symbol::<f64>(5, 2, 2, false).unwrap();
        let x = [0.3, 0.8];
        assert!((f.conj().eval(&x) - f.eval(&x).conj()).norm() < 1e-12);
        let r = f.real_part();
        assert!(r.is_real_valued(1e-15));
        assert!((r.eval(&x).re - f.eval(&x).re).abs() < 1e-12);
    }
}
