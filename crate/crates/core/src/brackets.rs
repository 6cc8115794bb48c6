//! Classical brackets of symbols for constant symplectic forms.
//!
//! Sign convention: `{f, g} = sum_il P_il d_i f d_l g` with `P = -A^{-1}`,
//! where `omega = 1/2 A_ij dx_i ^ dx_j`. For `omega = dx_1 ^ dx_2` this gives
//! `{f, g} = d_1 f d_2 g - d_2 f d_1 g`. All other brackets inherit it.

use std::collections::BTreeMap;

use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::symbol::{pointwise, Freq, FourierSymbol, MAX_DIM};

/// `omega = 1/2 A_ij dx_i ^ dx_j` with constant antisymmetric invertible `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantSymplecticForm<T: Real> {
    matrix: DMatrix<T>,
    inverse: DMatrix<T>,
}

impl<T: Real> ConstantSymplecticForm<T> {
    pub fn new(matrix: DMatrix<T>) -> Result<Self> {
        let d = matrix.nrows();
        if d != matrix.ncols() || d == 0 || !d.is_multiple_of(2) {
            return Err(Error::InvalidForm(format!(
                "expected an even square matrix, got {}x{}",
                d,
                matrix.ncols()
            )));
        }
        let scale = matrix.amax();
        let skew = (&matrix + matrix.transpose()).amax();
        if skew > T::lit(1e-14) * scale {
            return Err(Error::InvalidForm("matrix is not antisymmetric".into()));
        }
        let inverse = matrix
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidForm("matrix is singular".into()))?;
        let defect = (&matrix * &inverse - DMatrix::identity(d, d)).amax();
        if defect > T::lit(1e-12) {
            return Err(Error::InvalidForm(format!(
                "inverse defect {:e}",
                defect.as_f64()
            )));
        }
        Ok(Self { matrix, inverse })
    }

    /// `scale * sum_j dx_{2j-1} ^ dx_{2j}`.
    pub fn darboux(dim: usize, scale: T) -> Result<Self> {
        let mut a = DMatrix::zeros(dim, dim);
        for j in 0..dim / 2 {
            a[(2 * j, 2 * j + 1)] = scale;
            a[(2 * j + 1, 2 * j)] = -scale;
        }
        Self::new(a)
    }

    /// `scale * sum coeff dx_i ^ dx_j` from `(i, j, coeff)` with 1-based `i < j`.
    pub fn from_terms(dim: usize, scale: T, terms: &[(usize, usize, i32)]) -> Result<Self> {
        let mut a = DMatrix::zeros(dim, dim);
        for &(i, j, c) in terms {
            if i == 0 || j == 0 || i > dim || j > dim || i == j {
                return Err(Error::InvalidForm(format!("bad index pair ({i}, {j})")));
            }
            let v = scale * T::lit(c as f64);
            a[(i - 1, j - 1)] += v;
            a[(j - 1, i - 1)] -= v;
        }
        Self::new(a)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn inverse(&self) -> &DMatrix<T> {
        &self.inverse
    }

    /// Poisson tensor `P = -A^{-1}`.
    pub fn poisson_tensor(&self) -> DMatrix<T> {
        -&self.inverse
    }

    /// Pfaffian of `A`: `omega^n / n! = Pf(A) dx_1 ^ ... ^ dx_2n`.
    pub fn pfaffian(&self) -> T {
        pfaffian(&self.matrix)
    }

    /// Evaluates `omega(u, v) = u^T A v`.
    pub fn eval(&self, u: &[T], v: &[T]) -> T {
        let d = self.dim();
        let mut acc = T::zero();
        for i in 0..d {
            for j in 0..d {
                acc += u[i] * self.matrix[(i, j)] * v[j];
            }
        }
        acc
    }
}

/// Pfaffian by expansion along the first row (sizes here are at most 4).
pub fn pfaffian<T: Real>(a: &DMatrix<T>) -> T {
    let n = a.nrows();
    if n == 0 {
        return T::one();
    }
    if n % 2 == 1 {
        return T::zero();
    }
    let mut acc = T::zero();
    for j in 1..n {
        let keep: Vec<usize> = (1..n).filter(|&c| c != j).collect();
        let minor = DMatrix::from_fn(n - 2, n - 2, |r, c| a[(keep[r], keep[c])]);
        let sign = if j % 2 == 1 { T::one() } else { -T::one() };
        acc += sign * a[(0, j)] * pfaffian(&minor);
    }
    acc
}

/// Density `rho` of a top form `Omega = rho dx_1 ^ ... ^ dx_d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolumeDensity<T> {
    pub rho: T,
}

impl<T: Real> VolumeDensity<T> {
    pub fn new(rho: T) -> Result<Self> {
        if !(rho > T::zero()) {
            return Err(Error::InvalidForm("volume density must be positive".into()));
        }
        Ok(Self { rho })
    }

    /// `Omega = omega^n / n!`.
    pub fn from_form(form: &ConstantSymplecticForm<T>) -> Result<Self> {
        Self::new(form.pfaffian())
    }

    /// `Omega = sum_r omega_r ^ omega_r` on a 4-manifold.
    pub fn hyperkahler(forms: &[ConstantSymplecticForm<T>]) -> Result<Self> {
        if forms.iter().any(|f| f.dim() != 4) {
            return Err(Error::UnsupportedDimension(forms[0].dim()));
        }
        // omega ^ omega = 2 Pf(A) dx_1234
        let rho = forms
            .iter()
            .fold(T::zero(), |acc, f| acc + T::lit(2.0) * f.pfaffian());
        Self::new(rho)
    }

    /// `mu` with `Omega = (mu / 2) omega ^ omega` (dimension 4) or
    /// `Omega = mu omega` (dimension 2).
    pub fn mu(&self, form: &ConstantSymplecticForm<T>) -> T {
        self.rho / form.pfaffian()
    }
}

fn check_dims<T: Real>(fs: &[&FourierSymbol<T>], dim: usize) -> Result<()> {
    for f in fs {
        if f.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: f.dim(),
            });
        }
    }
    Ok(())
}

pub(crate) fn real_c<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// Partial derivatives of every symbol, row by row, and the frequency bound
/// of any product taking one factor from each row.
fn jacobian<T: Real>(fs: &[&FourierSymbol<T>]) -> (Vec<FourierSymbol<T>>, Freq) {
    let mut bound = [0; MAX_DIM];
    for f in fs {
        for (b, m) in bound.iter_mut().zip(f.freq_bound()) {
            *b += m;
        }
    }
    (fs.iter().flat_map(|f| f.gradient()).collect(), bound)
}

/// Nonzero entries of the Poisson tensor.
fn tensor_entries<T: Real>(form: &ConstantSymplecticForm<T>) -> Vec<(usize, usize, T)> {
    let p = form.poisson_tensor();
    let d = form.dim();
    (0..d)
        .flat_map(|i| (0..d).map(move |l| (i, l)))
        .filter(|&(i, l)| p[(i, l)] != T::zero())
        .map(|(i, l)| (i, l, p[(i, l)]))
        .collect()
}

/// `{f_a, f_b}` at a point from the Jacobian values, with the sum of term moduli.
fn poisson_at<T: Real>(p: &[(usize, usize, T)], v: &[Complex<T>], d: usize, a: usize, b: usize) -> (Complex<T>, T) {
    let mut val = Complex::default();
    let mut mag = T::zero();
    for &(i, l, c) in p {
        let t = v[a * d + i] * v[b * d + l];
        val += t.scale(c);
        mag += t.l1_norm() * c.abs();
    }
    (val, mag)
}

/// `{f, g} = sum_il P_il d_i f d_l g`.
pub fn poisson_bracket<T: Real>(
    f: &FourierSymbol<T>,
    g: &FourierSymbol<T>,
    form: &ConstantSymplecticForm<T>,
) -> Result<FourierSymbol<T>> {
    let d = form.dim();
    check_dims(&[f, g], d)?;
    let p = tensor_entries(form);
    let (jac, bound) = jacobian(&[f, g]);
    let inputs: Vec<&FourierSymbol<T>> = jac.iter().collect();
    Ok(pointwise(d, &inputs, &bound, |v| poisson_at(&p, v, d, 0, 1)))
}

/// Sign of the permutation `perm` of `0..n`.
pub fn permutation_sign(perm: &[usize]) -> i32 {
    let mut seen = vec![false; perm.len()];
    let mut sign = 1;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut j = start;
        while !seen[j] {
            seen[j] = true;
            j = perm[j];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// `det(d f_i / d x_l) / rho`: the Nambu bracket of `Omega = rho dx_1...dx_d`.
pub fn nambu_bracket_det<T: Real>(
    fs: &[&FourierSymbol<T>],
    density: &VolumeDensity<T>,
) -> Result<FourierSymbol<T>> {
    let Some(first) = fs.first() else {
        return Err(Error::ArityMismatch {
            expected: 2,
            got: 0,
        });
    };
    let d = first.dim();
    if fs.len() != d {
        return Err(Error::ArityMismatch {
            expected: d,
            got: fs.len(),
        });
    }
    check_dims(fs, d)?;
    if d != 2 && d != 4 {
        return Err(Error::UnsupportedDimension(d));
    }
    let (jac, bound) = jacobian(fs);
    let inputs: Vec<&FourierSymbol<T>> = jac.iter().collect();
    let inv_rho = T::one() / density.rho;
    Ok(pointwise(d, &inputs, &bound, |v| {
        let m = |r0: usize, r1: usize, a: usize, b: usize| {
            let (x, y) = (v[r0 * d + a] * v[r1 * d + b], v[r0 * d + b] * v[r1 * d + a]);
            (x - y, x.l1_norm() + y.l1_norm())
        };
        // the magnitude sums the moduli of all permutation terms
        let (det, mag) = if d == 2 {
            m(0, 1, 0, 1)
        } else {
            // Laplace expansion along rows (1, 2) against rows (3, 4)
            let terms = [
                (m(0, 1, 0, 1), m(2, 3, 2, 3), 1.0),
                (m(0, 1, 0, 2), m(2, 3, 1, 3), -1.0),
                (m(0, 1, 0, 3), m(2, 3, 1, 2), 1.0),
                (m(0, 1, 1, 2), m(2, 3, 0, 3), 1.0),
                (m(0, 1, 1, 3), m(2, 3, 0, 2), -1.0),
                (m(0, 1, 2, 3), m(2, 3, 0, 1), 1.0),
            ];
            terms.iter().fold((Complex::default(), T::zero()), |(val, mag), (top, bottom, sign)| {
                (val + (top.0 * bottom.0).scale(T::lit(*sign)), mag + top.1 * bottom.1)
            })
        };
        (det.scale(inv_rho), mag * inv_rho)
    }))
}

/// `1/(2^n n!) sum_sigma sign(sigma) prod_j {f_sigma(2j-1), f_sigma(2j)}`.
///
/// The permutation sum is enumerated literally; products of Poisson brackets
/// that coincide up to sign are computed once.
pub fn nambu_bracket_pairwise<T: Real>(
    fs: &[&FourierSymbol<T>],
    form: &ConstantSymplecticForm<T>,
) -> Result<FourierSymbol<T>> {
    let d = form.dim();
    if fs.len() != d {
        return Err(Error::ArityMismatch {
            expected: d,
            got: fs.len(),
        });
    }
    check_dims(fs, d)?;
    let n = d / 2;
    let mut weights: BTreeMap<Vec<(usize, usize)>, i64> = BTreeMap::new();
    for perm in (0..d).permutations(d) {
        let mut sign = permutation_sign(&perm) as i64;
        let mut key = Vec::with_capacity(n);
        for j in 0..n {
            let (a, b) = (perm[2 * j], perm[2 * j + 1]);
            if a < b {
                key.push((a, b));
            } else {
                key.push((b, a));
                sign = -sign;
            }
        }
        key.sort_unstable();
        *weights.entry(key).or_insert(0) += sign;
    }
    let norm = T::lit((1u64 << n) as f64 * (1..=n as u64).product::<u64>() as f64);
    let terms: Vec<(Vec<(usize, usize)>, T)> = weights
        .into_iter()
        .filter(|(_, w)| *w != 0)
        .map(|(k, w)| (k, T::lit(w as f64) / norm))
        .collect();
    let pairs: Vec<(usize, usize)> = (0..d).tuple_combinations().collect();
    let p = tensor_entries(form);
    let (jac, bound) = jacobian(fs);
    let inputs: Vec<&FourierSymbol<T>> = jac.iter().collect();
    Ok(pointwise(d, &inputs, &bound, |v| {
        let pb: Vec<(Complex<T>, T)> = pairs.iter().map(|&(a, b)| poisson_at(&p, v, d, a, b)).collect();
        let at = |pair: &(usize, usize)| pb[pairs.iter().position(|q| q == pair).expect("pair listed")];
        let mut val = Complex::default();
        let mut mag = T::zero();
        for (key, w) in &terms {
            let (pv, pm) = key.iter().fold((real_c(T::one()), T::one()), |(x, y), pair| {
                let (a, b) = at(pair);
                (x * a, y * b)
            });
            val += pv.scale(*w);
            mag += pm * w.abs();
        }
        (val, mag)
    }))
}

/// `{f,g}{h,t} - {f,h}{g,t} + {f,t}{g,h}` summed over `forms`, evaluated in
/// one pass.
fn bracket4_sum<T: Real>(fs: [&FourierSymbol<T>; 4], forms: &[ConstantSymplecticForm<T>]) -> Result<FourierSymbol<T>> {
    if let Some(f) = forms.iter().find(|f| f.dim() != 4) {
        return Err(Error::UnsupportedDimension(f.dim()));
    }
    check_dims(&fs, 4)?;
    let ps: Vec<_> = forms.iter().map(tensor_entries).collect();
    let (jac, bound) = jacobian(&fs);
    let inputs: Vec<&FourierSymbol<T>> = jac.iter().collect();
    Ok(pointwise(4, &inputs, &bound, |v| {
        let mut val = Complex::default();
        let mut mag = T::zero();
        for p in &ps {
            let pb = |a, b| poisson_at(p, v, 4, a, b);
            let (fg, hl, fh, gl, fl, gh) = (pb(0, 1), pb(2, 3), pb(0, 2), pb(1, 3), pb(0, 3), pb(1, 2));
            val += fg.0 * hl.0 - fh.0 * gl.0 + fl.0 * gh.0;
            mag += fg.1 * hl.1 + fh.1 * gl.1 + fl.1 * gh.1;
        }
        (val, mag)
    }))
}

/// `{f,g}{h,t} - {f,h}{g,t} + {f,t}{g,h}` for the Poisson bracket of `form`.
pub fn bracket4<T: Real>(
    f: &FourierSymbol<T>,
    g: &FourierSymbol<T>,
    h: &FourierSymbol<T>,
    t: &FourierSymbol<T>,
    form: &ConstantSymplecticForm<T>,
) -> Result<FourierSymbol<T>> {
    bracket4_sum([f, g, h, t], std::slice::from_ref(form))
}

/// Sum of [`bracket4`] over the given forms.
pub fn bracket4_hyp<T: Real>(
    f: &FourierSymbol<T>,
    g: &FourierSymbol<T>,
    h: &FourierSymbol<T>,
    t: &FourierSymbol<T>,
    forms: &[ConstantSymplecticForm<T>],
) -> Result<FourierSymbol<T>> {
    bracket4_sum([f, g, h, t], forms)
}
