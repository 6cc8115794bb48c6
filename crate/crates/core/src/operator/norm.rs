//! Operator norms: dense Hermitian eigenvalues, and Lanczos on `X^* X` for structured operators.

use num_complex::Complex;
use rand::Rng;

use super::structured::StructuredOperator;
use super::{seeded_rng, CMat};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest singular value, as the square root of the top eigenvalue of the
/// smaller Gram matrix. Only the eigenvalues are computed, which is several
/// times cheaper than a full SVD at the sizes used here.
pub fn dense_norm<T: Real>(m: &CMat<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    let gram = if m.nrows() < m.ncols() {
        super::matmul(m, &m.adjoint())
    } else {
        super::matmul(&m.adjoint(), m)
    };
    gram.symmetric_eigenvalues()
        .iter()
        .fold(T::zero(), |acc, s| acc.max(*s))
        .sqrt()
}

/// Frobenius (Hilbert-Schmidt) norm.
pub fn hilbert_schmidt<T: Real>(m: &CMat<T>) -> T {
    m.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr()).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormOptions {
    /// Relative change of the Ritz value at which the iteration stops.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 500,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Operator norm of a structured operator.
///
/// Direct sums are reduced to the largest block norm. Everything else goes
/// through Lanczos on the Hermitian `X^* X` with full reorthogonalization;
/// the extreme Ritz value is tracked by Sturm bisection on the tridiagonal
/// matrix. A run that exhausts `max_iter` is reported as
/// [`Error::NoConvergence`] carrying the last estimate.
pub fn op_norm<T: Real>(x: &StructuredOperator<T>, opts: &NormOptions) -> Result<NormEstimate> {
    if !(opts.tol > 0.0) {
        return Err(Error::Invalid("norm tolerance must be positive".into()));
    }
    if let StructuredOperator::DirectSum(blocks) = x {
        let value = blocks
            .iter()
            .map(|b| dense_norm(b).as_f64())
            .fold(0.0, f64::max);
        return Ok(NormEstimate {
            value,
            iterations: 0,
            converged: true,
        });
    }
    let n = x.dim();
    if n == 0 {
        return Ok(NormEstimate {
            value: 0.0,
            iterations: 0,
            converged: true,
        });
    }
    let mut rng = seeded_rng(opts.seed);
    let mut q: Vec<Complex<T>> = (0..n)
        .map(|_| {
            Complex::new(
                T::lit(rng.random::<f64>() - 0.5),
                T::lit(rng.random::<f64>() - 0.5),
            )
        })
        .collect();
    normalize(&mut q);
    let mut basis: Vec<Vec<Complex<T>>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut prev = f64::NAN;
    let mut stable = 0;
    let limit = opts.max_iter.min(n);
    for it in 1..=limit {
        let mut w = x.apply_adjoint(&x.apply(&q));
        let a = dot(&q, &w).re.as_f64();
        alpha.push(a);
        basis.push(q);
        // full reorthogonalization, applied twice for stability
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= c * *vi;
                }
            }
        }
        let b = norm2(&w).as_f64();
        let lam = tridiagonal_max(&alpha, &beta);
        let scale = lam.abs().max(f64::MIN_POSITIVE);
        if b <= 1e-13 * scale.max(a.abs()) || it == n {
            // Krylov space is invariant: the Ritz value is exact
            return Ok(NormEstimate {
                value: lam.max(0.0).sqrt(),
                iterations: it,
                converged: true,
            });
        }
        if (lam - prev).abs() <= opts.tol * scale {
            stable += 1;
            if stable >= 2 {
                return Ok(NormEstimate {
                    value: lam.max(0.0).sqrt(),
                    iterations: it,
                    converged: true,
                });
            }
        } else {
            stable = 0;
        }
        prev = lam;
        beta.push(b);
        let inv = T::one() / T::lit(b);
        q = w.into_iter().map(|v| v.scale(inv)).collect();
    }
    Err(Error::NoConvergence {
        iterations: limit,
        estimate: prev.max(0.0).sqrt(),
    })
}

fn dot<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter()
        .zip(b)
        .fold(Complex::default(), |acc, (x, y)| acc + x.conj() * *y)
}

fn norm2<T: Real>(a: &[Complex<T>]) -> T {
    a.iter().fold(T::zero(), |acc, x| acc + x.norm_sqr()).sqrt()
}

fn normalize<T: Real>(a: &mut [Complex<T>]) {
    let inv = T::one() / norm2(a);
    for v in a.iter_mut() {
        *v = v.scale(inv);
    }
}

/// Number of eigenvalues below `x` of the symmetric tridiagonal matrix with
/// diagonal `alpha` and off-diagonal `beta`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..alpha.len() {
        let b2 = if i == 0 { 0.0 } else { beta[i - 1] * beta[i - 1] };
        d = alpha[i] - x - if i == 0 { 0.0 } else { b2 / d };
        if d == 0.0 {
            d = -f64::EPSILON * (alpha[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest eigenvalue of a symmetric tridiagonal matrix by bisection.
fn tridiagonal_max(alpha: &[f64], beta: &[f64]) -> f64 {
    let m = alpha.len();
    // Gershgorin interval
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m {
        let r = (if i > 0 { beta[i - 1].abs() } else { 0.0 })
            + (if i + 1 < m { beta[i].abs() } else { 0.0 });
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(alpha, &beta[..m - 1], mid) < m {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}
