//! Finite-dimensional operator algebra.

mod commutator;
mod dump;
mod norm;
mod structured;

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use commutator::{comm4_expand, commutator, gen_commutator, CommutatorMethod};
pub use dump::{read_binary, write_binary, write_csv};
pub use norm::{dense_norm, hilbert_schmidt, op_norm, NormEstimate, NormOptions};
pub use structured::{direct_sum3, kron3, kron_commutator, kron_product, KronSum, KronTerm, StructuredOperator};

pub type CMat<T> = DMatrix<Complex<T>>;

/// Dense complex `N x N` operator with optional provenance metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator<T: Real> {
    pub matrix: CMat<T>,
    pub label: String,
    pub level: Option<u32>,
}

impl<T: Real> DenseOperator<T> {
    pub fn new(matrix: CMat<T>) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.nrows() != matrix.ncols() {
            return Err(Error::SizeMismatch {
                left: matrix.nrows(),
                right: matrix.ncols(),
            });
        }
        if matrix.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::Invalid("operator has non-finite entries".into()));
        }
        Ok(Self {
            matrix,
            label: String::new(),
            level: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_level(mut self, k: u32) -> Self {
        self.level = Some(k);
        self
    }

    pub fn identity(n: usize) -> Self {
        Self::new(CMat::identity(n, n)).expect("nonempty identity")
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            label: self.label.clone(),
            level: self.level,
        }
    }

    /// Largest entry of `A - A^*`.
    pub fn hermitian_defect(&self) -> T {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn norm(&self) -> T {
        dense_norm(&self.matrix)
    }
}

/// Largest entry modulus.
pub fn max_abs<T: Real>(m: &CMat<T>) -> T {
    m.iter()
        .fold(T::zero(), |acc, c| acc.max(c.norm_sqr().sqrt()))
}

/// Seeded complex matrix with entries uniform in the square `[-1, 1]^2`.
pub fn random_matrix<T: Real>(rng: &mut ChaCha8Rng, n: usize) -> CMat<T> {
    CMat::from_fn(n, n, |_, _| {
        Complex::new(
            T::lit(rng.random::<f64>() * 2.0 - 1.0),
            T::lit(rng.random::<f64>() * 2.0 - 1.0),
        )
    })
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex product through four real matrix products, which take the
/// blocked real kernels instead of the generic complex loop.
pub fn matmul<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    if a.nrows() * a.ncols() * b.ncols() < 32_768 {
        return a * b;
    }
    let (ar, ai) = (a.map(|c| c.re), a.map(|c| c.im));
    let (br, bi) = (b.map(|c| c.re), b.map(|c| c.im));
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    re.zip_map(&im, Complex::new)
}

/// Dense Kronecker product `a (x) b`.
pub fn kron_dense<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    a.kronecker(b)
}
