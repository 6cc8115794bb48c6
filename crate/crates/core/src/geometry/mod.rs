//! Holomorphic-section spaces of flat tori and Toeplitz quantization.

mod cache;
pub mod quadrature;
mod theta;
pub mod toeplitz;
mod torus;

pub use cache::{BasisCache, CACHE_ENV};
pub use quadrature::QuadratureGrid;
pub use theta::{inverse_cholesky, ThetaBasis, THETA_CUTOFF};
pub use toeplitz::toeplitz_matrix;
pub use torus::{GeometryKind, TorusGeometry};

use crate::error::{Error, Result};
use crate::operator::DenseOperator;
use crate::scalar::Real;
use crate::symbol::FourierSymbol;

/// `T_{f;r}` at level `k` for one structure, bases taken from `cache`.
pub fn quantize<T: Real>(
    f: &FourierSymbol<T>,
    geom: &TorusGeometry<T>,
    r: usize,
    k: u32,
    cache: &BasisCache<T>,
) -> Result<DenseOperator<T>> {
    let basis = cache.get(geom, r, k)?;
    Ok(toeplitz_matrix(f, &basis)?.with_label(format!("T[{};r{r}]", geom.name())))
}

/// `(T_{f;1}, T_{f;2}, T_{f;3})` on the hyperkähler 4-torus.
pub fn quantize_triple<T: Real>(
    f: &FourierSymbol<T>,
    geom: &TorusGeometry<T>,
    k: u32,
    cache: &BasisCache<T>,
) -> Result<[DenseOperator<T>; 3]> {
    if geom.kind() != GeometryKind::T4 {
        return Err(Error::UnsupportedDimension(geom.dim()));
    }
    Ok([
        quantize(f, geom, 1, k, cache)?,
        quantize(f, geom, 2, k, cache)?,
        quantize(f, geom, 3, k, cache)?,
    ])
}
