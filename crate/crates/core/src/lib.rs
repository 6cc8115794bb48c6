//! Berezin-Toeplitz quantization of flat tori and Nambu-bracket asymptotics.
//!
//! Everything numerical is generic over [`scalar::Real`]; the aliases below
//! fix the working precision to `f64`.

pub mod brackets;
pub mod experiments;
pub mod error;
pub mod geometry;
pub mod operator;
pub mod scalar;
pub mod symbol;

pub use error::{Error, Result};

pub type Symbol = symbol::FourierSymbol<f64>;
pub type SymplecticForm = brackets::ConstantSymplecticForm<f64>;
pub type Density = brackets::VolumeDensity<f64>;
pub type Matrix = operator::CMat<f64>;
pub type Operator = operator::DenseOperator<f64>;
pub type Structured = operator::StructuredOperator<f64>;
pub type Torus = geometry::TorusGeometry<f64>;
pub type Basis = geometry::ThetaBasis<f64>;
pub type Cache = geometry::BasisCache<f64>;
