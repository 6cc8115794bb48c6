use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::FourierSymbol;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// One coefficient of a symbol literal: `re + i im` at frequency `m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffRecord {
    pub m: Vec<i32>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl<T: Real> FourierSymbol<T> {
    pub fn from_records(dim: usize, records: &[CoeffRecord]) -> Result<Self> {
        Self::from_coeffs(
            dim,
            records
                .iter()
                .map(|r| (r.m.clone(), Complex::new(T::lit(r.re), T::lit(r.im)))),
        )
    }

    pub fn to_records(&self) -> Vec<CoeffRecord> {
        self.iter()
            .map(|(m, c)| CoeffRecord {
                m: m.to_vec(),
                re: c.re.as_f64(),
                im: c.im.as_f64(),
            })
            .collect()
    }
}

fn axis_of(name: &str, prefix: &str, dim: usize) -> Result<Option<usize>> {
    let Some(rest) = name.strip_prefix(prefix) else {
        return Ok(None);
    };
    let axis: usize = rest
        .parse()
        .map_err(|_| Error::SymbolSpec(format!("bad axis in '{name}'")))?;
    if axis == 0 || axis > dim {
        return Err(Error::SymbolSpec(format!(
            "axis {axis} in '{name}' outside 1..={dim}"
        )));
    }
    Ok(Some(axis - 1))
}

fn factor<T: Real>(name: &str, dim: usize) -> Result<FourierSymbol<T>> {
    let half = Complex::new(T::lit(0.5), T::zero());
    let ihalf = Complex::new(T::zero(), T::lit(0.5));
    let unit = |axis: usize, sign: i32| {
        let mut m = vec![0; dim];
        m[axis] = sign;
        m
    };
    if name == "one" {
        return Ok(FourierSymbol::one(dim));
    }
    if let Some(a) = axis_of(name, "cos", dim)? {
        return FourierSymbol::from_coeffs(dim, vec![(unit(a, 1), half), (unit(a, -1), half)]);
    }
    if let Some(a) = axis_of(name, "sin", dim)? {
        return FourierSymbol::from_coeffs(dim, vec![(unit(a, 1), -ihalf), (unit(a, -1), ihalf)]);
    }
    if let Some(a) = axis_of(name, "exp", dim)? {
        return FourierSymbol::monomial(dim, &unit(a, 1), Complex::new(T::one(), T::zero()));
    }
    if let Ok(v) = name.parse::<f64>() {
        return Ok(FourierSymbol::constant(dim, Complex::new(T::lit(v), T::zero())));
    }
    Err(Error::SymbolSpec(format!("unknown preset '{name}'")))
}

/// Named symbol: `one`, `cos<i>`, `sin<i>`, `exp<i>` (axis `i` is 1-based),
/// a real constant, or a `*`-separated product of these, e.g. `cos1*sin2`.
pub fn preset<T: Real>(name: &str, dim: usize) -> Result<FourierSymbol<T>> {
    super::check_dim(dim)?;
    let name = name.trim();
    if name.is_empty() {
        return Err(Error::SymbolSpec("empty preset name".into()));
    }
    let mut acc = FourierSymbol::one(dim);
    for part in name.split('*') {
        acc = &acc * &factor(part.trim(), dim)?;
    }
    Ok(acc)
}
