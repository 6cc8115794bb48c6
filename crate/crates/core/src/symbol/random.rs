use std::collections::BTreeMap;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_dim, neg_freq, Freq, FourierSymbol, MAX_DIM};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Seeded random trigonometric polynomial with every frequency in the
/// box `|m|_inf <= max_freq` populated, coefficients uniform in the unit disc.
///
/// With `real_valued` set, coefficients are drawn on one half of the box and
/// mirrored so that `c_{-m} = conj(c_m)`; the constant term is real.
pub fn random_symbol<T: Real>(
    seed: u64,
    dim: usize,
    max_freq: u32,
    real_valued: bool,
) -> Result<FourierSymbol<T>> {
    check_dim(dim)?;
    if max_freq == 0 {
        return Err(Error::Invalid("random symbols need max_freq >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = 2 * max_freq as i32 + 1;
    let count = (side as usize).pow(dim as u32);
    let mut coeffs: BTreeMap<Freq, Complex<T>> = BTreeMap::new();
    for idx in 0..count {
        let mut m = [0; MAX_DIM];
        let mut rest = idx;
        for i in (0..dim).rev() {
            m[i] = (rest % side as usize) as i32 - max_freq as i32;
            rest /= side as usize;
        }
        let radius = rng.random::<f64>().sqrt();
        let angle = rng.random::<f64>() * std::f64::consts::TAU;
        let mut c = Complex::new(radius * angle.cos(), radius * angle.sin());
        if real_valued {
            let partner = neg_freq(&m);
            if partner == m {
                c = Complex::new(c.re, 0.0);
            } else if partner < m {
                // the mirrored coefficient was already drawn
                continue;
            }
            coeffs.insert(partner, Complex::new(T::lit(c.re), T::lit(-c.im)));
        }
        coeffs.insert(m, Complex::new(T::lit(c.re), T::lit(c.im)));
    }
    Ok(FourierSymbol::from_map(dim, coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_in_seed() {
        let a = random_symbol::<f64>(42, 4, 2, true).unwrap();
        let b = random_symbol::<f64>(42, 4, 2, true).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_symbol::<f64>(43, 4, 2, true).unwrap());
    }

    #[test]
    fn real_flag_gives_real_values() {
        let f = random_symbol::<f64>(9, 2, 2, true).unwrap();
        assert_eq!(f.reality_defect(), 0.0);
        for v in f.eval_grid(16) {
            assert!(v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn coefficients_in_unit_disc_and_box() {
        let f = random_symbol::<f64>(5, 4, 2, false).unwrap();
        assert_eq!(f.max_freq(), 2);
        assert_eq!(f.len(), 625);
        assert!(f.iter().all(|(_, c)| c.norm() <= 1.0));
    }

    #[test]
    fn zero_max_freq_rejected() {
        assert!(random_symbol::<f64>(1, 2, 0, true).is_err());
    }
}
