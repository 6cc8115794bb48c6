//! Berezin-Toeplitz matrices `(T_f)_ab = <f e_b, e_a>` in the orthonormal frame.
//!
//! For a Fourier mode the Gaussian integrals are explicit: writing
//! `exp(2 pi i m . x) = exp(2 pi i (p . u + q . v))`,
//!
//! `<e(m) s_b, s_a> = G00 delta(a = b + p mod k) exp(-2 pi i q . b / k)
//!     exp(-(pi / 2k) w^T Y^{-1} w - (pi i / k) p^T conj(Omega) p)`
//!
//! with `w = q - conj(Omega) p` and `G00` the common norm of the canonical
//! sections. [`super::quadrature`] evaluates the same pairings by quadrature.

use num_complex::Complex;

use super::theta::ThetaBasis;
use crate::error::{Error, Result};
use crate::operator::{CMat, DenseOperator};
use crate::scalar::Real;
use crate::symbol::FourierSymbol;

fn check_dim<T: Real>(f: &FourierSymbol<T>, basis: &ThetaBasis<T>) -> Result<()> {
    if f.dim() != 2 * basis.genus() {
        return Err(Error::DimensionMismatch {
            left: 2 * basis.genus(),
            right: f.dim(),
        });
    }
    Ok(())
}

/// Per-basis data shared by all modes: the class of every section and the
/// `k`-th roots of unity `exp(-2 pi i j / k)`.
struct ModeTables<T: Real> {
    classes: Vec<i64>,
    roots: Vec<Complex<T>>,
}

impl<T: Real> ModeTables<T> {
    fn new(basis: &ThetaBasis<T>) -> Self {
        let k = basis.k();
        let classes = (0..basis.dim()).flat_map(|b| basis.class(b)).collect();
        let roots = (0..k)
            .map(|j| {
                let (s, c) = (T::two_pi() * T::lit(j as f64 / k as f64)).sin_cos();
                Complex::new(c, -s)
            })
            .collect();
        Self { classes, roots }
    }
}

/// Gaussian factor of one mode with `u`- and `v`-frequencies `p` and `q`.
fn mode_gauss<T: Real>(basis: &ThetaBasis<T>, p: &[i64], q: &[i64]) -> Complex<T> {
    let g = basis.genus();
    let kf = T::lit(basis.k() as f64);
    let omega = basis.period_matrix();
    let y_inv = basis.y_inv();
    let pf: Vec<T> = p.iter().map(|v| T::lit(*v as f64)).collect();
    // w = q - conj(Omega) p
    let w: Vec<Complex<T>> = (0..g)
        .map(|i| {
            let mut acc = Complex::new(T::lit(q[i] as f64), T::zero());
            for j in 0..g {
                acc -= omega[(i, j)].conj() * pf[j];
            }
            acc
        })
        .collect();
    let mut wyw = Complex::<T>::default();
    let mut pop = Complex::<T>::default();
    for i in 0..g {
        for j in 0..g {
            wyw += w[i] * w[j] * y_inv[(i, j)];
            pop += omega[(i, j)].conj() * (pf[i] * pf[j]);
        }
    }
    let pi = T::pi();
    let expo = -(wyw * (pi / (T::lit(2.0) * kf))) - Complex::new(T::zero(), pi / kf) * pop;
    <Complex<T> as nalgebra::ComplexField>::exp(expo)
}

/// Calls `emit(a, b, value)` for the pairings `<e(m) s_b, s_a>` divided by
/// `G00`.
fn for_mode_entries<T: Real>(
    basis: &ThetaBasis<T>,
    tables: &ModeTables<T>,
    m: &[i32],
    mut emit: impl FnMut(usize, usize, Complex<T>),
) {
    let g = basis.genus();
    let k = basis.k() as i64;
    let (p, q) = basis.split_frequency(m);
    let gauss = mode_gauss(basis, &p, &q);
    for (b, bc) in tables.classes.chunks_exact(g).enumerate() {
        let a = bc
            .iter()
            .zip(&p)
            .fold(0usize, |acc, (x, y)| acc * k as usize + (x + y).rem_euclid(k) as usize);
        let qb: i64 = q.iter().zip(bc).map(|(x, y)| x * y).sum();
        emit(a, b, gauss * tables.roots[qb.rem_euclid(k) as usize]);
    }
}

/// Pairings `<e(m) s_b, s_a>` of one Fourier mode, divided by `G00`, as a
/// list of `(a, b, value)`.
pub fn mode_entries<T: Real>(basis: &ThetaBasis<T>, m: &[i32]) -> Vec<(usize, usize, Complex<T>)> {
    let mut out = Vec::with_capacity(basis.dim());
    for_mode_entries(basis, &ModeTables::new(basis), m, |a, b, v| out.push((a, b, v)));
    out
}

/// Matrix of pairings `M_ab = <f s_b, s_a>` over the canonical sections.
pub fn raw_matrix_exact<T: Real>(f: &FourierSymbol<T>, basis: &ThetaBasis<T>) -> Result<CMat<T>> {
    check_dim(f, basis)?;
    let n = basis.dim();
    let tables = ModeTables::new(basis);
    let mut m = CMat::zeros(n, n);
    for (freq, c) in f.iter() {
        for_mode_entries(basis, &tables, freq, |a, b, v| m[(a, b)] += c * v);
    }
    Ok(m * Complex::new(basis.gram_scale(), T::zero()))
}

/// `T_f` in the orthonormal frame, from the closed-form pairings.
pub fn toeplitz_matrix<T: Real>(f: &FourierSymbol<T>, basis: &ThetaBasis<T>) -> Result<DenseOperator<T>> {
    let raw = raw_matrix_exact(f, basis)?;
    Ok(DenseOperator::new(basis.compress(&raw))?.with_level(basis.k()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TorusGeometry;
    use crate::operator::max_abs;
    use crate::symbol::{preset, random_symbol};

    #[test]
    fn constant_symbol_gives_identity() {
        let g = TorusGeometry::<f64>::t4();
        for r in 1..=3 {
            let b = ThetaBasis::new(&g, r, 3).unwrap();
            let t = toeplitz_matrix(&FourierSymbol::one(4), &b).unwrap();
            assert!(max_abs(&(t.matrix - CMat::identity(9, 9))) < 1e-12);
        }
    }

    #[test]
    fn monomial_on_single_wrapped_diagonal() {
        let b = ThetaBasis::new(&TorusGeometry::<f64>::t2(), 1, 6).unwrap();
        let f = FourierSymbol::monomial(2, &[2, 1], Complex::new(1.0, 0.0)).unwrap();
        let t = toeplitz_matrix(&f, &b).unwrap().matrix;
        let want = (-std::f64::consts::PI * 5.0 / 12.0).exp();
        for a in 0..6 {
            for c in 0..6 {
                let v = t[(a, c)];
                if (a + 6 - c) % 6 == 2 {
                    assert!((v.norm() - want).abs() < 1e-13);
                } else {
                    assert_eq!(v.norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn real_symbols_give_hermitian_matrices() {
        let g = TorusGeometry::<f64>::t4();
        let f = random_symbol::<f64>(4, 4, 2, true).unwrap();
        for r in 1..=3 {
            let b = ThetaBasis::new(&g, r, 4).unwrap();
            assert!(toeplitz_matrix(&f, &b).unwrap().hermitian_defect() < 1e-13);
        }
    }

    #[test]
    fn norm_bounded_by_sup_norm() {
        let b = ThetaBasis::new(&TorusGeometry::<f64>::t2(), 1, 10).unwrap();
        let f = preset::<f64>("cos1*cos2", 2).unwrap();
        let t = toeplitz_matrix(&f, &b).unwrap();
        assert!(t.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn dimension_checked() {
        let b = ThetaBasis::new(&TorusGeometry::<f64>::t2(), 1, 2).unwrap();
        assert!(toeplitz_matrix(&FourierSymbol::one(4), &b).is_err());
    }
}
