//! Uniform-grid quadrature of the section pairings `<f s_b, s_a>`.
//!
//! The grid is uniform in `x`, hence in the frame coordinates `(u, v)`. The
//! sum over the `u` nodes is carried out exactly by discrete orthogonality
//! (frequencies are matched modulo the node count, so aliasing is kept), and
//! the `v` nodes are summed explicitly. The result equals the full `N_g^d`
//! trapezoidal sum at a fraction of the cost.

use num_complex::Complex;

use super::theta::ThetaBasis;
use super::toeplitz;
use crate::error::{Error, Result};
use crate::operator::{max_abs, CMat, DenseOperator};
use crate::scalar::Real;
use crate::symbol::FourierSymbol;

/// Uniform grid with `n` nodes per axis on `[0, 1)^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadratureGrid {
    pub n: usize,
}

/// Entries may move by at most this much when the grid is doubled.
pub const DOUBLING_TOL: f64 = 1e-8;

impl QuadratureGrid {
    /// `max(8k + 4 max_freq, 32)` nodes per axis.
    pub fn rule(k: u32, max_freq: u32) -> Self {
        Self {
            n: (8 * k as usize + 4 * max_freq as usize).max(32),
        }
    }

    pub fn doubled(self) -> Self {
        Self { n: 2 * self.n }
    }

    pub fn weight(self, dim: usize) -> f64 {
        (self.n as f64).powi(-(dim as i32))
    }
}

fn flatten(res: &[i64], n: usize) -> usize {
    res.iter()
        .fold(0usize, |acc, v| acc * n + v.rem_euclid(n as i64) as usize)
}

/// Pairings of the canonical sections by quadrature on `grid`.
pub fn raw_matrix_quadrature<T: Real>(
    f: &FourierSymbol<T>,
    basis: &ThetaBasis<T>,
    grid: QuadratureGrid,
) -> Result<CMat<T>> {
    if f.dim() != 2 * basis.genus() {
        return Err(Error::DimensionMismatch {
            left: 2 * basis.genus(),
            right: f.dim(),
        });
    }
    let g = basis.genus();
    let n = grid.n;
    let dim = basis.dim();
    // group the symbol by u-frequency: f = sum_p e(p.u) h_p(v)
    let mut by_p: Vec<(Vec<i64>, Vec<(Vec<i64>, Complex<T>)>)> = Vec::new();
    for (m, c) in f.iter() {
        let (p, q) = basis.split_frequency(m);
        match by_p.iter_mut().find(|(pp, _)| *pp == p) {
            Some((_, list)) => list.push((q, c)),
            None => by_p.push((p, vec![(q, c)])),
        }
    }
    let v_nodes = n.pow(g as u32);
    let cells = n.pow(g as u32);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); cells];
    let mut touched: Vec<usize> = Vec::new();
    let mut raw = CMat::<T>::zeros(dim, dim);
    let zeros_u = vec![T::zero(); g];
    for node in 0..v_nodes {
        let mut v = vec![T::zero(); g];
        let mut rest = node;
        for i in (0..g).rev() {
            v[i] = T::lit((rest % n) as f64 / n as f64);
            rest /= n;
        }
        // coefficients of the unitary sections in e(nu . u)
        let mut terms: Vec<(Vec<i64>, usize, Complex<T>)> = Vec::new();
        for j in 0..dim {
            let class = basis.class(j);
            for nu in basis.lattice_terms(&class, &v) {
                let e = basis.term_exponent(&nu, &zeros_u, &v);
                terms.push((nu, j, <Complex<T> as nalgebra::ComplexField>::exp(e)));
            }
        }
        for &c in &touched {
            buckets[c].clear();
        }
        touched.clear();
        let residues: Vec<i64> = terms
            .iter()
            .flat_map(|(nu, _, _)| nu.iter().map(|x| x.rem_euclid(n as i64)))
            .collect();
        for (idx, (nu, _, _)) in terms.iter().enumerate() {
            let c = flatten(nu, n);
            if buckets[c].is_empty() {
                touched.push(c);
            }
            buckets[c].push(idx);
        }
        for (p, list) in &by_p {
            let mut h = Complex::<T>::default();
            for (q, c) in list {
                let phase: f64 = q
                    .iter()
                    .zip(&v)
                    .map(|(qi, vi)| *qi as f64 * vi.as_f64())
                    .sum::<f64>()
                    .rem_euclid(1.0);
                let (s, co) = (T::two_pi() * T::lit(phase)).sin_cos();
                h += *c * Complex::new(co, s);
            }
            for (t, (_, b, psi_b)) in terms.iter().enumerate() {
                let target = residues[t * g..(t + 1) * g]
                    .iter()
                    .zip(p)
                    .fold(0usize, |acc, (x, y)| acc * n + (x + y).rem_euclid(n as i64) as usize);
                for &idx in &buckets[target] {
                    let (_, a, psi_a) = &terms[idx];
                    raw[(*a, *b)] += h * *psi_b * psi_a.conj();
                }
            }
        }
    }
    let w = T::lit((v_nodes as f64).recip());
    Ok(raw * Complex::new(w, T::zero()))
}

/// Brute-force pairings: unitary sections evaluated at every grid node.
/// Cost grows like `N_g^d`; intended as an oracle for small cases.
pub fn raw_matrix_direct<T: Real>(
    f: &FourierSymbol<T>,
    basis: &ThetaBasis<T>,
    grid: QuadratureGrid,
) -> Result<CMat<T>> {
    let d = f.dim();
    if d != 2 * basis.genus() {
        return Err(Error::DimensionMismatch {
            left: 2 * basis.genus(),
            right: d,
        });
    }
    let n = grid.n;
    let dim = basis.dim();
    let values = f.eval_grid(n);
    let mut raw = CMat::<T>::zeros(dim, dim);
    let mut psi = vec![Complex::<T>::default(); dim];
    for (node, fv) in values.iter().enumerate() {
        let mut x = vec![T::zero(); d];
        let mut rest = node;
        for i in (0..d).rev() {
            x[i] = T::lit((rest % n) as f64 / n as f64);
            rest /= n;
        }
        for (j, slot) in psi.iter_mut().enumerate() {
            *slot = basis.unitary_section(j, &x);
        }
        for a in 0..dim {
            for b in 0..dim {
                raw[(a, b)] += *fv * psi[b] * psi[a].conj();
            }
        }
    }
    Ok(raw * Complex::new(T::lit(grid.weight(d)), T::zero()))
}

/// `T_f` from quadrature on `grid`, accepted only if doubling the grid moves
/// no entry by more than [`DOUBLING_TOL`].
pub fn toeplitz_quadrature<T: Real>(
    f: &FourierSymbol<T>,
    basis: &ThetaBasis<T>,
    grid: QuadratureGrid,
) -> Result<DenseOperator<T>> {
    let coarse = basis.compress(&raw_matrix_quadrature(f, basis, grid)?);
    let fine = basis.compress(&raw_matrix_quadrature(f, basis, grid.doubled())?);
    let change = max_abs(&(&fine - &coarse)).as_f64();
    if change > DOUBLING_TOL {
        return Err(Error::GridTooCoarse { change });
    }
    Ok(DenseOperator::new(coarse)?.with_level(basis.k()))
}

/// Largest entry change of `T_f` when the grid is doubled.
pub fn doubling_change<T: Real>(f: &FourierSymbol<T>, basis: &ThetaBasis<T>, grid: QuadratureGrid) -> Result<f64> {
    let coarse = basis.compress(&raw_matrix_quadrature(f, basis, grid)?);
    let fine = basis.compress(&raw_matrix_quadrature(f, basis, grid.doubled())?);
    Ok(max_abs(&(fine - coarse)).as_f64())
}

/// Largest entry difference between quadrature and closed form.
pub fn closed_form_defect<T: Real>(f: &FourierSymbol<T>, basis: &ThetaBasis<T>, grid: QuadratureGrid) -> Result<f64> {
    let quad = basis.compress(&raw_matrix_quadrature(f, basis, grid)?);
    let exact = toeplitz::toeplitz_matrix(f, basis)?.matrix;
    Ok(max_abs(&(quad - exact)).as_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TorusGeometry;
    use crate::symbol::random_symbol;

    #[test]
    fn semi_separable_matches_brute_force() {
        let b = ThetaBasis::new(&TorusGeometry::<f64>::t2(), 1, 5).unwrap();
        let f = random_symbol::<f64>(2, 2, 2, false).unwrap();
        let grid = QuadratureGrid { n: 20 };
        let fast = raw_matrix_quadrature(&f, &b, grid).unwrap();
        let slow = raw_matrix_direct(&f, &b, grid).unwrap();
        assert!(max_abs(&(fast - slow)) < 1e-13);
    }

    #[test]
    fn semi_separable_matches_brute_force_on_four_torus() {
        let g = TorusGeometry::<f64>::t4();
        let f = random_symbol::<f64>(3, 4, 1, true).unwrap();
        let grid = QuadratureGrid { n: 12 };
        for r in 1..=3 {
            let b = ThetaBasis::new(&g, r, 2).unwrap();
            let fast = raw_matrix_quadrature(&f, &b, grid).unwrap();
            let slow = raw_matrix_direct(&f, &b, grid).unwrap();
            assert!(max_abs(&(fast - slow)) < 1e-13, "r {r}");
        }
    }

    #[test]
    fn quadrature_agrees_with_closed_form() {
        let f2 = random_symbol::<f64>(5, 2, 2, false).unwrap();
        for k in [1, 3, 8] {
            let b = ThetaBasis::new(&TorusGeometry::<f64>::t2(), 1, k).unwrap();
            let grid = QuadratureGrid::rule(k, 2);
            assert!(closed_form_defect(&f2, &b, grid).unwrap() < 1e-12, "k {k}");
        }
        let g = TorusGeometry::<f64>::t4();
        let f4 = random_symbol::<f64>(6, 4, 2, false).unwrap();
        for r in 1..=3 {
            let b = ThetaBasis::new(&g, r, 3).unwrap();
            let grid = QuadratureGrid::rule(3, 2);
            assert!(closed_form_defect(&f4, &b, grid).unwrap() < 1e-12, "r {r}");
        }
    }

    #[test]
    fn too_coarse_grid_detected() {
        let b = ThetaBasis::new(&TorusGeometry::<f64>::t2(), 1, 8).unwrap();
        let f = random_symbol::<f64>(7, 2, 2, true).unwrap();
        assert!(matches!(
            toeplitz_quadrature(&f, &b, QuadratureGrid { n: 3 }),
            Err(Error::GridTooCoarse { .. })
        ));
        assert!(toeplitz_quadrature(&f, &b, QuadratureGrid::rule(8, 2)).is_ok());
    }
}
