//! Level-`k` theta-function bases of holomorphic sections.
//!
//! In a symplectic frame `x = P (u, v)` with `omega = 2 pi sum du_i ^ dv_i`
//! and holomorphic coordinate `z = u + Omega v`, the sections are
//!
//! `s_j(z) = sum_{nu = j mod k} exp(pi i nu^T Omega nu / k + 2 pi i nu . z)`
//!
//! for `j` in `(Z/k)^g`. They are invariant under `u`-translations and pick up
//! `exp(-pi i k m^T Omega m - 2 pi i k m . z)` under `v -> v + m`; the weight
//! `phi_k = 2 pi k v^T Y v` (`Y = Im Omega`) makes `e^{-phi_k} |s|^2` periodic.

use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex;

use super::torus::{GeometryKind, TorusGeometry};
use crate::error::{Error, Result};
use crate::operator::{max_abs, CMat};
use crate::scalar::Real;

/// Terms whose Gaussian factor is below `exp(-THETA_CUTOFF)` of the peak are dropped.
pub const THETA_CUTOFF: f64 = 40.0;

#[derive(Clone, Debug)]
pub struct ThetaBasis<T: Real> {
    kind: GeometryKind,
    r: usize,
    k: u32,
    g: usize,
    form: DMatrix<T>,
    hol: DMatrix<T>,
    /// Signed permutation with `x = P w`, `w = (u, v)`.
    perm: DMatrix<T>,
    period: CMat<T>,
    y: DMatrix<T>,
    y_inv: DMatrix<T>,
    y_min: T,
    raw_transform: Option<CMat<T>>,
    gram: CMat<T>,
    transform: CMat<T>,
}

fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

/// Signed permutations `P` with `P^T A P = 2 pi [[0, I], [-I, 0]]`, in a
/// fixed (lexicographic) order.
fn symplectic_frames<T: Real>(a: &DMatrix<T>) -> Vec<DMatrix<T>> {
    let d = a.nrows();
    let g = d / 2;
    let mut target = DMatrix::<T>::zeros(d, d);
    for i in 0..g {
        target[(i, g + i)] = T::two_pi();
        target[(g + i, i)] = -T::two_pi();
    }
    let tol = T::lit(1e-9) * a.amax();
    let mut out = Vec::new();
    for perm in (0..d).permutations(d) {
        for signs in 0..(1u32 << d) {
            let mut p = DMatrix::<T>::zeros(d, d);
            for (c, &row) in perm.iter().enumerate() {
                p[(row, c)] = if signs & (1 << c) == 0 { T::one() } else { -T::one() };
            }
            if (p.transpose() * a * &p - &target).amax() <= tol {
                out.push(p);
            }
        }
    }
    out
}

/// Period matrix `Omega` such that `dz = du + Omega dv` spans the
/// `(1, 0)`-forms of the complex structure `hol_w` (given in `w` coordinates).
fn period_matrix<T: Real>(hol_w: &DMatrix<T>) -> Option<CMat<T>> {
    let d = hol_w.nrows();
    let g = d / 2;
    let half = T::lit(0.5);
    // columns span the +i eigenspace of hol_w^T
    let proj = CMat::<T>::from_fn(d, d, |i, j| {
        let id = if i == j { T::one() } else { T::zero() };
        cplx(id * half, -half * hol_w[(j, i)])
    });
    let mut chosen: Vec<nalgebra::DVector<Complex<T>>> = Vec::new();
    let mut ortho: Vec<nalgebra::DVector<Complex<T>>> = Vec::new();
    for c in 0..d {
        if chosen.len() == g {
            break;
        }
        let col = proj.column(c).into_owned();
        let mut res = col.clone();
        for q in &ortho {
            let coef = q.dotc(&res);
            res -= q * coef;
        }
        let n = res.norm();
        if n > T::lit(1e-8) {
            ortho.push(res / cplx(n, T::zero()));
            chosen.push(col);
        }
    }
    if chosen.len() != g {
        return None;
    }
    // rows of alpha are the chosen left eigenvectors
    let alpha = CMat::<T>::from_fn(g, d, |i, j| chosen[i][j]);
    let w1 = alpha.columns(0, g).into_owned();
    let w2 = alpha.columns(g, g).into_owned();
    let w1_inv = w1.try_inverse()?;
    Some(w1_inv * w2)
}

/// Smallest eigenvalue of a symmetric real matrix.
fn min_eigenvalue<T: Real>(m: &DMatrix<T>) -> T {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(T::max_value().unwrap_or(T::lit(f64::MAX)), |a, b| a.min(*b))
}

impl<T: Real> ThetaBasis<T> {
    /// Canonical basis for structure `r` at level `k`.
    pub fn new(geom: &TorusGeometry<T>, r: usize, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroLevel);
        }
        let form = geom.form(r)?.matrix().clone();
        let hol = geom.holomorphic_structure(r)?;
        for p in symplectic_frames(&form) {
            let hol_w = p.transpose() * &hol * &p;
            let Some(period) = period_matrix(&hol_w) else {
                continue;
            };
            if let Ok(basis) = Self::from_parts(geom, r, k, p, period) {
                return Ok(basis);
            }
        }
        Err(Error::UnsupportedPolarization)
    }

    /// Basis from a stored frame and period matrix; both are validated.
    pub fn from_parts(
        geom: &TorusGeometry<T>,
        r: usize,
        k: u32,
        perm: DMatrix<T>,
        period: CMat<T>,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroLevel);
        }
        let form = geom.form(r)?.matrix().clone();
        let hol = geom.holomorphic_structure(r)?;
        let d = geom.dim();
        let g = d / 2;
        if perm.nrows() != d || period.nrows() != g || period.ncols() != g {
            return Err(Error::UnsupportedPolarization);
        }
        let mut target = DMatrix::<T>::zeros(d, d);
        for i in 0..g {
            target[(i, g + i)] = T::two_pi();
            target[(g + i, i)] = -T::two_pi();
        }
        if (perm.transpose() * &form * &perm - target).amax() > T::lit(1e-9) * form.amax() {
            return Err(Error::UnsupportedPolarization);
        }
        if max_abs(&(&period - period.transpose())) > T::lit(1e-12) {
            return Err(Error::NonPositivePolarization);
        }
        // dz = du + Omega dv must be a (1,0)-form: alpha I' = i alpha
        let hol_w = perm.transpose() * &hol * &perm;
        let alpha = CMat::<T>::from_fn(g, d, |i, j| {
            if j < g {
                cplx(if i == j { T::one() } else { T::zero() }, T::zero())
            } else {
                period[(i, j - g)]
            }
        });
        let hol_c = hol_w.map(|v| cplx(v, T::zero()));
        if max_abs(&(&alpha * hol_c - &alpha * cplx(T::zero(), T::one()))) > T::lit(1e-10) {
            return Err(Error::NonPositivePolarization);
        }
        let y = period.map(|c| c.im);
        let y_min = min_eigenvalue(&y);
        if y_min <= T::zero() {
            return Err(Error::NonPositivePolarization);
        }
        let y_inv = y.clone().try_inverse().ok_or(Error::NonPositivePolarization)?;
        let mut basis = Self {
            kind: geom.kind(),
            r,
            k,
            g,
            form,
            hol,
            perm,
            period,
            y,
            y_inv,
            y_min,
            raw_transform: None,
            gram: CMat::zeros(0, 0),
            transform: CMat::zeros(0, 0),
        };
        let n = basis.dim();
        basis.gram = CMat::identity(n, n) * cplx(basis.gram_scale(), T::zero());
        basis.transform = inverse_cholesky(&basis.gram)?;
        Ok(basis)
    }

    /// Same space, raw sections replaced by `s'_i = sum_j R_ji s_j`.
    pub fn with_raw_transform(&self, r: CMat<T>) -> Result<Self> {
        let n = self.dim();
        if r.nrows() != n || r.ncols() != n {
            return Err(Error::SizeMismatch {
                left: n,
                right: r.nrows(),
            });
        }
        let base = CMat::identity(n, n) * cplx(self.gram_scale(), T::zero());
        let gram = r.adjoint() * base * &r;
        let transform = inverse_cholesky(&gram)?;
        Ok(Self {
            raw_transform: Some(r),
            gram,
            transform,
            ..self.clone()
        })
    }

    pub fn kind(&self) -> GeometryKind {
        self.kind
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Complex dimension of the torus.
    pub fn genus(&self) -> usize {
        self.g
    }

    /// Number of sections, `k^g`.
    pub fn dim(&self) -> usize {
        (self.k as usize).pow(self.g as u32)
    }

    pub fn period_matrix(&self) -> &CMat<T> {
        &self.period
    }

    pub fn frame(&self) -> &DMatrix<T> {
        &self.perm
    }

    pub fn gram(&self) -> &CMat<T> {
        &self.gram
    }

    /// `C` with `C^* G C = I`.
    pub fn transform(&self) -> &CMat<T> {
        &self.transform
    }

    pub fn raw_transform(&self) -> Option<&CMat<T>> {
        self.raw_transform.as_ref()
    }

    pub(crate) fn y_inv(&self) -> &DMatrix<T> {
        &self.y_inv
    }

    /// `<s_j, s_j> = (2k)^{-g/2} det(Y)^{-1/2}` for the canonical sections,
    /// which are mutually orthogonal.
    pub fn gram_scale(&self) -> T {
        let two_k = T::lit(2.0 * self.k as f64);
        T::one() / (two_k.powi(self.g as i32) * self.y.determinant()).sqrt()
    }

    /// Multi-index of section `j` (row-major).
    pub fn class(&self, j: usize) -> Vec<i64> {
        let k = self.k as usize;
        let mut out = vec![0; self.g];
        let mut rest = j;
        for i in (0..self.g).rev() {
            out[i] = (rest % k) as i64;
            rest /= k;
        }
        out
    }

    pub fn class_index(&self, nu: &[i64]) -> usize {
        let k = self.k as i64;
        nu.iter().fold(0usize, |acc, v| acc * k as usize + v.rem_euclid(k) as usize)
    }

    /// `(u, v)` coordinates of `x`.
    pub fn split(&self, x: &[T]) -> (Vec<T>, Vec<T>) {
        let d = 2 * self.g;
        let w: Vec<T> = (0..d)
            .map(|c| (0..d).fold(T::zero(), |acc, i| acc + self.perm[(i, c)] * x[i]))
            .collect();
        (w[..self.g].to_vec(), w[self.g..].to_vec())
    }

    /// Frequencies `(p, q)` in `(u, v)` coordinates of `exp(2 pi i m . x)`.
    pub fn split_frequency(&self, m: &[i32]) -> (Vec<i64>, Vec<i64>) {
        let d = 2 * self.g;
        let w: Vec<i64> = (0..d)
            .map(|c| {
                (0..d)
                    .map(|i| self.perm[(i, c)].as_f64().round() as i64 * m[i] as i64)
                    .sum()
            })
            .collect();
        (w[..self.g].to_vec(), w[self.g..].to_vec())
    }

    fn quad_y(&self, a: &[T], b: &[T]) -> T {
        let mut acc = T::zero();
        for i in 0..self.g {
            for j in 0..self.g {
                acc += a[i] * self.y[(i, j)] * b[j];
            }
        }
        acc
    }

    /// `phi_k(x) = 2 pi k v^T Y v`.
    pub fn phi(&self, x: &[T]) -> T {
        let (_, v) = self.split(x);
        T::two_pi() * T::lit(self.k as f64) * self.quad_y(&v, &v)
    }

    /// Lattice points `nu = class mod k` whose term survives the cutoff at `v`.
    pub(crate) fn lattice_terms(&self, class: &[i64], v: &[T]) -> Vec<Vec<i64>> {
        let k = self.k as i64;
        let kf = T::lit(self.k as f64);
        let radius = (T::lit(THETA_CUTOFF) * kf / (T::pi() * self.y_min)).sqrt();
        let ranges: Vec<Vec<i64>> = (0..self.g)
            .map(|i| {
                let c = -kf * v[i];
                let lo = (c - radius).floor().as_f64() as i64;
                let hi = (c + radius).ceil().as_f64() as i64;
                let start = lo + (class[i] - lo).rem_euclid(k);
                (start..=hi).step_by(k as usize).collect()
            })
            .collect();
        let cutoff = T::lit(THETA_CUTOFF);
        ranges
            .into_iter()
            .multi_cartesian_product()
            .filter(|nu| {
                let s: Vec<T> = (0..self.g).map(|i| T::lit(nu[i] as f64) + kf * v[i]).collect();
                T::pi() / kf * self.quad_y(&s, &s) <= cutoff
            })
            .collect()
    }

    /// Exponent of the `nu` term of the unitary section at `(u, v)`:
    /// `pi i nu Omega nu / k + 2 pi i nu . (u + Omega v) - pi k v Y v`.
    pub(crate) fn term_exponent(&self, nu: &[i64], u: &[T], v: &[T]) -> Complex<T> {
        let kf = T::lit(self.k as f64);
        let g = self.g;
        let nuf: Vec<T> = nu.iter().map(|x| T::lit(*x as f64)).collect();
        let mut quad = Complex::default();
        let mut lin = Complex::default();
        for i in 0..g {
            let mut z = cplx(u[i], T::zero());
            for j in 0..g {
                quad += self.period[(i, j)] * (nuf[i] * nuf[j]);
                z += self.period[(i, j)] * v[j];
            }
            lin += z * nuf[i];
        }
        let ipi = cplx(T::zero(), T::pi());
        ipi * quad / kf + ipi * lin * T::lit(2.0) - cplx(T::pi() * kf * self.quad_y(v, v), T::zero())
    }

    /// `s_j(x) e^{-phi_k(x)/2}` for the canonical section `j`.
    pub fn unitary_section(&self, j: usize, x: &[T]) -> Complex<T> {
        let (u, v) = self.split(x);
        let class = self.class(j);
        self.lattice_terms(&class, &v)
            .iter()
            .fold(Complex::default(), |acc, nu| {
                acc + ComplexExp::exp(self.term_exponent(nu, &u, &v))
            })
    }

    /// Canonical section `s_j(x)` (holomorphic representative).
    pub fn section(&self, j: usize, x: &[T]) -> Complex<T> {
        let half_phi = self.phi(x) / T::lit(2.0);
        self.unitary_section(j, x) * half_phi.exp()
    }

    /// Factor with `s(x + lambda) = multiplier(lambda, x) s(x)` for every section.
    pub fn multiplier(&self, lambda: &[i64], x: &[T]) -> Complex<T> {
        let lf: Vec<T> = lambda.iter().map(|v| T::lit(*v as f64)).collect();
        let (_, m) = self.split(&lf);
        let (u, v) = self.split(x);
        let kf = T::lit(self.k as f64);
        let mut quad = Complex::default();
        let mut lin = Complex::default();
        for i in 0..self.g {
            let mut z = cplx(u[i], T::zero());
            for j in 0..self.g {
                quad += self.period[(i, j)] * (m[i] * m[j]);
                z += self.period[(i, j)] * v[j];
            }
            lin += z * m[i];
        }
        let ipi = cplx(T::zero(), T::pi());
        ComplexExp::exp(-(ipi * quad * kf) - ipi * lin * (T::lit(2.0) * kf))
    }

    /// Largest entry of `1/2 (I^T H - H I) - k A`, relative to `k |A|`, with
    /// `H` the finite-difference Hessian of `phi_k` at `x` and `I` the
    /// holomorphic structure.
    pub fn curvature_defect(&self, x: &[T], h: T) -> T {
        let d = 2 * self.g;
        let mut hess = DMatrix::<T>::zeros(d, d);
        let shifted = |i: usize, si: T, j: usize, sj: T| {
            let mut y = x.to_vec();
            y[i] += si * h;
            y[j] += sj * h;
            self.phi(&y)
        };
        for i in 0..d {
            for j in 0..d {
                let one = T::one();
                hess[(i, j)] = (shifted(i, one, j, one) - shifted(i, one, j, -one)
                    - shifted(i, -one, j, one)
                    + shifted(i, -one, j, -one))
                    / (T::lit(4.0) * h * h);
            }
        }
        let half = T::lit(0.5);
        let curv = (self.hol.transpose() * &hess - &hess * &self.hol) * half;
        let target = &self.form * T::lit(self.k as f64);
        (curv - &target).amax() / target.amax()
    }

    /// Orthonormal-frame operator `C^* R^* M R C` from a matrix `M` of
    /// canonical-section pairings `M_ab = <f s_b, s_a>`.
    pub fn compress(&self, raw: &CMat<T>) -> CMat<T> {
        let inner = match &self.raw_transform {
            Some(r) => r.adjoint() * raw * r,
            None => raw.clone(),
        };
        self.transform.adjoint() * inner * &self.transform
    }

    /// Condition number and numerical rank of the Gram matrix.
    pub fn gram_spectrum(&self) -> (T, usize) {
        let eig = self.gram.clone().symmetric_eigen().eigenvalues;
        let max = eig.iter().fold(T::zero(), |a, b| a.max(*b));
        let min = eig.iter().fold(max, |a, b| a.min(*b));
        let rank = eig.iter().filter(|e| **e > T::lit(1e-10) * max).count();
        (max / min, rank)
    }
}

/// `exp` for complex numbers through `ComplexField`, which does not need `Float`.
trait ComplexExp {
    fn exp(self) -> Self;
}

impl<T: Real> ComplexExp for Complex<T> {
    fn exp(self) -> Self {
        <Complex<T> as nalgebra::ComplexField>::exp(self)
    }
}

/// `C = L^{-*}` for the Cholesky factor `G = L L^*`.
pub fn inverse_cholesky<T: Real>(gram: &CMat<T>) -> Result<CMat<T>> {
    let n = gram.nrows();
    let chol = nalgebra::Cholesky::new(gram.clone()).ok_or(Error::NonPositivePolarization)?;
    let l = chol.l();
    let l_inv = l
        .solve_lower_triangular(&CMat::identity(n, n))
        .ok_or(Error::NonPositivePolarization)?;
    Ok(l_inv.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t2() -> TorusGeometry<f64> {
        TorusGeometry::t2()
    }

    #[test]
    fn period_matrices_of_presets() {
        let b = ThetaBasis::new(&t2(), 1, 3).unwrap();
        assert!((b.period_matrix()[(0, 0)] - Complex::new(0.0, 1.0)).norm() < 1e-14);
        let g4 = TorusGeometry::<f64>::t4();
        for r in 1..=3 {
            let b = ThetaBasis::new(&g4, r, 2).unwrap();
            let want = CMat::<f64>::identity(2, 2) * Complex::new(0.0, 1.0);
            assert!(max_abs(&(b.period_matrix() - want)) < 1e-14, "r = {r}");
        }
    }

    #[test]
    fn dimensions() {
        assert_eq!(ThetaBasis::new(&t2(), 1, 1).unwrap().dim(), 1);
        assert_eq!(ThetaBasis::new(&t2(), 1, 8).unwrap().dim(), 8);
        let g4 = TorusGeometry::<f64>::t4();
        assert_eq!(ThetaBasis::new(&g4, 2, 3).unwrap().dim(), 9);
        assert!(matches!(ThetaBasis::new(&t2(), 1, 0), Err(Error::ZeroLevel)));
        assert!(matches!(ThetaBasis::new(&t2(), 2, 1), Err(Error::StructureIndex(2))));
    }

    #[test]
    fn quasi_periodicity_and_periodic_density() {
        let g4 = TorusGeometry::<f64>::t4();
        let x = [0.13, 0.71, 0.38, 0.52];
        for r in 1..=3 {
            let b = ThetaBasis::new(&g4, r, 3).unwrap();
            for lambda in [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, -1, 0], [0, 0, 0, 1], [1, -1, 1, 1]] {
                let shifted: Vec<f64> = x.iter().zip(&lambda).map(|(a, l)| a + *l as f64).collect();
                let mult = b.multiplier(&lambda, &x);
                for j in 0..b.dim() {
                    let lhs = b.section(j, &shifted);
                    let rhs = mult * b.section(j, &x);
                    assert!((lhs - rhs).norm() <= 1e-9 * rhs.norm().max(1e-300), "r {r} j {j}");
                    let d0 = b.unitary_section(j, &x).norm_sqr();
                    let d1 = b.unitary_section(j, &shifted).norm_sqr();
                    assert!((d0 - d1).abs() <= 1e-9 * d0.max(1e-12));
                }
            }
        }
    }

    #[test]
    fn curvature_matches_scaled_form() {
        let x2 = [0.3, 0.6];
        for k in [1, 4, 9] {
            let b = ThetaBasis::new(&t2(), 1, k).unwrap();
            assert!(b.curvature_defect(&x2, 1e-2) < 1e-6);
        }
        let g4 = TorusGeometry::<f64>::t4();
        for r in 1..=3 {
            let b = ThetaBasis::new(&g4, r, 5).unwrap();
            assert!(b.curvature_defect(&[0.1, 0.2, 0.7, 0.4], 1e-2) < 1e-6, "r {r}");
        }
    }

    #[test]
    fn inverse_cholesky_orthonormalizes() {
        let mut rng = crate::operator::seeded_rng(2);
        let a = crate::operator::random_matrix::<f64>(&mut rng, 5);
        let gram = a.adjoint() * &a + CMat::identity(5, 5);
        let c = inverse_cholesky(&gram).unwrap();
        let id = c.adjoint() * &gram * &c;
        assert!(max_abs(&(id - CMat::identity(5, 5))) < 1e-12);
        // triangular: C = L^{-*} is upper triangular
        assert!(c[(3, 1)].norm() == 0.0);
    }
}
