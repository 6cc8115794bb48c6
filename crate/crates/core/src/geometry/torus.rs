//! Flat model geometries: the square 2-torus and the hyperkähler 4-torus.
//!
//! Conventions: the flat metric is `g = 2 pi delta`, and each Kähler form is
//! `omega_r(u, v) = g(u, J_r v)`, i.e. its matrix is `A_r = 2 pi J_r`. With
//! this sign `omega_r(u, -J_r u) > 0`, so holomorphic sections are taken
//! with respect to `-J_r`.

use nalgebra::DMatrix;

use crate::brackets::{self, ConstantSymplecticForm, VolumeDensity};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::symbol::FourierSymbol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GeometryKind {
    T2,
    T4,
}

impl GeometryKind {
    pub fn name(self) -> &'static str {
        match self {
            GeometryKind::T2 => "t2",
            GeometryKind::T4 => "t4",
        }
    }
}

#[derive(Clone, Debug)]
pub struct TorusGeometry<T: Real> {
    kind: GeometryKind,
    structures: Vec<DMatrix<T>>,
    forms: Vec<ConstantSymplecticForm<T>>,
    volume: VolumeDensity<T>,
}

fn int_matrix<T: Real>(d: usize, rows: &[i32]) -> DMatrix<T> {
    DMatrix::from_row_iterator(d, d, rows.iter().map(|v| T::lit(*v as f64)))
}

impl<T: Real> TorusGeometry<T> {
    /// `R^2 / Z^2` with `omega = 2 pi dx ^ dy`.
    pub fn t2() -> Self {
        let j = int_matrix(2, &[0, 1, -1, 0]);
        let form = ConstantSymplecticForm::new(&j * T::two_pi()).expect("valid form");
        let volume = VolumeDensity::from_form(&form).expect("positive");
        Self {
            kind: GeometryKind::T2,
            structures: vec![j],
            forms: vec![form],
            volume,
        }
    }

    /// `R^4 / Z^4` with the quaternionic structures given by left
    /// multiplication by `i`, `j`, `k`, and forms
    /// `omega_1 = -dx12 - dx34`, `omega_2 = -dx13 + dx24`,
    /// `omega_3 = -dx14 - dx23`, each scaled by `2 pi`.
    pub fn t4() -> Self {
        #[rustfmt::skip]
        let mats: [[i32; 16]; 3] = [
            [0, -1, 0, 0,  1, 0, 0, 0,  0, 0, 0, -1,  0, 0, 1, 0],
            [0, 0, -1, 0,  0, 0, 0, 1,  1, 0, 0, 0,  0, -1, 0, 0],
            [0, 0, 0, -1,  0, 0, -1, 0,  0, 1, 0, 0,  1, 0, 0, 0],
        ];
        let structures: Vec<DMatrix<T>> = mats.iter().map(|m| int_matrix(4, m)).collect();
        let forms: Vec<_> = structures
            .iter()
            .map(|j| ConstantSymplecticForm::new(j * T::two_pi()).expect("valid form"))
            .collect();
        let volume = VolumeDensity::hyperkahler(&forms).expect("positive");
        Self {
            kind: GeometryKind::T4,
            structures,
            forms,
            volume,
        }
    }

    /// Preset by name: `t2`, `t4`, `t4-r1`, `t4-r2`, `t4-r3`. Returns the
    /// geometry and the selected structure index (1 when none is given).
    pub fn preset(name: &str) -> Result<(Self, usize)> {
        match name {
            "t2" => Ok((Self::t2(), 1)),
            "t4" => Ok((Self::t4(), 1)),
            _ => {
                let r = name
                    .strip_prefix("t4-r")
                    .and_then(|s| s.parse::<usize>().ok())
                    .ok_or_else(|| Error::Invalid(format!("unknown geometry '{name}'")))?;
                let g = Self::t4();
                g.check_r(r)?;
                Ok((g, r))
            }
        }
    }

    pub fn kind(&self) -> GeometryKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn dim(&self) -> usize {
        self.structures[0].nrows()
    }

    /// Number of complex structures (1 or 3).
    pub fn num_structures(&self) -> usize {
        self.structures.len()
    }

    pub fn check_r(&self, r: usize) -> Result<()> {
        if r == 0 || r > self.structures.len() {
            return Err(Error::StructureIndex(r));
        }
        Ok(())
    }

    /// `J_r` (1-based `r`).
    pub fn structure(&self, r: usize) -> Result<&DMatrix<T>> {
        self.check_r(r)?;
        Ok(&self.structures[r - 1])
    }

    /// Complex structure for which sections are holomorphic: `-J_r`.
    pub fn holomorphic_structure(&self, r: usize) -> Result<DMatrix<T>> {
        Ok(-self.structure(r)?.clone())
    }

    pub fn form(&self, r: usize) -> Result<&ConstantSymplecticForm<T>> {
        self.check_r(r)?;
        Ok(&self.forms[r - 1])
    }

    pub fn forms(&self) -> &[ConstantSymplecticForm<T>] {
        &self.forms
    }

    /// Volume form `Omega`: `omega` on `T^2`, `sum_r omega_r ^ omega_r` on `T^4`.
    pub fn volume(&self) -> &VolumeDensity<T> {
        &self.volume
    }

    /// `mu_r` with `Omega = (mu_r / 2) omega_r ^ omega_r` (or `mu omega` on `T^2`).
    pub fn mu(&self, r: usize) -> Result<T> {
        Ok(self.volume.mu(self.form(r)?))
    }

    fn check_symbols(&self, fs: &[&FourierSymbol<T>]) -> Result<()> {
        for f in fs {
            if f.dim() != self.dim() {
                return Err(Error::DimensionMismatch {
                    left: self.dim(),
                    right: f.dim(),
                });
            }
        }
        Ok(())
    }

    pub fn poisson(&self, f: &FourierSymbol<T>, g: &FourierSymbol<T>, r: usize) -> Result<FourierSymbol<T>> {
        brackets::poisson_bracket(f, g, self.form(r)?)
    }

    pub fn bracket4_r(
        &self,
        fs: [&FourierSymbol<T>; 4],
        r: usize,
    ) -> Result<FourierSymbol<T>> {
        if self.kind != GeometryKind::T4 {
            return Err(Error::UnsupportedDimension(self.dim()));
        }
        self.check_symbols(&fs)?;
        brackets::bracket4(fs[0], fs[1], fs[2], fs[3], self.form(r)?)
    }

    pub fn bracket4_hyp(&self, fs: [&FourierSymbol<T>; 4]) -> Result<FourierSymbol<T>> {
        if self.kind != GeometryKind::T4 {
            return Err(Error::UnsupportedDimension(self.dim()));
        }
        self.check_symbols(&fs)?;
        brackets::bracket4_hyp(fs[0], fs[1], fs[2], fs[3], &self.forms)
    }

    /// Nambu bracket of the volume form `Omega`.
    pub fn nambu(&self, fs: &[&FourierSymbol<T>]) -> Result<FourierSymbol<T>> {
        self.check_symbols(fs)?;
        brackets::nambu_bracket_det(fs, &self.volume)
    }

    /// Nambu bracket of `omega_r^n / n!`.
    pub fn nambu_of_form(&self, fs: &[&FourierSymbol<T>], r: usize) -> Result<FourierSymbol<T>> {
        self.check_symbols(fs)?;
        brackets::nambu_bracket_det(fs, &VolumeDensity::from_form(self.form(r)?)?)
    }

    /// Largest violation among the structural identities: `J_r^2 = -I`,
    /// `J_1 J_2 = J_3`, `A_r = 2 pi J_r`, integrality of `A_r / 2 pi`, and
    /// positivity of `omega_r(u, -J_r u)` on the coordinate vectors.
    pub fn invariant_defect(&self) -> T {
        let d = self.dim();
        let id = DMatrix::<T>::identity(d, d);
        let mut worst = T::zero();
        for (j, form) in self.structures.iter().zip(&self.forms) {
            worst = worst.max((j * j + &id).amax());
            let a = form.matrix() / T::two_pi();
            worst = worst.max((&a - j).amax());
            worst = worst.max(a.map(|v| (v - v.round()).abs()).max());
            let hol = -j;
            for i in 0..d {
                let e: Vec<T> = (0..d).map(|c| if c == i { T::one() } else { T::zero() }).collect();
                let je: Vec<T> = (0..d).map(|c| hol[(c, i)]).collect();
                let val = form.eval(&e, &je);
                if val <= T::zero() {
                    worst = worst.max(T::one() - val);
                }
            }
        }
        if self.structures.len() == 3 {
            let prod = &self.structures[0] * &self.structures[1];
            worst = worst.max((prod - &self.structures[2]).amax());
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::random_symbol;

    #[test]
    fn presets_satisfy_structural_identities() {
        assert_eq!(TorusGeometry::<f64>::t2().invariant_defect(), 0.0);
        assert_eq!(TorusGeometry::<f64>::t4().invariant_defect(), 0.0);
    }

    #[test]
    fn densities_on_the_four_torus() {
        let g = TorusGeometry::<f64>::t4();
        for r in 1..=3 {
            assert!((g.mu(r).unwrap() - 6.0).abs() < 1e-12);
        }
        let tau2 = std::f64::consts::TAU.powi(2);
        assert!((g.volume().rho - 6.0 * tau2).abs() < 1e-9);
        assert!(g.mu(4).is_err());
    }

    #[test]
    fn preset_names() {
        assert_eq!(TorusGeometry::<f64>::preset("t4-r3").unwrap().1, 3);
        assert_eq!(TorusGeometry::<f64>::preset("t2").unwrap().0.dim(), 2);
        assert!(TorusGeometry::<f64>::preset("t4-r4").is_err());
        assert!(TorusGeometry::<f64>::preset("t3").is_err());
    }

    #[test]
    fn example_scalings() {
        let g = TorusGeometry::<f64>::t4();
        let f: Vec<_> = (0..4).map(|s| random_symbol::<f64>(s, 4, 1, true).unwrap()).collect();
        let fs = [&f[0], &f[1], &f[2], &f[3]];
        let nambu = g.nambu(&fs).unwrap();
        let hyp = g.bracket4_hyp(fs).unwrap();
        for r in 1..=3 {
            let b = g.bracket4_r(fs, r).unwrap();
            assert!(b.rel_diff(&nambu.scale_real(6.0)) < 1e-10);
        }
        assert!(hyp.rel_diff(&nambu.scale_real(18.0)) < 1e-10);
    }
}
