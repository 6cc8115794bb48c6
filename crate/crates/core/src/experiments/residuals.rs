//! Residual norms of the individual statements at one level `k`.

use std::sync::Arc;

use num_complex::Complex;

use super::{Setting, TheoremId};
use crate::error::{Error, Result};
use crate::geometry::{quantize, BasisCache, GeometryKind, TorusGeometry};
use crate::operator::{
    commutator, dense_norm, gen_commutator, hilbert_schmidt, matmul, op_norm, CMat, CommutatorMethod, NormOptions,
    StructuredOperator,
};
use crate::scalar::Real;
use crate::symbol::{sup_norm, FourierSymbol};

/// Constant in `-c k^2 [T_f, T_g, T_h, T_t] ~ T_{{f,g,h,t}_hyp}` on the flat
/// hyperkähler torus: `mu_r = 6` and `{.}_hyp = 18 {.}` force `c = 3/2`.
pub const DIM4_C: f64 = 1.5;

/// One residual evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residual {
    /// Operator norm of the residual.
    pub value: f64,
    /// Hilbert-Schmidt norm, when the residual was materialized.
    pub hs: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Statement-specific side value (the upper gap `||T_f|| - |f|_inf` for
    /// the norm bound).
    pub aux: Option<f64>,
}

impl Residual {
    fn dense<T: Real>(m: &CMat<T>) -> Self {
        Self {
            value: dense_norm(m).as_f64(),
            hs: Some(hilbert_schmidt(m).as_f64()),
            converged: true,
            iterations: 0,
            aux: None,
        }
    }

    /// Block-diagonal residual: operator norm is the largest block norm.
    fn blocks<T: Real>(blocks: &[CMat<T>]) -> Self {
        let op = StructuredOperator::DirectSum(blocks.iter().cloned().map(Arc::new).collect());
        let value = op_norm(&op, &NormOptions::default())
            .expect("direct sums need no iteration")
            .value;
        let hs = blocks
            .iter()
            .map(|b| hilbert_schmidt(b).as_f64().powi(2))
            .sum::<f64>()
            .sqrt();
        Self {
            value,
            hs: Some(hs),
            converged: true,
            iterations: 0,
            aux: None,
        }
    }

    pub(crate) fn structured<T: Real>(op: &StructuredOperator<T>, opts: &NormOptions) -> Result<Self> {
        let (value, iterations, converged) = match op_norm(op, opts) {
            Ok(e) => (e.value, e.iterations, e.converged),
            Err(Error::NoConvergence { iterations, estimate }) => (estimate, iterations, false),
            Err(e) => return Err(e),
        };
        Ok(Self {
            value,
            hs: None,
            converged,
            iterations,
            aux: None,
        })
    }
}

/// Geometries, basis cache and norm settings shared by all residuals.
#[derive(Debug)]
pub struct Lab<T: Real> {
    pub t2: TorusGeometry<T>,
    pub t4: TorusGeometry<T>,
    pub cache: BasisCache<T>,
    pub norm: NormOptions,
    /// Constant used by the `dim4_hyp` residual.
    pub dim4_c: f64,
}

impl<T: Real> Lab<T> {
    pub fn new(cache: BasisCache<T>, norm: NormOptions) -> Self {
        Self {
            t2: TorusGeometry::t2(),
            t4: TorusGeometry::t4(),
            cache,
            norm,
            dim4_c: DIM4_C,
        }
    }

    pub fn geometry(&self, kind: GeometryKind) -> &TorusGeometry<T> {
        match kind {
            GeometryKind::T2 => &self.t2,
            GeometryKind::T4 => &self.t4,
        }
    }

    /// `T_{f;r}` at level `k` on the geometry of `kind`.
    pub fn toeplitz(&self, f: &FourierSymbol<T>, kind: GeometryKind, r: usize, k: u32) -> Result<CMat<T>> {
        Ok(quantize(f, self.geometry(kind), r, k, &self.cache)?.matrix)
    }

    fn toeplitz_all(&self, fs: &[&FourierSymbol<T>], kind: GeometryKind, r: usize, k: u32) -> Result<Vec<CMat<T>>> {
        fs.iter().map(|f| self.toeplitz(f, kind, r, k)).collect()
    }

    /// `[T_{f1;r}, ..., T_{f4;r}]`.
    fn gen4(&self, fs: &[&FourierSymbol<T>], r: usize, k: u32) -> Result<CMat<T>> {
        let ts = self.toeplitz_all(fs, GeometryKind::T4, r, k)?;
        gen_commutator(&[&ts[0], &ts[1], &ts[2], &ts[3]], CommutatorMethod::Restricted)
    }

    /// Residual of `theorem` in `setting` on the symbols `fs` at level `k`.
    /// `sign` selects the convention `ik -> sign * ik` for statements with an
    /// odd power of `ik`.
    pub fn residual(
        &self,
        theorem: TheoremId,
        setting: Setting,
        fs: &[FourierSymbol<T>],
        k: u32,
        sign: f64,
    ) -> Result<Residual> {
        use TheoremId::*;
        if k == 0 {
            return Err(Error::ZeroLevel);
        }
        if !theorem.accepts(setting) {
            return Err(Error::Invalid(format!("{theorem} is not defined on {}", setting.label())));
        }
        if fs.len() != theorem.arity() {
            return Err(Error::ArityMismatch {
                expected: theorem.arity(),
                got: fs.len(),
            });
        }
        let geom = self.geometry(setting.geometry);
        for f in fs {
            if f.dim() != geom.dim() {
                return Err(Error::DimensionMismatch {
                    left: geom.dim(),
                    right: f.dim(),
                });
            }
        }
        let refs: Vec<&FourierSymbol<T>> = fs.iter().collect();
        let (kind, r) = (setting.geometry, setting.r);
        let kk = T::lit(k as f64);
        let c = |v: T| Complex::new(v, T::zero());
        let ik = Complex::new(T::zero(), T::lit(sign) * kk);
        let half_k2 = c(-kk * kk / T::lit(2.0));
        match theorem {
            BtCommutator | VolformN1 => {
                let t = self.toeplitz_all(&refs, kind, r, k)?;
                let bracket = if theorem == BtCommutator {
                    geom.poisson(&fs[0], &fs[1], r)?
                } else {
                    geom.nambu(&refs)?
                };
                let target = self.toeplitz(&bracket, kind, r, k)?;
                Ok(Residual::dense(&(commutator(&t[0], &t[1]) * ik - target)))
            }
            BtCommutatorSmall | NambuCommuteN1 => {
                let t = self.toeplitz_all(&refs, kind, r, k)?;
                Ok(Residual::dense(&commutator(&t[0], &t[1])))
            }
            BtProduct => {
                let t = self.toeplitz_all(&refs, kind, r, k)?;
                let fg = fs[0].checked_mul(&fs[1])?;
                Ok(Residual::dense(&(matmul(&t[0], &t[1]) - self.toeplitz(&fg, kind, r, k)?)))
            }
            BtNormLower => {
                let t = self.toeplitz(&fs[0], kind, r, k)?;
                let norm = dense_norm(&t).as_f64();
                let sup = sup_norm(&fs[0], 4 * (fs[0].max_freq() as usize + 1));
                let gap = sup.value.as_f64() - norm;
                Ok(Residual {
                    value: gap.max(0.0),
                    hs: None,
                    converged: sup.converged,
                    iterations: 0,
                    aux: Some(-gap),
                })
            }
            VolformN2 => {
                // (ik)^2 / 2! = -k^2 / 2
                let g = self.gen4(&refs, 1, k)?;
                let target = self.toeplitz(&geom.nambu_of_form(&refs, 1)?, kind, 1, k)?;
                Ok(Residual::dense(&(g * half_k2 - target)))
            }
            NambuCommuteN2 => Ok(Residual::dense(&self.gen4(&refs, 1, k)?)),
            HypFourfn => {
                let g = self.gen4(&refs, r, k)?;
                let b = geom.bracket4_r([&fs[0], &fs[1], &fs[2], &fs[3]], r)?;
                Ok(Residual::dense(&(g * half_k2 - self.toeplitz(&b, kind, r, k)?)))
            }
            Directsum | DirectsumCommute | Dim4Mu | Dim4Hyp => {
                let quad = [&fs[0], &fs[1], &fs[2], &fs[3]];
                let mut blocks = Vec::with_capacity(3);
                for r in 1..=3 {
                    let g = self.gen4(&refs, r, k)?;
                    blocks.push(match theorem {
                        DirectsumCommute => g,
                        Directsum => g * half_k2 - self.toeplitz(&geom.bracket4_r(quad, r)?, kind, r, k)?,
                        Dim4Mu => {
                            let nambu = self.toeplitz(&geom.nambu(&refs)?, kind, r, k)?;
                            let mu = FourierSymbol::constant(4, c(geom.mu(r)?));
                            g * half_k2 - matmul(&nambu, &self.toeplitz(&mu, kind, r, k)?)
                        }
                        _ => {
                            let hyp = self.toeplitz(&geom.bracket4_hyp(quad)?, kind, r, k)?;
                            g * c(-T::lit(self.dim4_c) * kk * kk) - hyp
                        }
                    });
                }
                Ok(Residual::blocks(&blocks))
            }
            _ => self.tensor_residual(theorem.try_into()?, fs, k, sign),
        }
    }

    /// The `c` minimizing `|| -c k^2 [TT_f, ...] - TT_{hyp} ||` at level `k`
    /// (the residual is convex in `c`, so a golden-section search suffices).
    pub fn best_dim4_c(&self, fs: &[FourierSymbol<T>], k: u32) -> Result<f64> {
        if fs.len() != 4 {
            return Err(Error::ArityMismatch { expected: 4, got: fs.len() });
        }
        let refs: Vec<&FourierSymbol<T>> = fs.iter().collect();
        let quad = [&fs[0], &fs[1], &fs[2], &fs[3]];
        let kk = k as f64;
        let mut pairs = Vec::with_capacity(3);
        for r in 1..=3 {
            let g = self.gen4(&refs, r, k)?;
            let hyp = self.toeplitz(&self.t4.bracket4_hyp(quad)?, GeometryKind::T4, r, k)?;
            pairs.push((g, hyp));
        }
        let eval = |cv: f64| {
            let s = Complex::new(T::lit(-cv * kk * kk), T::zero());
            pairs
                .iter()
                .map(|(g, h)| dense_norm(&(g * s - h)).as_f64())
                .fold(0.0, f64::max)
        };
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (0.0f64, 10.0f64);
        let mut x1 = b - phi * (b - a);
        let mut x2 = a + phi * (b - a);
        let (mut f1, mut f2) = (eval(x1), eval(x2));
        while b - a > 1e-6 {
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - phi * (b - a);
                f1 = eval(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + phi * (b - a);
                f2 = eval(x2);
            }
        }
        Ok(0.5 * (a + b))
    }
}
