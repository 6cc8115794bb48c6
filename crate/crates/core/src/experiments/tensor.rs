//! Tensor-product quantization `TT_f = T_{f;1} (x) T_{f;2} (x) T_{f;3}`:
//! residuals through structured operators, plus a dense path used as an
//! oracle at small levels.

use std::sync::Arc;

use num_complex::Complex;

use super::residuals::{Lab, Residual};
use super::TheoremId;
use crate::error::{Error, Result};
use crate::geometry::GeometryKind;
use crate::operator::{
    comm4_expand, commutator, dense_norm, gen_commutator, kron_dense, CMat, CommutatorMethod, KronSum, KronTerm,
    StructuredOperator,
};
use crate::scalar::Real;
use crate::symbol::FourierSymbol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TensorStatement {
    /// `(ik)^3 [T_{f;1},T_{g;1}] (x) [..;2] (x) [..;3]` against the triple of
    /// bracket quantizations.
    TripleComm,
    /// `ik [TT_f, TT_g]` against the three-term Leibniz expansion.
    Comm,
    /// `[TT_f, TT_g]` itself.
    CommSmall,
    /// `[TT_f1, ..., TT_f4]` itself.
    Gencomm,
    /// `-(k^6/8)` times the triple of 4-commutators against the triple of
    /// 4-bracket quantizations.
    Prop4,
    /// `-(k^2/2) [TT_f1, ..., TT_f4]` against the operator `W`.
    W,
}

impl TryFrom<TheoremId> for TensorStatement {
    type Error = Error;

    fn try_from(t: TheoremId) -> Result<Self> {
        Ok(match t {
            TheoremId::TensorTripleComm => Self::TripleComm,
            TheoremId::TensorComm => Self::Comm,
            TheoremId::TensorCommSmall => Self::CommSmall,
            TheoremId::TensorGencomm => Self::Gencomm,
            TheoremId::TensorProp4 => Self::Prop4,
            TheoremId::TensorW => Self::W,
            other => return Err(Error::Invalid(format!("{other} is not a tensor statement"))),
        })
    }
}

type Triple<T> = [Arc<CMat<T>>; 3];

/// A linear combination of Kronecker triples, kept as raw factors so that it
/// can be assembled either lazily or densely.
struct Terms<T: Real>(Vec<(Complex<T>, Triple<T>)>);

impl<T: Real> Terms<T> {
    fn structured(&self) -> Result<StructuredOperator<T>> {
        let first = &self.0.first().ok_or_else(|| Error::Invalid("empty term list".into()))?.1;
        let mut sum = KronSum::empty([first[0].nrows(), first[1].nrows(), first[2].nrows()]);
        for (c, [a, b, d]) in &self.0 {
            sum.push(KronTerm::new(*c, a.clone(), b.clone(), d.clone()))?;
        }
        Ok(StructuredOperator::Kron(sum))
    }

    /// `None` for an empty list.
    fn dense(&self) -> Option<CMat<T>> {
        let mut acc: Option<CMat<T>> = None;
        for (c, [a, b, d]) in &self.0 {
            let m = kron_dense(&kron_dense(a, b), d) * *c;
            acc = Some(match acc {
                Some(s) => s + m,
                None => m,
            });
        }
        acc
    }
}

/// The commutator part of a statement before its scalar prefactor.
enum Main<T: Real> {
    /// A single Kronecker triple of per-factor commutators.
    Factors([CMat<T>; 3]),
    /// Quantized triples `TT_f` whose 2- or 4-commutator is taken.
    Triples(Vec<Triple<T>>),
}

struct Parts<T: Real> {
    main: Main<T>,
    target: Terms<T>,
}

impl<T: Real> Parts<T> {
    fn structured(&self, pre: Complex<T>) -> Result<StructuredOperator<T>> {
        let kron = |t: &Triple<T>| Terms(vec![(one(), t.clone())]).structured();
        let main = match &self.main {
            Main::Factors([a, b, c]) => kron(&[Arc::new(a.clone()), Arc::new(b.clone()), Arc::new(c.clone())])?,
            Main::Triples(ts) => {
                let ts: Vec<_> = ts.iter().map(kron).collect::<Result<_>>()?;
                match ts.as_slice() {
                    [f, g] => f.commutator(g)?,
                    [a, b, c, d] => StructuredOperator::gen_commutator4([a, b, c, d])?,
                    _ => unreachable!("two or four triples"),
                }
            }
        }
        .scale(pre);
        if self.target.0.is_empty() {
            Ok(main)
        } else {
            main.add(self.target.structured()?)
        }
    }

    fn dense_main(&self) -> Result<CMat<T>> {
        let dense = |t: &Triple<T>| kron_dense(&kron_dense(&t[0], &t[1]), &t[2]);
        Ok(match &self.main {
            Main::Factors([a, b, c]) => kron_dense(&kron_dense(a, b), c),
            Main::Triples(ts) => {
                let ts: Vec<CMat<T>> = ts.iter().map(dense).collect();
                match ts.as_slice() {
                    [f, g] => commutator(f, g),
                    [a, b, c, d] => comm4_expand(a, b, c, d)?,
                    _ => unreachable!("two or four triples"),
                }
            }
        })
    }
}

fn one<T: Real>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

impl<T: Real> Lab<T> {
    /// `(T_{f;1}, T_{f;2}, T_{f;3})` at level `k`.
    fn quantized_triple(&self, f: &FourierSymbol<T>, k: u32) -> Result<Triple<T>> {
        let q = |r| self.toeplitz(f, GeometryKind::T4, r, k).map(Arc::new);
        Ok([q(1)?, q(2)?, q(3)?])
    }

    /// `T_{a;1} (x) T_{b;2} (x) T_{c;3}`.
    fn slots(&self, syms: [&FourierSymbol<T>; 3], k: u32) -> Result<Triple<T>> {
        let q = |r: usize| self.toeplitz(syms[r - 1], GeometryKind::T4, r, k).map(Arc::new);
        Ok([q(1)?, q(2)?, q(3)?])
    }

    fn check_tensor_args(&self, stmt: TensorStatement, fs: &[FourierSymbol<T>]) -> Result<()> {
        let need = match stmt {
            TensorStatement::TripleComm | TensorStatement::Comm | TensorStatement::CommSmall => 2,
            _ => 4,
        };
        if fs.len() != need {
            return Err(Error::ArityMismatch {
                expected: need,
                got: fs.len(),
            });
        }
        if let Some(f) = fs.iter().find(|f| f.dim() != 4) {
            return Err(Error::DimensionMismatch { left: 4, right: f.dim() });
        }
        Ok(())
    }

    /// Terms of the comparison operator, already negated, together with the
    /// scalar multiplying the commutator part.
    fn tensor_target(&self, stmt: TensorStatement, fs: &[FourierSymbol<T>], k: u32) -> Result<Terms<T>> {
        let g4 = &self.t4;
        let neg = -one::<T>();
        let mut out = Vec::new();
        match stmt {
            TensorStatement::CommSmall | TensorStatement::Gencomm => {}
            TensorStatement::TripleComm => {
                let b = |r| g4.poisson(&fs[0], &fs[1], r);
                out.push((neg, self.slots([&b(1)?, &b(2)?, &b(3)?], k)?));
            }
            TensorStatement::Comm => {
                let fg = fs[0].checked_mul(&fs[1])?;
                let b: Vec<_> = (1..=3).map(|r| g4.poisson(&fs[0], &fs[1], r)).collect::<Result<_>>()?;
                out.push((neg, self.slots([&b[0], &fg, &fg], k)?));
                out.push((neg, self.slots([&fg, &b[1], &fg], k)?));
                out.push((neg, self.slots([&fg, &fg, &b[2]], k)?));
            }
            TensorStatement::Prop4 => {
                let quad = [&fs[0], &fs[1], &fs[2], &fs[3]];
                let b: Vec<_> = (1..=3).map(|r| g4.bracket4_r(quad, r)).collect::<Result<_>>()?;
                out.push((neg, self.slots([&b[0], &b[1], &b[2]], k)?));
            }
            TensorStatement::W => {
                for (c, t) in self.w_terms(fs, k)? {
                    out.push((-c, t));
                }
            }
        }
        Ok(Terms(out))
    }

    /// The operator `W`: three diagonal terms, then for each pairing
    /// `(i,j | m,l)` with its sign, six terms distributing
    /// `X = f_i f_j {f_m, f_l}_r`, `Y = f_m f_l {f_i, f_j}_r` and
    /// `P = f_1 f_2 f_3 f_4` over the three factors (the bracket index `r`
    /// follows the factor).
    fn w_terms(&self, fs: &[FourierSymbol<T>], k: u32) -> Result<Vec<(Complex<T>, Triple<T>)>> {
        let g4 = &self.t4;
        let quad = [&fs[0], &fs[1], &fs[2], &fs[3]];
        let p = fs[0].checked_mul(&fs[1])?.checked_mul(&fs[2])?.checked_mul(&fs[3])?;
        let tp = self.quantized_triple(&p, k)?;
        let mut out = Vec::new();
        let b: Vec<_> = (1..=3).map(|r| g4.bracket4_r(quad, r)).collect::<Result<_>>()?;
        let tb: Vec<_> = (1..=3)
            .map(|r| self.toeplitz(&b[r - 1], GeometryKind::T4, r, k).map(Arc::new))
            .collect::<Result<_>>()?;
        out.push((one(), [tb[0].clone(), tp[1].clone(), tp[2].clone()]));
        out.push((one(), [tp[0].clone(), tb[1].clone(), tp[2].clone()]));
        out.push((one(), [tp[0].clone(), tp[1].clone(), tb[2].clone()]));
        for (i, j, m, l, s) in [(0, 1, 2, 3, 1.0), (0, 2, 1, 3, -1.0), (0, 3, 1, 2, 1.0)] {
            let fij = fs[i].checked_mul(&fs[j])?;
            let fml = fs[m].checked_mul(&fs[l])?;
            let mut tx = Vec::with_capacity(3);
            let mut ty = Vec::with_capacity(3);
            for r in 1..=3 {
                let x = fij.checked_mul(&g4.poisson(&fs[m], &fs[l], r)?)?;
                let y = fml.checked_mul(&g4.poisson(&fs[i], &fs[j], r)?)?;
                tx.push(Arc::new(self.toeplitz(&x, GeometryKind::T4, r, k)?));
                ty.push(Arc::new(self.toeplitz(&y, GeometryKind::T4, r, k)?));
            }
            let c = Complex::new(T::lit(s), T::zero());
            let (x, y, p) = (&tx, &ty, &tp);
            for t in [
                [&x[0], &y[1], &p[2]],
                [&x[0], &p[1], &y[2]],
                [&y[0], &x[1], &p[2]],
                [&y[0], &p[1], &x[2]],
                [&p[0], &x[1], &y[2]],
                [&p[0], &y[1], &x[2]],
            ] {
                out.push((c, t.map(|a| a.clone())));
            }
        }
        Ok(out)
    }

    fn tensor_prefactor(stmt: TensorStatement, k: u32, sign: f64) -> Complex<T> {
        let kk = T::lit(k as f64);
        let ik = Complex::new(T::zero(), T::lit(sign) * kk);
        match stmt {
            TensorStatement::TripleComm => ik * ik * ik,
            TensorStatement::Comm => ik,
            TensorStatement::CommSmall | TensorStatement::Gencomm => one(),
            TensorStatement::Prop4 => Complex::new(-T::lit((k as f64).powi(6) / 8.0), T::zero()),
            TensorStatement::W => Complex::new(-kk * kk / T::lit(2.0), T::zero()),
        }
    }

    /// Everything a statement needs at level `k`, computed once so that the
    /// structured and the dense assembly read the same inputs.
    fn tensor_parts(&self, stmt: TensorStatement, fs: &[FourierSymbol<T>], k: u32) -> Result<Parts<T>> {
        self.check_tensor_args(stmt, fs)?;
        let main = match stmt {
            TensorStatement::TripleComm | TensorStatement::Prop4 => Main::Factors(self.factor_commutators(stmt, fs, k)?),
            TensorStatement::Comm | TensorStatement::CommSmall => {
                Main::Triples(vec![self.quantized_triple(&fs[0], k)?, self.quantized_triple(&fs[1], k)?])
            }
            TensorStatement::Gencomm | TensorStatement::W => {
                Main::Triples(fs.iter().map(|f| self.quantized_triple(f, k)).collect::<Result<_>>()?)
            }
        };
        Ok(Parts {
            main,
            target: self.tensor_target(stmt, fs, k)?,
        })
    }

    /// The residual as a structured operator (never materialized).
    pub fn tensor_operator(
        &self,
        stmt: TensorStatement,
        fs: &[FourierSymbol<T>],
        k: u32,
        sign: f64,
    ) -> Result<StructuredOperator<T>> {
        self.tensor_parts(stmt, fs, k)?
            .structured(Self::tensor_prefactor(stmt, k, sign))
    }

    /// Per-factor commutators for the statements that are a single Kronecker
    /// triple of commutators.
    fn factor_commutators(&self, stmt: TensorStatement, fs: &[FourierSymbol<T>], k: u32) -> Result<[CMat<T>; 3]> {
        let mut out = Vec::with_capacity(3);
        for r in 1..=3 {
            let ts: Vec<CMat<T>> = fs
                .iter()
                .map(|f| self.toeplitz(f, GeometryKind::T4, r, k))
                .collect::<Result<_>>()?;
            out.push(if stmt == TensorStatement::TripleComm {
                commutator(&ts[0], &ts[1])
            } else {
                gen_commutator(&[&ts[0], &ts[1], &ts[2], &ts[3]], CommutatorMethod::Restricted)?
            });
        }
        Ok(out.try_into().expect("three factors"))
    }

    /// The residual materialized with plain dense algebra: Kronecker products
    /// formed explicitly, commutators by matrix products.
    pub fn tensor_dense(&self, stmt: TensorStatement, fs: &[FourierSymbol<T>], k: u32, sign: f64) -> Result<CMat<T>> {
        let parts = self.tensor_parts(stmt, fs, k)?;
        let main = parts.dense_main()? * Self::tensor_prefactor(stmt, k, sign);
        Ok(match parts.target.dense() {
            Some(t) => main + t,
            None => main,
        })
    }

    /// `|structured - dense|` for the residual norm, relative to `max(1, dense)`.
    pub fn tensor_oracle_defect(
        &self,
        stmt: TensorStatement,
        fs: &[FourierSymbol<T>],
        k: u32,
        sign: f64,
    ) -> Result<f64> {
        Ok(self.tensor_oracle_defects(stmt, fs, k, &[sign])?[0])
    }

    /// [`Self::tensor_oracle_defect`] for several sign conventions, sharing
    /// the quantizations and the dense products between them.
    pub fn tensor_oracle_defects(
        &self,
        stmt: TensorStatement,
        fs: &[FourierSymbol<T>],
        k: u32,
        signs: &[f64],
    ) -> Result<Vec<f64>> {
        let parts = self.tensor_parts(stmt, fs, k)?;
        let main = parts.dense_main()?;
        let target = parts.target.dense();
        signs
            .iter()
            .map(|&sign| {
                let pre = Self::tensor_prefactor(stmt, k, sign);
                let structured = Residual::structured(&parts.structured(pre)?, &self.norm)?.value;
                let m = &main * pre;
                let dense = dense_norm(&match &target {
                    Some(t) => m + t,
                    None => m,
                })
                .as_f64();
                Ok((structured - dense).abs() / dense.max(1.0))
            })
            .collect()
    }

    pub(crate) fn tensor_residual(
        &self,
        stmt: TensorStatement,
        fs: &[FourierSymbol<T>],
        k: u32,
        sign: f64,
    ) -> Result<Residual> {
        Residual::structured(&self.tensor_operator(stmt, fs, k, sign)?, &self.norm)
    }

}
