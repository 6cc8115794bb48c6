//! Exact identity suites: operator identities on random matrices and
//! bracket identities on random symbols.

use std::fmt;
use std::sync::Arc;

use nambu_core::brackets::{self, VolumeDensity};
use nambu_core::geometry::TorusGeometry;
use nambu_core::operator::{
    commutator, comm4_expand, gen_commutator, kron_commutator, kron_product, max_abs, random_matrix,
    seeded_rng, CommutatorMethod, KronSum, KronTerm, StructuredOperator,
};
use nambu_core::symbol::random_symbol;
use nambu_core::{Matrix, Result, Symbol};
use num_complex::Complex64;
use rand::Rng;

/// Deliberate defects used as negative controls for the suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Negate the restricted-factorization commutator.
    SignFlip,
}

impl std::str::FromStr for Fault {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sign-flip" => Ok(Fault::SignFlip),
            _ => Err(format!("unknown fault '{s}' (expected sign-flip)")),
        }
    }
}

/// Worst relative error seen for one identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(name: &str, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            cases: 0,
            max_error: 0.0,
            tolerance,
        }
    }

    fn record(&mut self, err: f64) {
        self.cases += 1;
        // NaN must count as a violation
        if err.is_nan() || err > self.max_error {
            self.max_error = if err.is_nan() { f64::INFINITY } else { err };
        }
    }

    pub fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<4} {:<34} cases={:<4} max_rel_err={:.3e} (tol {:.0e})",
            if self.passed() { "ok" } else { "FAIL" },
            self.name,
            self.cases,
            self.max_error,
            self.tolerance
        )
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(Check::passed)
}

fn rel(a: &Matrix, b: &Matrix) -> f64 {
    let scale = max_abs(a).max(max_abs(b)).max(f64::MIN_POSITIVE);
    max_abs(&(a - b)) / scale
}

/// Error relative to `prod ||A_i||_F`, which bounds every entry of every
/// product in a generalized commutator. The commutator itself can vanish
/// identically (degree `2n` on `n x n` matrices), so its own size is no scale.
fn rel_products(a: &Matrix, b: &Matrix, ops: &[&Matrix]) -> f64 {
    let scale: f64 = ops.iter().map(|m| m.norm()).product();
    max_abs(&(a - b)) / scale.max(max_abs(a)).max(max_abs(b)).max(f64::MIN_POSITIVE)
}

fn sym_rel(a: &Symbol, b: &Symbol) -> f64 {
    let scale = a.max_coeff().max(b.max_coeff()).max(1.0);
    a.max_abs_diff(b) / scale
}

pub const IDENTITY_TOL: f64 = 1e-10;
pub const BRACKET_TOL: f64 = 1e-9;

/// Generalized-commutator factorizations, the six-product 4-bracket
/// expansion and the tensor commutator identity on `trials` random tuples
/// with sizes cycling through 2..=6.
pub fn operator_identities(seed: u64, trials: usize, fault: Option<Fault>) -> Result<Vec<Check>> {
    let mut restricted = Check::new("restricted == direct", IDENTITY_TOL);
    let mut halved = Check::new("halved == direct", IDENTITY_TOL);
    let mut expand = Check::new("comm4 expansion == direct", IDENTITY_TOL);
    let mut kron_comm = Check::new("tensor commutator identity", IDENTITY_TOL);
    let mut kron_prod = Check::new("kronecker product", IDENTITY_TOL);
    let mut lazy4 = Check::new("lazy 4-commutator of triples", IDENTITY_TOL);
    for t in 0..trials {
        let mut rng = seeded_rng(seed.wrapping_mul(0x1_0000).wrapping_add(t as u64));
        let n = 2 + t % 5;
        let mats: Vec<Matrix> = (0..6).map(|_| random_matrix(&mut rng, n)).collect();
        for arity in [2, 4, 6] {
            let ops: Vec<&Matrix> = mats[..arity].iter().collect();
            let d = gen_commutator(&ops, CommutatorMethod::Direct)?;
            let mut r = gen_commutator(&ops, CommutatorMethod::Restricted)?;
            if fault == Some(Fault::SignFlip) {
                r = -r;
            }
            restricted.record(rel_products(&r, &d, &ops));
            halved.record(rel_products(&gen_commutator(&ops, CommutatorMethod::Halved)?, &d, &ops));
            if arity == 4 {
                expand.record(rel_products(&comm4_expand(ops[0], ops[1], ops[2], ops[3])?, &d, &ops));
            }
        }
        // Kronecker identities on factors of mixed sizes
        let sizes = [2 + t % 5, 2 + (t + 1) % 5, 2 + (t + 3) % 5];
        let triple = |rng: &mut _| -> Result<KronSum<f64>> {
            let c = Complex64::new(rng_coeff(rng), rng_coeff(rng));
            KronSum::single(KronTerm::new(
                c,
                Arc::new(random_matrix(rng, sizes[0])),
                Arc::new(random_matrix(rng, sizes[1])),
                Arc::new(random_matrix(rng, sizes[2])),
            ))
        };
        let x = triple(&mut rng)?;
        let y = triple(&mut rng)?;
        let (dx, dy) = (x.to_dense(), y.to_dense());
        kron_comm.record(rel(&kron_commutator(&x, &y)?.to_dense(), &commutator(&dx, &dy)));
        let xy = x.add(&triple(&mut rng)?)?;
        kron_prod.record(rel(&kron_product(&xy, &y)?.to_dense(), &(xy.to_dense() * &dy)));
        if sizes.iter().product::<usize>() <= 64 {
            let ops: Vec<StructuredOperator<f64>> = (0..4)
                .map(|_| triple(&mut rng).map(StructuredOperator::Kron))
                .collect::<Result<_>>()?;
            let lazy = StructuredOperator::gen_commutator4([&ops[0], &ops[1], &ops[2], &ops[3]])?;
            let dense: Vec<Matrix> = ops.iter().map(|o| o.to_dense()).collect();
            let refs: Vec<&Matrix> = dense.iter().collect();
            let want = gen_commutator(&refs, CommutatorMethod::Direct)?;
            lazy4.record(rel_products(&apply_columns(&lazy), &want, &refs));
        }
    }
    Ok(vec![restricted, halved, expand, kron_comm, kron_prod, lazy4])
}

fn rng_coeff(rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    rng.random::<f64>() * 2.0 - 1.0
}

/// Materializes a structured operator column by column through its matvec.
fn apply_columns(op: &StructuredOperator<f64>) -> Matrix {
    let n = op.dim();
    let mut m = Matrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![Complex64::default(); n];
        e[j] = Complex64::new(1.0, 0.0);
        for (i, v) in op.apply(&e).into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    m
}

/// Bracket identities on `trials` random tuples of frequency `max_freq`.
pub fn bracket_identities(seed: u64, trials: usize, max_freq: u32) -> Result<Vec<Check>> {
    let t2 = TorusGeometry::<f64>::t2();
    let t4 = TorusGeometry::<f64>::t4();
    let mut anti = Check::new("antisymmetry", BRACKET_TOL);
    let mut leibniz = Check::new("leibniz", BRACKET_TOL);
    let mut jacobi = Check::new("jacobi (poisson)", BRACKET_TOL);
    let mut fundamental = Check::new("fundamental identity (t4)", BRACKET_TOL);
    let mut det_pair = Check::new("determinant == pairwise", BRACKET_TOL);
    let mut r4_six = Check::new("{.}_r == 6 {.}", BRACKET_TOL);
    let mut r4_three = Check::new("{.}_hyp == 3 {.}_r", BRACKET_TOL);
    let vol = *t4.volume();
    for t in 0..trials {
        let base = seed.wrapping_mul(0x1_0000).wrapping_add(100 * t as u64);
        let sym = |i: u64, dim: usize| random_symbol::<f64>(base + i, dim, max_freq, true);
        let r = 1 + t % 3;
        let form = t4.form(r)?;

        // two-torus: Poisson bracket
        let (f, g, h) = (sym(0, 2)?, sym(1, 2)?, sym(2, 2)?);
        let pb = |a: &Symbol, b: &Symbol| t2.poisson(a, b, 1);
        anti.record(sym_rel(&pb(&f, &g)?, &-&pb(&g, &f)?));
        leibniz.record(sym_rel(&pb(&f, &(&g * &h))?, &(&(&pb(&f, &g)? * &h) + &(&g * &pb(&f, &h)?))));
        jacobi.record(jacobi_defect(&f, &g, &h, |a, b| pb(a, b))?);
        det_pair.record(sym_rel(
            &t2.nambu(&[&f, &g])?,
            &brackets::nambu_bracket_pairwise(&[&f, &g], t2.form(1)?)?,
        ));

        // four-torus
        let fs: Vec<Symbol> = (0..5).map(|i| sym(10 + i, 4)).collect::<Result<_>>()?;
        let (a, b, c, d, e) = (&fs[0], &fs[1], &fs[2], &fs[3], &fs[4]);
        let pb4 = |x: &Symbol, y: &Symbol| t4.poisson(x, y, r);
        anti.record(sym_rel(&pb4(a, b)?, &-&pb4(b, a)?));
        jacobi.record(jacobi_defect(a, b, c, |x, y| pb4(x, y))?);
        let br = t4.bracket4_r([a, b, c, d], r)?;
        let nambu = t4.nambu(&[a, b, c, d])?;
        let hyp = t4.bracket4_hyp([a, b, c, d])?;
        // one transposition per slot pair, cycling with the trial
        let (i, j) = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)][t % 6];
        let mut sw = [a, b, c, d];
        sw.swap(i, j);
        anti.record(sym_rel(&t4.bracket4_r(sw, r)?, &-&br));
        anti.record(sym_rel(&t4.nambu(&sw)?, &-&nambu));
        anti.record(sym_rel(&t4.bracket4_hyp(sw)?, &-&hyp));
        let te = a * e;
        let leib = |lhs: Symbol, x: &Symbol, y: &Symbol| sym_rel(&lhs, &(&(a * y) + &(x * e)));
        leibniz.record(leib(t4.bracket4_r([b, c, d, &te], r)?, &t4.bracket4_r([b, c, d, a], r)?, &t4.bracket4_r([b, c, d, e], r)?));
        leibniz.record(leib(t4.bracket4_hyp([b, c, d, &te])?, &t4.bracket4_hyp([b, c, d, a])?, &t4.bracket4_hyp([b, c, d, e])?));
        leibniz.record(leib(t4.nambu(&[b, c, d, &te])?, &t4.nambu(&[b, c, d, a])?, &t4.nambu(&[b, c, d, e])?));
        det_pair.record(sym_rel(
            &brackets::nambu_bracket_det(&[a, b, c, d], &VolumeDensity::from_form(form)?)?,
            &brackets::nambu_bracket_pairwise(&[a, b, c, d], form)?,
        ));
        r4_six.record(sym_rel(&br, &nambu.scale_real(6.0)));
        r4_three.record(sym_rel(&hyp, &br.scale_real(3.0)));

        let ws: Vec<Symbol> = (0..7).map(|i| sym(50 + i, 4)).collect::<Result<_>>()?;
        fundamental.record(fundamental_defect(&ws, &vol)?);
    }
    Ok(vec![anti, leibniz, jacobi, fundamental, det_pair, r4_six, r4_three])
}

fn jacobi_defect(
    f: &Symbol,
    g: &Symbol,
    h: &Symbol,
    pb: impl Fn(&Symbol, &Symbol) -> Result<Symbol>,
) -> Result<f64> {
    let x = pb(f, &pb(g, h)?)?;
    let y = pb(g, &pb(h, f)?)?;
    let z = pb(h, &pb(f, g)?)?;
    let sum = &(&x + &y) + &z;
    let scale = x.max_coeff().max(y.max_coeff()).max(z.max_coeff()).max(1.0);
    Ok(sum.max_coeff() / scale)
}

/// `{f1,f2,f3,{g1,..,g4}} = sum_i {g1,..,{f1,f2,f3,g_i},..,g4}` with
/// `ws = [f1, f2, f3, g1, g2, g3, g4]`.
fn fundamental_defect(ws: &[Symbol], vol: &VolumeDensity<f64>) -> Result<f64> {
    let nb = |xs: [&Symbol; 4]| brackets::nambu_bracket_det(&xs, vol);
    let (f, g) = (&ws[..3], &ws[3..]);
    let lhs = nb([&f[0], &f[1], &f[2], &nb([&g[0], &g[1], &g[2], &g[3]])?])?;
    let mut rhs = Symbol::zero(4);
    for i in 0..4 {
        let inner = nb([&f[0], &f[1], &f[2], &g[i]])?;
        let mut slots = [&g[0], &g[1], &g[2], &g[3]];
        slots[i] = &inner;
        rhs = &rhs + &nb(slots)?;
    }
    Ok(sym_rel(&lhs, &rhs))
}
