//! Level sweeps of one statement on one symbol tuple.

use super::fit::{fit_rate, RateFit, ZERO_GUARD};
use super::residuals::Lab;
use super::tensor::TensorStatement;
use super::{Setting, TheoremId};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::symbol::{random_symbol, FourierSymbol};

/// Minimum coefficient of determination for an accepted rate fit.
pub const MIN_R2: f64 = 0.9;

/// Symbols feeding one series, with a printable descriptor.
#[derive(Clone, Debug)]
pub struct SymbolTuple<T: Real> {
    pub label: String,
    pub seed: Option<u64>,
    pub symbols: Vec<FourierSymbol<T>>,
}

/// `arity` real random symbols of frequency `max_freq`, derived from `seed`.
pub fn random_tuple<T: Real>(seed: u64, dim: usize, arity: usize, max_freq: u32) -> Result<SymbolTuple<T>> {
    let symbols = (0..arity as u64)
        .map(|i| random_symbol(seed.wrapping_mul(1000).wrapping_add(i), dim, max_freq, true))
        .collect::<Result<Vec<_>>>()?;
    Ok(SymbolTuple {
        label: format!("seed={seed}"),
        seed: Some(seed),
        symbols,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesOptions {
    /// Try both signs of `ik` at the smallest level and keep the better one;
    /// otherwise `+ik` is used.
    pub detect_sign: bool,
    /// Tensor residuals at levels up to this are also computed densely.
    pub oracle_max_k: u32,
    /// For `dim4_hyp`, search the best constant at the largest level.
    pub fit_constant: bool,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self {
            detect_sign: true,
            oracle_max_k: 3,
            fit_constant: true,
        }
    }
}

/// How a fitted rate is judged.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatePolicy {
    pub max_slope: f64,
    pub min_r2: f64,
}

impl RatePolicy {
    pub fn for_theorem(t: TheoremId) -> Self {
        Self {
            max_slope: t.slope_threshold(),
            min_r2: MIN_R2,
        }
    }

    pub fn accepts(&self, fit: &RateFit) -> bool {
        fit.slope <= self.max_slope && fit.r2 >= self.min_r2
    }
}

#[derive(Clone, Debug)]
pub struct ResidualSeries {
    pub theorem: TheoremId,
    pub setting: Setting,
    pub tuple: String,
    pub seed: Option<u64>,
    pub ks: Vec<u32>,
    pub residuals: Vec<f64>,
    /// `k^p r(k)` for an `O(1/k^p)` statement.
    pub scaled: Vec<f64>,
    pub converged: Vec<bool>,
    /// Hilbert-Schmidt norms of materialized residuals (reported only).
    pub hs: Vec<Option<f64>>,
    /// Levels whose residual was below the zero guard.
    pub excluded: Vec<u32>,
    /// Fit over all levels but the smallest.
    pub fit: Option<RateFit>,
    pub fit_error: Option<String>,
    pub hs_fit: Option<RateFit>,
    /// Sign locked for `ik` (`None` for even powers).
    pub sign: Option<f64>,
    /// Best constant `c` (dim4_hyp only).
    pub best_c: Option<f64>,
    /// Largest statement-specific side value, e.g. the upper norm gap.
    pub aux_max: Option<f64>,
    /// Largest relative structured-vs-dense discrepancy (tensor only).
    pub oracle_defect: Option<f64>,
}

impl ResidualSeries {
    pub fn max_scaled(&self) -> f64 {
        self.scaled.iter().copied().fold(0.0, f64::max)
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|c| *c)
    }

    /// The fitted rate meets the statement's threshold.
    pub fn passes(&self) -> bool {
        self.fit
            .as_ref()
            .is_some_and(|f| RatePolicy::for_theorem(self.theorem).accepts(f))
    }
}

fn fit_window(ks: &[u32], vals: &[f64]) -> Result<RateFit> {
    if ks.len() < 2 {
        return fit_rate(&[], &[]);
    }
    fit_rate(&ks[1..], &vals[1..])
}

/// Sweeps `theorem` over `ks` on `tuple`.
pub fn run_series<T: Real>(
    lab: &Lab<T>,
    theorem: TheoremId,
    setting: Setting,
    tuple: &SymbolTuple<T>,
    ks: &[u32],
    opts: &SeriesOptions,
) -> Result<ResidualSeries> {
    if ks.is_empty() || ks.windows(2).any(|w| w[0] >= w[1]) || ks[0] == 0 {
        return Err(Error::Invalid("levels must be positive and strictly increasing".into()));
    }
    let fs = &tuple.symbols;
    let mut first = None;
    let sign = if theorem.sign_sensitive() {
        if opts.detect_sign {
            let plus = lab.residual(theorem, setting, fs, ks[0], 1.0)?;
            let minus = lab.residual(theorem, setting, fs, ks[0], -1.0)?;
            let s = if minus.value < plus.value { -1.0 } else { 1.0 };
            first = Some(if s > 0.0 { plus } else { minus });
            Some(s)
        } else {
            Some(1.0)
        }
    } else {
        None
    };
    let s = sign.unwrap_or(1.0);
    let p = theorem.order() as i32;
    let mut out = ResidualSeries {
        theorem,
        setting,
        tuple: tuple.label.clone(),
        seed: tuple.seed,
        ks: ks.to_vec(),
        residuals: Vec::with_capacity(ks.len()),
        scaled: Vec::with_capacity(ks.len()),
        converged: Vec::with_capacity(ks.len()),
        hs: Vec::with_capacity(ks.len()),
        excluded: Vec::new(),
        fit: None,
        fit_error: None,
        hs_fit: None,
        sign,
        best_c: None,
        aux_max: None,
        oracle_defect: None,
    };
    for (i, &k) in ks.iter().enumerate() {
        let res = match first.take() {
            Some(r) if i == 0 => r,
            _ => lab.residual(theorem, setting, fs, k, s)?,
        };
        if res.value <= ZERO_GUARD {
            out.excluded.push(k);
        }
        out.residuals.push(res.value);
        out.scaled.push(res.value * (k as f64).powi(p));
        out.converged.push(res.converged);
        out.hs.push(res.hs);
        if let Some(a) = res.aux {
            out.aux_max = Some(out.aux_max.map_or(a, |m: f64| m.max(a)));
        }
        if theorem.is_tensor() && k <= opts.oracle_max_k {
            let d = lab.tensor_oracle_defect(TensorStatement::try_from(theorem)?, fs, k, s)?;
            out.oracle_defect = Some(out.oracle_defect.map_or(d, |m: f64| m.max(d)));
        }
    }
    match fit_window(ks, &out.residuals) {
        Ok(f) => out.fit = Some(f),
        Err(e) => out.fit_error = Some(e.to_string()),
    }
    if out.hs.iter().all(|h| h.is_some()) {
        let hs: Vec<f64> = out.hs.iter().map(|h| h.unwrap_or(0.0)).collect();
        out.hs_fit = fit_window(ks, &hs).ok();
    }
    if theorem == TheoremId::Dim4Hyp && opts.fit_constant {
        out.best_c = Some(lab.best_dim4_c(fs, *ks.last().expect("nonempty"))?);
    }
    Ok(out)
}
