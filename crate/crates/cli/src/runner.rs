//! Verification runs: planning, a deterministic work queue, CSV output.

use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use nambu_core::experiments::{
    random_tuple, run_series, Lab, ResidualSeries, SeriesOptions, Setting, SymbolTuple, TheoremId,
};
use nambu_core::geometry::{BasisCache, GeometryKind};
use nambu_core::operator::NormOptions;
use nambu_core::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::config::{parse_setting, RunConfig};

/// One series to compute.
#[derive(Clone, Debug)]
pub struct Job {
    pub theorem: TheoremId,
    pub setting: Setting,
    pub tuple: SymbolTuple<f64>,
    pub ks: Vec<u32>,
}

impl Job {
    pub fn describe(&self) -> String {
        let ks: Vec<String> = self.ks.iter().map(|k| k.to_string()).collect();
        format!(
            "{:<20} {:<6} {:<10} k={}",
            self.theorem.name(),
            self.setting.label(),
            self.tuple.label,
            ks.join(",")
        )
    }
}

fn dim_of(kind: GeometryKind) -> usize {
    match kind {
        GeometryKind::T2 => 2,
        GeometryKind::T4 => 4,
    }
}

/// Expands a configuration into jobs, ordered by statement, setting, tuple.
pub fn plan(cfg: &RunConfig) -> Result<Vec<Job>> {
    cfg.validate()?;
    let forced = cfg.geometry.as_deref().map(parse_setting).transpose()?;
    let mut jobs = Vec::new();
    for theorem in cfg.theorem_ids()? {
        let settings = match forced {
            Some(s) if theorem.accepts(s) => vec![s],
            Some(s) => {
                return Err(Error::Invalid(format!(
                    "{theorem} is not defined on {}",
                    s.label()
                )))
            }
            None => theorem.default_settings(),
        };
        for setting in settings {
            let dim = dim_of(setting.geometry);
            let tuples: Vec<SymbolTuple<f64>> = if cfg.symbols.is_empty() {
                cfg.seeds
                    .iter()
                    .map(|s| random_tuple(*s, dim, theorem.arity(), cfg.max_freq))
                    .collect::<Result<_>>()?
            } else {
                if cfg.symbols.len() != theorem.arity() {
                    return Err(Error::ArityMismatch {
                        expected: theorem.arity(),
                        got: cfg.symbols.len(),
                    });
                }
                let symbols = cfg.symbols.iter().map(|s| s.build(dim)).collect::<Result<_>>()?;
                let labels: Vec<String> = cfg.symbols.iter().map(|s| s.label()).collect();
                vec![SymbolTuple {
                    label: labels.join(";"),
                    seed: None,
                    symbols,
                }]
            };
            let ks = if cfg.ks.is_empty() {
                theorem.default_ks(setting.geometry)
            } else {
                cfg.ks.clone()
            };
            for tuple in tuples {
                jobs.push(Job {
                    theorem,
                    setting,
                    tuple,
                    ks: ks.clone(),
                });
            }
        }
    }
    Ok(jobs)
}

pub fn lab_for(cfg: &RunConfig) -> Lab<f64> {
    Lab::new(
        BasisCache::from_env(),
        NormOptions {
            tol: cfg.norm_tol,
            max_iter: cfg.max_iter,
            ..NormOptions::default()
        },
    )
}

/// Runs `jobs` on `workers` threads; results come back in job order.
pub fn execute(
    lab: &Lab<f64>,
    jobs: &[Job],
    workers: usize,
    opts: &SeriesOptions,
    progress: impl Fn(&Job, &ResidualSeries) + Sync,
) -> Result<Vec<ResidualSeries>> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<ResidualSeries>>>> = Mutex::new(vec![None; jobs.len()]);
    std::thread::scope(|scope| {
        for _ in 0..workers.clamp(1, jobs.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(job) = jobs.get(i) else { break };
                let out = run_series(lab, job.theorem, job.setting, &job.tuple, &job.ks, opts);
                if let Ok(s) = &out {
                    progress(job, s);
                }
                slots.lock().expect("result lock")[i] = Some(out);
            });
        }
    });
    slots
        .into_inner()
        .expect("result lock")
        .into_iter()
        .map(|s| s.expect("every job ran"))
        .collect()
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub theorem_id: String,
    pub geometry: String,
    /// Structure index; 0 when all three structures are involved.
    pub r: usize,
    /// Seed of the random tuple, or the tuple label.
    pub seed: String,
    pub k: u32,
    pub residual: String,
    pub scaled_residual: String,
    pub slope: String,
    pub r2: String,
    pub converged: bool,
}

fn num(v: f64) -> String {
    format!("{v:.12e}")
}

pub fn rows(series: &[ResidualSeries]) -> Vec<Row> {
    let mut out = Vec::new();
    for s in series {
        let (slope, r2) = match &s.fit {
            Some(f) => (num(f.slope), num(f.r2)),
            None => ("nan".to_string(), "nan".to_string()),
        };
        for (i, k) in s.ks.iter().enumerate() {
            out.push(Row {
                theorem_id: s.theorem.name().into(),
                geometry: match s.setting.geometry {
                    GeometryKind::T2 => "t2".into(),
                    GeometryKind::T4 => "t4".into(),
                },
                r: s.setting.r,
                seed: s.seed.map(|v| v.to_string()).unwrap_or_else(|| s.tuple.clone()),
                k: *k,
                residual: num(s.residuals[i]),
                scaled_residual: num(s.scaled[i]),
                slope: slope.clone(),
                r2: r2.clone(),
                converged: s.converged[i],
            });
        }
    }
    out
}

pub fn write_csv<W: Write>(series: &[ResidualSeries], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for row in rows(series) {
        wr.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(r: R) -> Result<Vec<Row>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|row| row.map_err(|e| Error::Invalid(format!("csv: {e}"))))
        .collect()
}
