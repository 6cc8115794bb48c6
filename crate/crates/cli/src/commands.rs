//! Subcommand bodies. Each writes its report to `out` and returns a status.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, ValueEnum};
use nambu_core::experiments::{ResidualSeries, SeriesOptions, Setting, TheoremId, MIN_R2};
use nambu_core::geometry::{quadrature, BasisCache, GeometryKind, QuadratureGrid, TorusGeometry};
use nambu_core::operator::{write_binary, write_csv as write_matrix_csv};
use nambu_core::{Error, Result};

use crate::checks::{self, Check, Fault};
use crate::config::{parse_levels, parse_setting, RunConfig, SymbolSpec};
use crate::plot::{self, Curve};
use crate::runner::{self, Row};
use crate::Status;

pub const CSV_NAME: &str = "verify.csv";
pub const CONFIG_NAME: &str = "config.toml";

fn report_checks(checks: &[Check], out: &mut dyn Write) -> Result<Status> {
    for c in checks {
        writeln!(out, "{c}")?;
    }
    Ok(if checks::all_passed(checks) {
        Status::Ok
    } else {
        Status::Violation
    })
}

#[derive(Args, Clone, Debug)]
pub struct IdentitiesArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Corrupt one side of the factorization checks (negative control).
    #[arg(long)]
    pub inject_fault: Option<Fault>,
}

pub fn identities(a: &IdentitiesArgs, out: &mut dyn Write) -> Result<Status> {
    if a.trials == 0 {
        return Err(Error::Invalid("trials must be at least 1".into()));
    }
    let t = Instant::now();
    let checks = checks::operator_identities(a.seed, a.trials, a.inject_fault)?;
    let status = report_checks(&checks, out)?;
    writeln!(out, "identities: {} trials in {:.2}s", a.trials, t.elapsed().as_secs_f64())?;
    Ok(status)
}

#[derive(Args, Clone, Debug)]
pub struct BracketsArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 2)]
    pub max_freq: u32,
}

pub fn brackets(a: &BracketsArgs, out: &mut dyn Write) -> Result<Status> {
    if a.trials == 0 || a.max_freq == 0 {
        return Err(Error::Invalid("trials and max-freq must be at least 1".into()));
    }
    let t = Instant::now();
    let checks = checks::bracket_identities(a.seed, a.trials, a.max_freq)?;
    let status = report_checks(&checks, out)?;
    writeln!(out, "brackets: {} trials in {:.2}s", a.trials, t.elapsed().as_secs_f64())?;
    Ok(status)
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum DumpFormat {
    Binary,
    Csv,
}

#[derive(Args, Clone, Debug)]
pub struct QuantizeArgs {
    /// Preset expression, `random:SEED` or `@FILE`.
    #[arg(long)]
    pub symbol: String,
    #[arg(long, default_value = "t2")]
    pub geometry: String,
    /// Structure index on the four-torus (overrides the preset's).
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub k: u32,
    #[arg(long, value_enum, default_value_t = DumpFormat::Csv)]
    pub format: DumpFormat,
    /// Destination file; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Compute by quadrature on this grid (checked by doubling) instead of
    /// the closed form.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub max_freq: u32,
}

pub fn quantize(a: &QuantizeArgs, out: &mut dyn Write, log: &mut dyn Write) -> Result<Status> {
    if a.k == 0 {
        return Err(Error::ZeroLevel);
    }
    let setting = parse_setting(&a.geometry)?;
    let geom = match setting.geometry {
        GeometryKind::T2 => TorusGeometry::<f64>::t2(),
        GeometryKind::T4 => TorusGeometry::t4(),
    };
    let r = a.r.unwrap_or(setting.r.max(1));
    geom.check_r(r)?;
    let f = SymbolSpec::parse(&a.symbol, a.max_freq)?.build(geom.dim())?;
    let basis = BasisCache::from_env().get(&geom, r, a.k)?;
    let m = match a.grid {
        Some(n) if n < 4 => return Err(Error::Invalid("grid must be at least 4".into())),
        Some(n) => {
            let grid = QuadratureGrid { n };
            let m = quadrature::toeplitz_quadrature(&f, &basis, grid)?.matrix;
            writeln!(
                log,
                "quadrature on {n} nodes: doubling change {:.3e}, closed-form defect {:.3e}",
                quadrature::doubling_change(&f, &basis, grid)?,
                quadrature::closed_form_defect(&f, &basis, grid)?
            )?;
            m
        }
        None => nambu_core::geometry::toeplitz_matrix(&f, &basis)?.matrix,
    };
    let sink: Box<dyn Write + '_> = match &a.output {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(out),
    };
    match a.format {
        DumpFormat::Binary => write_binary(&m, sink)?,
        DumpFormat::Csv => write_matrix_csv(&m, sink)?,
    }
    writeln!(log, "{} r={r} k={}: {}x{}", geom.name(), a.k, m.nrows(), m.ncols())?;
    Ok(Status::Ok)
}

#[derive(Args, Clone, Debug, Default)]
pub struct VerifyArgs {
    /// TOML run configuration; the flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub geometry: Option<String>,
    /// Statement id; repeat or separate by commas.
    #[arg(long, value_delimiter = ',')]
    pub theorem: Vec<String>,
    /// Levels as `a:b:step`, `a:b` or `a,b,c`.
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    /// Explicit symbol (repeat once per slot) replacing the random tuples.
    #[arg(long)]
    pub symbol: Vec<String>,
    #[arg(long)]
    pub max_freq: Option<u32>,
    #[arg(long)]
    pub norm_tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Use `+ik` everywhere instead of detecting the sign.
    #[arg(long)]
    pub fixed_sign: bool,
    /// Print the plan and exit.
    #[arg(long)]
    pub dry_run: bool,
}

impl VerifyArgs {
    pub fn effective_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(g) = &self.geometry {
            cfg.geometry = Some(g.clone());
        }
        if !self.theorem.is_empty() {
            cfg.theorems = self.theorem.clone();
        }
        if let Some(k) = &self.k {
            cfg.ks = parse_levels(k)?;
        }
        if !self.seeds.is_empty() {
            cfg.seeds = self.seeds.clone();
        }
        if let Some(m) = self.max_freq {
            cfg.max_freq = m;
        }
        if !self.symbol.is_empty() {
            cfg.symbols = self
                .symbol
                .iter()
                .map(|s| SymbolSpec::parse(s, cfg.max_freq))
                .collect::<Result<_>>()?;
        }
        if let Some(t) = self.norm_tol {
            cfg.norm_tol = t;
        }
        if let Some(m) = self.max_iter {
            cfg.max_iter = m;
        }
        if let Some(o) = &self.output {
            cfg.output = o.clone();
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        if self.fixed_sign {
            cfg.detect_sign = false;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn summary_line(s: &ResidualSeries) -> String {
    let (slope, r2) = match &s.fit {
        Some(f) => (format!("{:+.3}", f.slope), format!("{:.3}", f.r2)),
        None => ("nan".into(), "nan".into()),
    };
    let mut extra = Vec::new();
    if let Some(sign) = s.sign {
        extra.push(format!("sign={}", if sign > 0.0 { "+ik" } else { "-ik" }));
    }
    if let Some(c) = s.best_c {
        extra.push(format!("best_c={c:.4}"));
    }
    if let Some(a) = s.aux_max {
        extra.push(format!("upper_gap={a:.2e}"));
    }
    if let Some(d) = s.oracle_defect {
        extra.push(format!("oracle={d:.1e}"));
    }
    if let Some(h) = &s.hs_fit {
        extra.push(format!("hs_slope={:+.3}", h.slope));
    }
    if !s.excluded.is_empty() {
        extra.push(format!("zero_at={:?}", s.excluded));
    }
    if !s.all_converged() {
        extra.push("NOT CONVERGED".into());
    }
    format!(
        "{:<4} {:<20} {:<6} {:<10} slope {slope:>7} (<= {:+.1}) r2 {r2:>5} max k^{}r {:.3e} {}",
        if s.passes() { "ok" } else { "FAIL" },
        s.theorem.name(),
        s.setting.label(),
        s.tuple,
        s.theorem.slope_threshold(),
        s.theorem.order(),
        s.max_scaled(),
        extra.join(" ")
    )
}

/// Status of a finished run: non-convergence dominates a violated rate.
pub fn series_status(series: &[ResidualSeries]) -> Status {
    series.iter().fold(Status::Ok, |acc, s| {
        let st = if !s.all_converged() {
            Status::NonConvergence
        } else if s.passes() {
            Status::Ok
        } else {
            Status::Violation
        };
        acc.combine(st)
    })
}

fn write_plots(dir: &Path, groups: &BTreeMap<String, (TheoremId, Vec<Curve>)>) -> Result<()> {
    for (name, (theorem, curves)) in groups {
        let title = format!("{name}: residual vs k");
        let svg = plot::render(&title, curves, Some(theorem.slope_threshold()));
        fs::write(dir.join(format!("{name}.svg")), svg)?;
    }
    Ok(())
}

pub fn verify(a: &VerifyArgs, out: &mut dyn Write, log: &mut (dyn Write + Send)) -> Result<Status> {
    let cfg = a.effective_config()?;
    let jobs = runner::plan(&cfg)?;
    if a.dry_run {
        writeln!(out, "{} series, output to {}", jobs.len(), cfg.output.display())?;
        for j in &jobs {
            writeln!(out, "  {}", j.describe())?;
        }
        return Ok(Status::Ok);
    }
    run_verify(&cfg, out, log)
}

/// Runs a validated configuration and writes CSV, plots and the config.
pub fn run_verify(cfg: &RunConfig, out: &mut dyn Write, log: &mut (dyn Write + Send)) -> Result<Status> {
    let jobs = runner::plan(cfg)?;
    let lab = runner::lab_for(cfg);
    let opts = SeriesOptions {
        detect_sign: cfg.detect_sign,
        ..SeriesOptions::default()
    };
    let start = Instant::now();
    let log = std::sync::Mutex::new(log);
    let series = runner::execute(&lab, &jobs, cfg.workers, &opts, |job, _| {
        if let Ok(mut l) = log.lock() {
            let _ = writeln!(l, "[{:7.1}s] {}", start.elapsed().as_secs_f64(), job.describe());
        }
    })?;
    fs::create_dir_all(&cfg.output)?;
    runner::write_csv(&series, BufWriter::new(File::create(cfg.output.join(CSV_NAME))?))?;
    fs::write(cfg.output.join(CONFIG_NAME), cfg.to_toml()?)?;
    let mut groups: BTreeMap<String, (TheoremId, Vec<Curve>)> = BTreeMap::new();
    for s in &series {
        groups
            .entry(s.theorem.name().to_string())
            .or_insert_with(|| (s.theorem, Vec::new()))
            .1
            .push(Curve::from_series(s));
    }
    write_plots(&cfg.output, &groups)?;
    for s in &series {
        writeln!(out, "{}", summary_line(s))?;
    }
    let status = series_status(&series);
    writeln!(
        out,
        "{} of {} series pass; wrote {} in {:.1}s",
        series.iter().filter(|s| s.passes()).count(),
        series.len(),
        cfg.output.join(CSV_NAME).display(),
        start.elapsed().as_secs_f64()
    )?;
    Ok(status)
}

#[derive(Args, Clone, Debug)]
pub struct ReportArgs {
    /// Directory holding a previous run's CSV.
    #[arg(long, default_value = "nambu-out")]
    pub input: PathBuf,
}

/// Rebuilds the plots and the pass/fail summary from a CSV alone.
pub fn report(a: &ReportArgs, out: &mut dyn Write) -> Result<Status> {
    let rows = runner::read_csv(File::open(a.input.join(CSV_NAME))?)?;
    // (theorem, geometry, r, seed) -> rows, in file order
    let mut series: Vec<((String, String, usize, String), Vec<Row>)> = Vec::new();
    for row in rows {
        let key = (row.theorem_id.clone(), row.geometry.clone(), row.r, row.seed.clone());
        match series.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(row),
            None => series.push((key, vec![row])),
        }
    }
    let mut groups: BTreeMap<String, (TheoremId, Vec<Curve>)> = BTreeMap::new();
    let mut status = Status::Ok;
    for ((name, geometry, r, seed), rows) in &series {
        let theorem: TheoremId = name.parse()?;
        let parse = |s: &str| s.parse::<f64>().unwrap_or(f64::NAN);
        let slope = parse(&rows[0].slope);
        let r2 = parse(&rows[0].r2);
        let converged = rows.iter().all(|r| r.converged);
        let pass = slope <= theorem.slope_threshold() && r2 >= MIN_R2;
        status = status.combine(match (converged, pass) {
            (false, _) => Status::NonConvergence,
            (true, true) => Status::Ok,
            (true, false) => Status::Violation,
        });
        let setting = Setting {
            geometry: match geometry.as_str() {
                "t2" => GeometryKind::T2,
                "t4" => GeometryKind::T4,
                g => return Err(Error::Invalid(format!("csv: unknown geometry '{g}'"))),
            },
            r: *r,
        }
        .label();
        writeln!(
            out,
            "{:<4} {name:<20} {setting:<6} seed {seed:<8} slope {slope:+.3} r2 {r2:.3}",
            if pass { "ok" } else { "FAIL" }
        )?;
        let points = rows.iter().map(|r| (r.k as f64, parse(&r.residual))).collect();
        groups
            .entry(name.clone())
            .or_insert_with(|| (theorem, Vec::new()))
            .1
            .push(Curve::from_points(format!("{setting} seed={seed}"), points));
    }
    write_plots(&a.input, &groups)?;
    Ok(status)
}

#[derive(Args, Clone, Debug)]
pub struct AllArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
}

/// Identity suites followed by the full verification run.
pub fn all(a: &AllArgs, out: &mut dyn Write, log: &mut (dyn Write + Send)) -> Result<Status> {
    let mut status = identities(
        &IdentitiesArgs {
            seed: a.seed,
            trials: 100,
            inject_fault: None,
        },
        out,
    )?;
    status = status.combine(brackets(
        &BracketsArgs {
            seed: a.seed,
            trials: 20,
            max_freq: 2,
        },
        out,
    )?);
    let v = VerifyArgs {
        config: a.config.clone(),
        output: a.output.clone(),
        workers: a.workers,
        ..VerifyArgs::default()
    };
    Ok(status.combine(verify(&v, out, log)?))
}
