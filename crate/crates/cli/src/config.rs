//! Run configuration: a TOML file, overridable from the command line.

use std::path::{Path, PathBuf};

use nambu_core::experiments::{Setting, TheoremId};
use nambu_core::geometry::{GeometryKind, TorusGeometry};
use nambu_core::symbol::{preset, random_symbol, CoeffRecord};
use nambu_core::{Error, Result, Symbol};
use serde::{Deserialize, Serialize};

/// How one symbol of an explicit tuple is given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SymbolSpec {
    /// Named preset such as `cos1*sin2`.
    Preset(String),
    /// Explicit Fourier coefficients.
    Coeffs(Vec<CoeffRecord>),
    /// Seeded random real symbol.
    Random { seed: u64, max_freq: u32 },
}

impl SymbolSpec {
    /// Command-line form: a preset expression, `random:SEED` (frequency from
    /// `max_freq`), or `@FILE` holding a JSON or TOML coefficient list.
    pub fn parse(s: &str, max_freq: u32) -> Result<Self> {
        let s = s.trim();
        if let Some(seed) = s.strip_prefix("random:") {
            let seed = seed
                .parse()
                .map_err(|_| Error::SymbolSpec(format!("bad seed in '{s}'")))?;
            return Ok(Self::Random { seed, max_freq });
        }
        if let Some(path) = s.strip_prefix('@') {
            return Ok(Self::Coeffs(read_records(Path::new(path))?));
        }
        if s.is_empty() {
            return Err(Error::SymbolSpec("empty symbol spec".into()));
        }
        Ok(Self::Preset(s.to_string()))
    }

    pub fn build(&self, dim: usize) -> Result<Symbol> {
        match self {
            Self::Preset(name) => preset(name, dim),
            Self::Coeffs(records) => {
                if let Some(r) = records.iter().find(|r| r.m.len() != dim) {
                    return Err(Error::SymbolSpec(format!(
                        "frequency {:?} does not have {dim} components",
                        r.m
                    )));
                }
                Symbol::from_records(dim, records).map_err(|e| Error::SymbolSpec(e.to_string()))
            }
            Self::Random { seed, max_freq } => random_symbol(*seed, dim, *max_freq, true),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Preset(name) => name.clone(),
            Self::Coeffs(records) => format!("coeffs[{}]", records.len()),
            Self::Random { seed, max_freq } => format!("random:{seed}/{max_freq}"),
        }
    }
}

#[derive(Deserialize)]
struct RecordFile {
    coeffs: Vec<CoeffRecord>,
}

fn read_records(path: &Path) -> Result<Vec<CoeffRecord>> {
    let text = std::fs::read_to_string(path)?;
    let bad = |e: String| Error::SymbolSpec(format!("{}: {e}", path.display()));
    if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str::<RecordFile>(&text)
            .map(|f| f.coeffs)
            .map_err(|e| bad(e.to_string()))
    } else {
        serde_json::from_str(&text).map_err(|e| bad(e.to_string()))
    }
}

/// Parses `a:b:step`, `a:b`, `a,b,c` or a single level.
pub fn parse_levels(s: &str) -> Result<Vec<u32>> {
    let bad = || Error::Invalid(format!("bad level range '{s}'"));
    let num = |t: &str| t.trim().parse::<u32>().map_err(|_| bad());
    let ks: Vec<u32> = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let (a, b, step) = match parts.as_slice() {
            [a, b] => (num(a)?, num(b)?, 1),
            [a, b, c] => (num(a)?, num(b)?, num(c)?),
            _ => return Err(bad()),
        };
        if step == 0 {
            return Err(bad());
        }
        (a..=b).step_by(step as usize).collect()
    } else {
        s.split(',').map(num).collect::<Result<_>>()?
    };
    if ks.is_empty() {
        return Err(Error::Invalid(format!("level range '{s}' is empty")));
    }
    Ok(ks)
}

/// Parses a geometry preset into a setting (`t4` means all structures).
pub fn parse_setting(name: &str) -> Result<Setting> {
    if name == "t4" {
        return Ok(Setting {
            geometry: GeometryKind::T4,
            r: 0,
        });
    }
    let (geom, r) = TorusGeometry::<f64>::preset(name)?;
    Ok(Setting {
        geometry: geom.kind(),
        r,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Geometry preset; unset means each statement's own settings.
    pub geometry: Option<String>,
    /// Statement ids; empty means all.
    pub theorems: Vec<String>,
    /// Levels; empty means each statement's default window.
    pub ks: Vec<u32>,
    pub seeds: Vec<u64>,
    /// Frequency of the random tuples.
    pub max_freq: u32,
    /// Explicit tuple replacing the random ones.
    pub symbols: Vec<SymbolSpec>,
    /// Quadrature grid for `quantize`; verification uses closed-form
    /// matrices and ignores it.
    pub grid: Option<usize>,
    pub norm_tol: f64,
    pub max_iter: usize,
    pub output: PathBuf,
    pub workers: usize,
    pub detect_sign: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: None,
            theorems: Vec::new(),
            ks: Vec::new(),
            seeds: vec![1, 2, 3],
            max_freq: 2,
            symbols: Vec::new(),
            grid: None,
            norm_tol: 1e-12,
            max_iter: 500,
            output: PathBuf::from("nambu-out"),
            workers: 1,
            detect_sign: true,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Invalid(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Invalid(format!("config: {e}")))
    }

    pub fn theorem_ids(&self) -> Result<Vec<TheoremId>> {
        if self.theorems.is_empty() {
            return Ok(TheoremId::ALL.to_vec());
        }
        self.theorems.iter().map(|t| t.parse()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.theorem_ids()?;
        if let Some(g) = &self.geometry {
            parse_setting(g)?;
        }
        if self.ks.first() == Some(&0) || self.ks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("levels must be positive and strictly increasing".into()));
        }
        if self.seeds.is_empty() && self.symbols.is_empty() {
            return Err(Error::Invalid("no seeds and no symbols given".into()));
        }
        if self.max_freq == 0 {
            return Err(Error::Invalid("max_freq must be at least 1".into()));
        }
        if !(self.norm_tol > 0.0) || self.max_iter == 0 {
            return Err(Error::Invalid("norm tolerance and iteration cap must be positive".into()));
        }
        if self.workers == 0 {
            return Err(Error::Invalid("workers must be at least 1".into()));
        }
        if self.grid.is_some_and(|g| g < 4) {
            return Err(Error::Invalid("grid override must be at least 4".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_ranges() {
        assert_eq!(parse_levels("8:32:4").unwrap(), vec![8, 12, 16, 20, 24, 28, 32]);
        assert_eq!(parse_levels("2:4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_levels("4,6,10").unwrap(), vec![4, 6, 10]);
        for bad in ["", "9:3", "1:5:0", "a:b", "1:2:3:4"] {
            assert!(parse_levels(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn round_trip_through_toml() {
        let cfg = RunConfig {
            geometry: Some("t4-r2".into()),
            theorems: vec!["hyp_fourfn".into()],
            ks: vec![4, 6, 8],
            symbols: vec![
                SymbolSpec::Preset("cos1*sin2".into()),
                SymbolSpec::Random { seed: 9, max_freq: 1 },
                SymbolSpec::Coeffs(vec![CoeffRecord {
                    m: vec![1, 0, 0, -1],
                    re: 0.25,
                    im: -0.5,
                }]),
            ],
            grid: Some(64),
            norm_tol: 1e-10,
            ..Default::default()
        };
        let text = cfg.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
        assert_eq!(RunConfig::from_toml(&RunConfig::default().to_toml().unwrap()).unwrap(), RunConfig::default());
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(RunConfig::from_toml("theorems = [\"nope\"]").is_err());
        assert!(RunConfig::from_toml("ks = [8, 4]").is_err());
        assert!(RunConfig::from_toml("geometry = \"t3\"").is_err());
        assert!(RunConfig::from_toml("colour = 1").is_err());
    }

    #[test]
    fn symbol_specs() {
        assert!(matches!(SymbolSpec::parse("random:4", 2).unwrap(), SymbolSpec::Random { seed: 4, max_freq: 2 }));
        assert!(SymbolSpec::parse("random:x", 2).is_err());
        assert!(SymbolSpec::parse("tan1", 2).unwrap().build(2).is_err());
        assert!(SymbolSpec::parse("@/nonexistent.json", 2).is_err());
        let bad = SymbolSpec::Coeffs(vec![CoeffRecord { m: vec![1], re: 1.0, im: 0.0 }]);
        assert!(bad.build(2).is_err());
    }
}
