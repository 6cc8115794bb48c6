//! Read-mostly cache of theta bases keyed by `(geometry, r, k)`, optionally
//! persisted as JSON (frame and period matrix) in a directory.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::theta::ThetaBasis;
use super::torus::{GeometryKind, TorusGeometry};
use crate::error::{Error, Result};
use crate::operator::CMat;
use crate::scalar::Real;

/// Environment variable naming the on-disk cache directory.
pub const CACHE_ENV: &str = "NAMBU_CACHE_DIR";

type Key = (GeometryKind, usize, u32);

#[derive(Debug)]
pub struct BasisCache<T: Real> {
    entries: RwLock<HashMap<Key, Arc<ThetaBasis<T>>>>,
    dir: Option<PathBuf>,
}

#[derive(Serialize, Deserialize)]
struct StoredBasis {
    geometry: String,
    r: usize,
    k: u32,
    /// Row-major signed permutation.
    frame: Vec<f64>,
    period_re: Vec<f64>,
    period_im: Vec<f64>,
}

impl<T: Real> Default for BasisCache<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> BasisCache<T> {
    /// In-memory cache.
    pub fn new() -> Self {
        Self {
            entries: RwLock::new(HashMap::new()),
            dir: None,
        }
    }

    /// Cache backed by `dir` (created on first write).
    pub fn with_dir(dir: impl Into<PathBuf>) -> Self {
        Self {
            entries: RwLock::new(HashMap::new()),
            dir: Some(dir.into()),
        }
    }

    /// Backed by `$NAMBU_CACHE_DIR` when set and nonempty.
    pub fn from_env() -> Self {
        match std::env::var(CACHE_ENV) {
            Ok(d) if !d.is_empty() => Self::with_dir(d),
            _ => Self::new(),
        }
    }

    pub fn dir(&self) -> Option<&PathBuf> {
        self.dir.as_ref()
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, geom: &TorusGeometry<T>, r: usize, k: u32) -> Result<Arc<ThetaBasis<T>>> {
        let key = (geom.kind(), r, k);
        if let Some(b) = self.entries.read().expect("cache lock").get(&key) {
            return Ok(b.clone());
        }
        let basis = match self.load(geom, r, k) {
            Some(b) => b,
            None => {
                let b = ThetaBasis::new(geom, r, k)?;
                self.store(&b)?;
                b
            }
        };
        let mut map = self.entries.write().expect("cache lock");
        Ok(map.entry(key).or_insert_with(|| Arc::new(basis)).clone())
    }

    fn path(&self, kind: GeometryKind, r: usize, k: u32) -> Option<PathBuf> {
        self.dir
            .as_ref()
            .map(|d| d.join(format!("basis-{}-r{r}-k{k}.json", kind.name())))
    }

    /// Stored basis, if present and valid; anything unreadable is ignored
    /// and rebuilt.
    fn load(&self, geom: &TorusGeometry<T>, r: usize, k: u32) -> Option<ThetaBasis<T>> {
        let path = self.path(geom.kind(), r, k)?;
        let text = std::fs::read_to_string(path).ok()?;
        let s: StoredBasis = serde_json::from_str(&text).ok()?;
        if s.geometry != geom.name() || s.r != r || s.k != k {
            return None;
        }
        let d = geom.dim();
        let g = d / 2;
        if s.frame.len() != d * d || s.period_re.len() != g * g || s.period_im.len() != g * g {
            return None;
        }
        let frame = DMatrix::from_row_iterator(d, d, s.frame.iter().map(|v| T::lit(*v)));
        let period = CMat::from_fn(g, g, |i, j| {
            Complex::new(T::lit(s.period_re[i * g + j]), T::lit(s.period_im[i * g + j]))
        });
        ThetaBasis::from_parts(geom, r, k, frame, period).ok()
    }

    fn store(&self, b: &ThetaBasis<T>) -> Result<()> {
        let Some(path) = self.path(b.kind(), b.r(), b.k()) else {
            return Ok(());
        };
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let f = b.frame();
        let p = b.period_matrix();
        let g = p.nrows();
        let stored = StoredBasis {
            geometry: b.kind().name().to_string(),
            r: b.r(),
            k: b.k(),
            frame: (0..f.nrows())
                .flat_map(|i| (0..f.ncols()).map(move |j| (i, j)))
                .map(|(i, j)| f[(i, j)].as_f64())
                .collect(),
            period_re: (0..g * g).map(|i| p[(i / g, i % g)].re.as_f64()).collect(),
            period_im: (0..g * g).map(|i| p[(i / g, i % g)].im.as_f64()).collect(),
        };
        let text = serde_json::to_string_pretty(&stored).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }
}
