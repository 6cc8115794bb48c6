//! Residuals of the semiclassical statements over level sweeps, with
//! log-log rate fits.

mod fit;
mod residuals;
mod series;
mod tensor;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::GeometryKind;

pub use fit::{fit_rate, RateFit, MIN_POINTS, ZERO_GUARD};
pub use residuals::{Lab, Residual, DIM4_C};
pub use series::{random_tuple, run_series, RatePolicy, ResidualSeries, SeriesOptions, SymbolTuple, MIN_R2};
pub use tensor::TensorStatement;

/// Fitted slopes must not exceed this for `O(1/k)` statements.
pub const SLOPE_ORDER1: f64 = -0.7;
/// Fitted slopes must not exceed this for `O(1/k^2)` statements.
pub const SLOPE_ORDER2: f64 = -1.6;

macro_rules! theorems {
    ($($var:ident => $name:literal),* $(,)?) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum TheoremId { $($var),* }

        impl TheoremId {
            pub const ALL: &'static [TheoremId] = &[$(TheoremId::$var),*];

            pub fn name(self) -> &'static str {
                match self { $(TheoremId::$var => $name),* }
            }
        }

        impl FromStr for TheoremId {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok(TheoremId::$var),)*
                    _ => Err(Error::Invalid(format!("unknown theorem id '{s}'"))),
                }
            }
        }
    };
}

theorems! {
    BtCommutator => "bt_commutator",
    BtNormLower => "bt_norm_lower",
    BtProduct => "bt_product",
    BtCommutatorSmall => "bt_commutator_small",
    VolformN1 => "volform_n1",
    VolformN2 => "volform_n2",
    NambuCommuteN1 => "nambu_commute_n1",
    NambuCommuteN2 => "nambu_commute_n2",
    HypFourfn => "hyp_fourfn",
    Directsum => "directsum",
    DirectsumCommute => "directsum_commute",
    Dim4Mu => "dim4_mu",
    Dim4Hyp => "dim4_hyp",
    TensorTripleComm => "tensor_triple_comm",
    TensorComm => "tensor_comm",
    TensorCommSmall => "tensor_comm_small",
    TensorGencomm => "tensor_gencomm",
    TensorProp4 => "tensor_prop4",
    TensorW => "tensor_w",
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a statement lives: which torus, which structure (`0` = all three).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Setting {
    pub geometry: GeometryKind,
    pub r: usize,
}

impl Setting {
    pub fn label(&self) -> String {
        match (self.geometry, self.r) {
            (GeometryKind::T2, _) => "t2".into(),
            (GeometryKind::T4, 0) => "t4".into(),
            (GeometryKind::T4, r) => format!("t4-r{r}"),
        }
    }
}

impl TheoremId {
    /// Claimed decay exponent `p` in `O(1/k^p)`.
    pub fn order(self) -> u32 {
        use TheoremId::*;
        match self {
            NambuCommuteN2 | DirectsumCommute | TensorGencomm | TensorProp4 => 2,
            _ => 1,
        }
    }

    pub fn slope_threshold(self) -> f64 {
        if self.order() == 2 {
            SLOPE_ORDER2
        } else {
            SLOPE_ORDER1
        }
    }

    /// Number of symbols the statement consumes.
    pub fn arity(self) -> usize {
        use TheoremId::*;
        match self {
            BtNormLower => 1,
            BtCommutator | BtProduct | BtCommutatorSmall | VolformN1 | NambuCommuteN1 => 2,
            TensorTripleComm | TensorComm | TensorCommSmall => 2,
            _ => 4,
        }
    }

    /// Statements containing an odd power of `ik`, whose sign convention is
    /// detected at the smallest level.
    pub fn sign_sensitive(self) -> bool {
        use TheoremId::*;
        matches!(self, BtCommutator | VolformN1 | TensorTripleComm | TensorComm)
    }

    /// Residuals computed through structured (Kronecker) operators.
    pub fn is_tensor(self) -> bool {
        use TheoremId::*;
        matches!(
            self,
            TensorTripleComm | TensorComm | TensorCommSmall | TensorGencomm | TensorProp4 | TensorW
        )
    }

    /// Statements that hold for a single structure on either torus.
    pub fn is_baseline(self) -> bool {
        use TheoremId::*;
        matches!(self, BtCommutator | BtNormLower | BtProduct | BtCommutatorSmall)
    }

    pub fn default_settings(self) -> Vec<Setting> {
        use TheoremId::*;
        let t2 = Setting {
            geometry: GeometryKind::T2,
            r: 1,
        };
        match self {
            BtCommutator | BtNormLower | BtProduct | BtCommutatorSmall | VolformN1 | NambuCommuteN1 => vec![t2],
            VolformN2 | NambuCommuteN2 => vec![Setting {
                geometry: GeometryKind::T4,
                r: 1,
            }],
            HypFourfn => (1..=3)
                .map(|r| Setting {
                    geometry: GeometryKind::T4,
                    r,
                })
                .collect(),
            _ => vec![Setting {
                geometry: GeometryKind::T4,
                r: 0,
            }],
        }
    }

    /// Whether the statement makes sense in `setting`.
    pub fn accepts(self, setting: Setting) -> bool {
        use TheoremId::*;
        match (setting.geometry, setting.r) {
            (GeometryKind::T2, r) => r == 1 && (self.is_baseline() || matches!(self, VolformN1 | NambuCommuteN1)),
            (GeometryKind::T4, 0) => !(self.is_baseline() || matches!(self, VolformN1 | NambuCommuteN1 | HypFourfn)),
            (GeometryKind::T4, r) if r <= 3 => {
                self.is_baseline() || self == HypFourfn || (r == 1 && matches!(self, VolformN2 | NambuCommuteN2))
            }
            _ => false,
        }
    }

    /// Default level window of the sweep.
    pub fn default_ks(self, geometry: GeometryKind) -> Vec<u32> {
        if self.is_tensor() {
            vec![2, 3, 4, 5, 6]
        } else {
            match geometry {
                GeometryKind::T2 => vec![8, 12, 16, 24, 32],
                GeometryKind::T4 => vec![4, 6, 8, 10, 12],
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for t in TheoremId::ALL {
            assert_eq!(t.name().parse::<TheoremId>().unwrap(), *t);
            for s in t.default_settings() {
                assert!(t.accepts(s), "{t} {s:?}");
            }
        }
        assert!("bt_nope".parse::<TheoremId>().is_err());
    }
}
