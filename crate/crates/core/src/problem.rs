use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Which diversity measure a query maximises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    MaxMin,
    MaxSum,
}

/// Whether a selection of K strings may repeat a string.
///
/// The layered DP ranges over K-tuples of paths, which is `Tuple`;
/// `Set` demands K pairwise distinct strings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Semantics {
    #[default]
    Tuple,
    Set,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "maxmin" | "max-min" => Ok(Mode::MaxMin),
            "maxsum" | "max-sum" => Ok(Mode::MaxSum),
            other => Err(format!(
                "unknown mode {other:?} (expected maxmin or maxsum)"
            )),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::MaxMin => "maxmin",
            Mode::MaxSum => "maxsum",
        })
    }
}

impl FromStr for Semantics {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "tuple" => Ok(Semantics::Tuple),
            "set" => Ok(Semantics::Set),
            other => Err(format!(
                "unknown semantics {other:?} (expected tuple or set)"
            )),
        }
    }
}

/// Number of unordered pairs among `k` items.
pub fn pairs(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

/// Largest meaningful threshold: every pair differs everywhere.
pub fn max_threshold(mode: Mode, r: usize, k: usize) -> u64 {
    match mode {
        Mode::MaxMin => r as u64,
        Mode::MaxSum => (r * pairs(k)) as u64,
    }
}
