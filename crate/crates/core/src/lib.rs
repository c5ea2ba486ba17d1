//! Diverse string selection under Hamming distance.
//!
//! Languages are given either as explicit string sets or as Σ-DAGs
//! (layered edge-labeled DAGs whose source-to-sink paths spell equal-length
//! strings). The crate decides whether K strings of a language can be
//! pairwise far apart, in the max-min and max-sum sense, exactly
//! ([`exact`]), approximately for unbounded K ([`local_search`]) and by
//! color coding ([`color`]). [`oracle`] holds brute-force references and
//! [`reductions`] builds hard instances.

pub mod color;
pub mod dag;
pub mod error;
pub mod exact;
pub mod lcs;
pub mod local_search;
pub mod oracle;
pub mod problem;
pub mod reductions;
pub mod strings;

pub use dag::{DagError, Edge, RawDag, SigmaDag, VertexId};
pub use error::{Error, Result};
pub use exact::{optimize, solve, solve_maxmin, solve_maxsum, SolveOptions, SolveResult};
pub use problem::{Mode, Semantics};
pub use strings::{div_min, div_sum, hamming, Alphabet, Diversity, RString, StringSet, Symbol};

/// Exact rational scalar, used for ε and the ℓ1 embedding.
pub type Rational = num_rational::Ratio<i64>;

/// ℓ1 embedding with exact coordinates.
pub type RationalEmbedding = Vec<Rational>;

/// ℓ1 embedding with floating-point coordinates.
pub type FloatEmbedding = Vec<f64>;

/// DP tables for the three cell widths [`exact::solve`] chooses between.
pub type NarrowTable = exact::PatternTable<u8>;
pub type MediumTable = exact::PatternTable<u16>;
pub type WideTable = exact::PatternTable<u32>;
