//! Exact first-passage percolation on `Z^2` with hierarchical, odometer
//! driven edge weights.
//!
//! An [`Environment`] is a pure function of `alpha` and a 64-bit seed. The
//! level of an edge comes from a 5-adic adding machine applied to one of two
//! digit sequences, and its passage time is `1 + alpha^level` plus a tiny
//! uniform perturbation. Edges of level at least `k` form the k-grid, a
//! square lattice of spacing `5^(k-1)`.
//!
//! ```
//! use ergofpp::{distance, Environment, Vertex};
//!
//! let env = Environment::from_seed(0.1, 7).unwrap();
//! let g = distance(&env, Vertex::ORIGIN, Vertex::new(125, 0)).unwrap();
//! assert!(g.time > 125.0 && g.time <= 1.3 * 125.0);
//! assert_eq!(g.path.start(), Some(Vertex::ORIGIN));
//! ```
//!
//! Modules, bottom up: [`padic`] (odometer and levels), [`lattice`] (grids
//! and squares), [`weights`], [`geodesy`] (exact distances), [`oracle`]
//! (brute force and lemma checks), [`experiments`] and [`stats`].

pub mod error;
pub mod experiments;
pub mod geodesy;
pub mod lattice;
pub mod oracle;
pub mod padic;
pub mod rng;
pub mod stats;
pub mod weights;

pub use error::{Error, Result};
pub use experiments::{beta, ExperimentConfig, ExperimentKind, ExperimentOutput, ExperimentSummary};
pub use geodesy::{
    distance, distance_with, geodesic, safe_region, staircase_upper_bound, wandering,
    GeodesicResult, Path, SafeRegion, SearchOptions,
};
pub use lattice::{spacing, Axis, EdgeId, Environment, GridSquare, Orientation, Rect, Vertex};
pub use oracle::{brute_force_distance, Lemma, LemmaReport, Window};
pub use padic::{DigitSequence, Level};
pub use weights::{passage_time, path_time, PassageTime};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/geodesics.md")]
    mod geodesics {}
    #[doc = include_str!("../../../book/src/lemmas.md")]
    mod lemmas {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
