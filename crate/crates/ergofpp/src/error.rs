use thiserror::Error;

use crate::lattice::Vertex;

/// Errors surfaced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("alpha must lie in (0, 0.2), got {0}")]
    InvalidAlpha(f64),

    #[error("digit precision must lie in {min}..={max}, got {got}")]
    InvalidPrecision { got: usize, min: usize, max: usize },

    #[error("digit {digit} at position {index} is not a base-5 digit")]
    InvalidDigit { index: usize, digit: u8 },

    #[error("coordinate {coord} exceeds the precision guard of +/-5^{exponent}")]
    Precision { coord: i64, exponent: usize },

    #[error("level {0} must be at least 1")]
    InvalidLevel(u32),

    #[error("grid spacing 5^({0}-1) overflows 64-bit coordinates")]
    SpacingOverflow(u32),

    #[error("empty range: lo {lo} > hi {hi}")]
    EmptyRange { lo: i64, hi: i64 },

    #[error("malformed path: {from:?} and {to:?} are not adjacent")]
    MalformedPath { from: Vertex, to: Vertex },

    #[error("search region of {cells} cells exceeds the cap of {cap} (budget {budget})")]
    RegionTooLarge { budget: f64, cells: u64, cap: u64 },

    #[error("target unreachable inside a region of budget {budget}")]
    Unreachable { budget: f64 },

    #[error("window {width}x{height} exceeds the oracle limit")]
    WindowTooLarge { width: usize, height: usize },

    #[error("vertex {0:?} lies outside the oracle window")]
    OutsideWindow(Vertex),

    #[error("oracle disagreement: relaxation {relaxation} vs enumeration {enumeration}")]
    OracleDisagreement { relaxation: f64, enumeration: f64 },

    #[error("invalid experiment configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
