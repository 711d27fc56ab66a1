//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors produced by lattice, constellation and estimation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Exact integer arithmetic left the supported width.
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    /// A caller broke a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),
    /// Matrix was expected to have determinant ±1.
    #[error("matrix is not unimodular (det = {0})")]
    NotUnimodular(i128),
    #[error("unsupported lattice `{0}`")]
    UnsupportedLattice(String),
    #[error("invalid constellation spec `{spec}`: {reason}")]
    InvalidSpec { spec: String, reason: String },
    /// The shaping lattice does not sit inside the coding lattice.
    #[error("shaping lattice is not a sublattice of the coding lattice")]
    NotSublattice,
    /// Ferdinand's mapping needs L_ij / L_ii to be integral.
    #[error(
        "Ferdinand mapping not applicable: L[{row}][{col}] is not a multiple of L[{row}][{row}]"
    )]
    FerdinandInapplicable { row: usize, col: usize },
    #[error("bit mapping unavailable: range {range} of coordinate {coord} is not a power of two")]
    BitMappingUnavailable { coord: usize, range: u64 },
    #[error("{what} has {size} elements, above the enumeration limit {limit}")]
    TooLargeToEnumerate {
        what: &'static str,
        size: u128,
        limit: u128,
    },
    /// Offset optimisation refused because the constellation is too large;
    /// callers should fall back to a random offset.
    #[error(
        "constellation with {0} points is too large for offset optimisation; use a random offset"
    )]
    UseRandomOffset(u128),
    #[error("shell-count criterion did not converge below D = {cap} (worst relative increment {worst:.3e})")]
    NonConvergence { cap: usize, worst: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
