//! Voronoi constellations over cubic coding lattices.
//!
//! The crate is organised bottom-up:
//!
//! - [`intlinalg`]: exact integer matrix algorithms (determinant, Smith form,
//!   lower-triangular form, unimodular inverse).
//! - [`lattices`]: the lattice catalog, closest-point quantizers and
//!   normalized-second-moment estimation.
//! - [`shells`]: counting, enumerating and sampling integer shells.
//! - [`vc`]: constellation construction, integer mappings, labeling and merits.
//! - [`airlab`]: AWGN channel, output density, mutual information and LLRs.
//! - [`simkit`]: seeded sweeps with checkpoints and CSV/JSON output.

pub mod airlab;
pub mod error;
pub mod intlinalg;
pub mod lattices;
pub mod shells;
pub mod simkit;
pub mod vc;

pub use error::{Error, Result};
