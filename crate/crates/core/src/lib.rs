//! Building blocks for depth-N computations in unramified p-adic groups:
//! truncated local-ring arithmetic, pinned Chevalley groups over a small
//! catalog, principal-series types and their Bernstein centers, and
//! brute-force (twisted) orbital integrals with stabilization checks.

pub mod error;
pub mod padic;
pub mod root_data;
pub mod scalar;

pub use error::{Error, Result};
