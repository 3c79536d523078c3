//! Quiver mutation, maximal green sequences, and certified minimal-length
//! constructions.
//!
//! The crate is organized around five pieces:
//!
//! - [`quiver`]: exchange matrices, ice quivers, mutation, framed quivers,
//!   c-/g-matrices, vertex colors, canonical keys.
//! - [`search`]: applying and verifying green sequences, breadth-first
//!   shortest-sequence certificates, exhaustive enumeration, restriction to
//!   full subquivers, exchange-graph exploration and export.
//! - [`classify`]: structural recognition of the supported mutation classes
//!   and their minimal-length formulas.
//! - [`construct`]: direct sums, pendant-branch attachment, the affine
//!   component construction, and the per-class dispatcher producing
//!   certified minimal-length sequences.
//! - [`disk`]: tagged triangulations of the once-punctured disk, flips,
//!   adjacency quivers, the boundary rotation, and the staged central
//!   construction.

pub mod classify;
pub mod construct;
pub mod disk;
pub mod error;
pub mod quiver;
pub mod search;

#[cfg(test)]
pub(crate) mod fixtures;

pub use error::{Error, Result};
pub use quiver::{CMatrix, GMatrix, IceQuiver, Quiver, VertexColor};
pub use search::{GreenSequence, SearchBudget, SearchCertificate};
