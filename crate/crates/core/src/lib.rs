//! Numerical core for estimating push-forwards of analytic maps on jets.
//!
//! Everything here works without the standard library; file formats and the
//! command line live in the companion `jetflow` crate.

#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod fock;
pub mod hankel;
pub mod jets;
pub mod linalg;
pub mod maps;
pub mod multiindex;
pub mod pushforward;
pub mod quadrature;
pub mod reconstruct;
pub mod sampling;
pub mod softfloat;
pub mod vectorfield;

/// Version of this crate.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use fock::{DomainSpec, FockBasis, Geometry, Provenance, SampleSet};
pub use hankel::{HankelSpectrum, MeasureSpec, RationalMatrix};
pub use jets::{Jet, JetSpace};
pub use maps::{parse_map, Expr, MapExpr};
pub use multiindex::{graded_numbering, jet_dimension, MultiIndex, MultiIndexTable};
pub use pushforward::{estimate_pushforward, oracle_pushforward, OraclePushforward, PushforwardEstimate};
pub use softfloat::SoftFloat;
