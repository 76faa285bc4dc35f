//! Rental listings analytics: cleaning and geocoding raw adverts, validating
//! coverage and rents against reference data, and fitting penalized
//! spatiotemporal additive models of log rent.

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod gam;
pub mod linalg;
pub mod ingest;
pub mod splines;
pub mod validate;

pub use error::{Error, Result};
pub use exec::Execution;
