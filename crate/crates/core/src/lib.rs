//! Moment sequences, orthogonal polynomials and determinacy diagnostics for
//! the multivariate moment problem.

pub mod arith;
pub mod error;
pub mod multi_index;
pub mod poly;
pub mod quadrature;

pub use error::{Error, Result};
pub mod measures;
pub mod moment_core;
pub mod orthopoly;
pub mod determinacy1d;
pub mod nevanlinna;
pub mod determinacy_md;
pub mod transforms;
pub mod io;
