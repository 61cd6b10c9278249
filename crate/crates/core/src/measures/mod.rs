//! Measure specifications, fixture families and moment computation.

pub mod catalog;
pub mod moments;
pub mod spec;

pub use catalog::CatalogFamily;
pub use moments::{
    apply_rational, compute_moments, marginal, pushforward_moments, MomentSequence, MomentTable, MomentValue,
};
pub use spec::{parse_measure_spec, Atom, MeasureKind, MeasureSpec, PolynomialMap};
