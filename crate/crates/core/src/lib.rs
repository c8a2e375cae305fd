//! Hidden-variable models of two- and multi-party correlation experiments.
//!
//! A model assigns each setting tuple a prior over an underlying variable λ
//! and, for each λ, a joint outcome distribution. The crate measures how far
//! a model departs from determinism, outcome independence, no signaling and
//! measurement independence, converts those departures into information
//! capacities, and evaluates the Bell-type bounds they permit, both in closed
//! form and by linear programming.
//!
//! Table-valued code is generic over [`Scalar`]; `f64`, `f32` and the exact
//! [`Rational`] type are supported.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod info;
pub mod lp;
pub mod measures;
pub mod model;
pub mod report;
pub mod scalar;
pub mod transforms;
pub mod zoo;

pub use error::{Error, Result};
pub use model::{CorrelationTable, NPartyModel};
pub use scalar::{Rational, Scalar};

/// Floating-point model, the default for file input and capacities.
pub type Model = NPartyModel<f64>;
/// Model with exact rational probabilities.
pub type ExactModel = NPartyModel<Rational>;
