//! Two-period choice with ex post rationalization of earlier decisions.
//!
//! The crate solves decision problems for agents who adopt a rationale after the
//! fact, checks the order-theoretic comparative statics of such agents on finite
//! lattices, recovers preference primitives from simulated choices, prices two-part
//! tariffs against rationalizing consumers and runs the worked applications.

pub mod applications;
pub mod core_model;
pub mod error;
pub mod identification;
pub mod lattice;
pub mod tariff;

pub use error::{Error, Result};
