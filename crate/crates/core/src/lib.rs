//! Routability of DHT routing geometries under uniform random node failure.
//!
//! [`analytic`] evaluates the reachable-component model, [`scalability`]
//! classifies geometries as `N` grows, [`sim`] checks the model against a
//! Monte Carlo simulator and [`harness`] drives experiments and reports.

pub mod analytic;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod scalability;
pub mod sim;

pub use error::{RcmError, Result};
pub use geometry::{GeometryKind, GeometrySpec};
