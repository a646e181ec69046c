//! Sharing Bell nonlocality between sequential observers on a two-qubit state.
//!
//! Each of two first observers measures an unsharp qubit observable, chosen
//! between two settings, and passes the disturbed qubit on to a second
//! observer. The crate evaluates the resulting CHSH values, the closed-form
//! thresholds for biased setting selection, and numerically searches for the
//! largest violation achievable by the second pair.

pub mod bounds;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod observable;
pub mod sampling;
pub mod search;
pub mod state;

pub use nalgebra;

pub use error::{Error, Result};
pub use metrics::{ProxyReport, Scenario};
pub use observable::{FidelityPair, Observable};
pub use state::{BlochMap, MeasurementPolicy, Side, TwoQubitState};
