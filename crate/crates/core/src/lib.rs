//! Coupling-based convergence-rate bounds for the overshoot of a renewal
//! process.
//!
//! The crate has three layers:
//!
//! * [`distributions`] and [`renewal`]: lifetime laws (with residual and
//!   stationary-overshoot derivatives) and simulation of the overshoot
//!   `B_t` / undershoot `W_t` processes.
//! * [`coupling`]: the common-part ("basic coupling lemma") sampler, its
//!   n-way form, and a parallel-coupling simulator that drives two overshoot
//!   processes until they renew at the same instant.
//! * [`bounds`] and [`verify`]: the analytic quantities (Lorden's `Ξ`, `κ(Θ)`,
//!   `ϰ = p₀κ`, the moment majorants `Υ`, `Υ̃`, the exponential constant
//!   `K_β`) and a Monte Carlo harness that checks the resulting
//!   total-variation rate curves against simulation.

// `!(x > 0.0)` guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod coupling;
pub mod distributions;
pub mod error;
pub mod quadrature;
pub mod renewal;
pub mod solve;
pub mod stats;
pub mod stream;
pub mod verify;

pub use error::{Error, Result};
