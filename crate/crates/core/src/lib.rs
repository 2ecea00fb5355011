//! Stochastic two-host (human/rodent) monkeypox transmission model.
//!
//! The crate is `no_std` and only needs `alloc`. It covers the six
//! compartment drift and 6x8 diffusion of the model, piecewise-linear
//! parameter schedules, a counter-based Gaussian increment stream,
//! Euler-Maruyama and RK4 integrators, ensemble aggregation and the
//! extinction/growth analysis built on top of them.
//!
//! IO, configuration and parallel execution live in the `mpox-sim` crate.

#![no_std]
#![deny(missing_docs)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod engine;
pub mod ensemble;
mod error;
pub mod model;
pub mod rng;
pub mod schedule;

pub use error::{DomainError, SimError};
pub use model::{Compartment, DiffusionMatrix, DriftVector, NoiseIntensities, Params, State};
pub use schedule::{ParamSchedule, Schedule};
