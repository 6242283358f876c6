//! Deterministic simulator for focusing light through a scattering medium
//! with a genetic algorithm over binary amplitude masks.
//!
//! * [`rng`]: Trivium keystream and the samplers built on it.
//! * [`medium`]: transmission matrix, forward model, detector and ADC.
//! * [`ga`]: mutation schedules, operators and the iteration loop.
//! * [`metrics`]: enhancement, normalized convergence, convergence efficiency.
//! * [`timing`]: latency model of the hardware pipeline.
//! * [`harness`]: configuration, experiment orchestration and file output.

pub mod bits;
pub mod error;
pub mod ga;
pub mod harness;
pub mod medium;
pub mod metrics;
pub mod rng;
pub mod timing;

pub use bits::{BitVec, Mask};
pub use error::{Error, Result};
