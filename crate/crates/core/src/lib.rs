//! Simulation and numerical verification tools for the one-dimensional
//! FitzHugh–Nagumo cable equation driven by two interfering sinusoidal
//! current sources.
//!
//! The crate is organised around the quantities that appear when the
//! fast oscillation of the source is averaged out while the slow beat
//! envelope `cos(ηt)` is kept:
//!
//! * [`model`]: admissible reaction parameters and the resting equilibrium.
//! * [`source`]: the two-source stimulus, its envelope and the coefficient
//!   fields of the approximation-error equations.
//! * [`solver`]: a Crank–Nicolson / Heun method-of-lines integrator for the
//!   full, centered, partially averaged and error systems, plus a heat-kernel
//!   Duhamel solver used as an independent check.
//! * [`rectangles`]: contracting-rectangle construction and certification.
//! * [`experiments`]: averaging residuals, oscillatory-integral decay,
//!   contraction constants and the frequency sweep of the approximation error.
//! * [`cli`]: JSON run configurations, study orchestration and manifests.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod model;
pub mod rectangles;
pub mod solver;
pub mod source;

pub use error::{Error, Result};
pub use model::{Equilibrium, ModelParams};
pub use rectangles::Rectangle;
pub use solver::{FieldState, Grid, SystemKind, Trajectory};
pub use source::SourceParams;
