//! Method-of-lines integration of the reaction–diffusion systems and the
//! heat-kernel Duhamel solver for the linear error system.

mod grid;
mod heat;
mod imex;
pub mod io;
mod picard;
mod state;
mod system;
mod tridiag;

pub use grid::{Grid, Truncation};
pub use heat::{heat_propagate, HeatKernel};
pub use imex::{simulate, simulate_observed, step_count, step_imex, DtPolicy, ImexStepper, RunStats};
pub use picard::{picard_linear_error, PicardOptions, PicardReport};
pub use state::{y_norm, Component, FieldState, Trajectory};
pub use system::{
    centered_rhs, full_rhs, linear_error_rhs, nonlinear_error_rhs, pas_rhs, remainder_rhs,
    ErrorPoint, FhnSystem, FnReaction, Reaction, SystemKind,
};
pub use tridiag::ConstTridiag;
