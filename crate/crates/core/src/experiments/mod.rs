//! Verification harnesses: averaging residuals, oscillatory-integral decay,
//! the contraction constant, small-data checks and the ω1 sweep.

mod averaging;
mod fit;
mod linear_bounds;
mod oscillatory;
mod quadrature;
mod sweep;

pub use averaging::{
    fit_residual_constant, pre_averaged, residual_amplitude, residual_bound_shape, verify_pas_derivation,
    window_average, PasResidual, PreAveraged, ResidualConstantFit, DEFAULT_QUAD_POINTS,
};
pub use fit::{linear_fit, log_log_slope};
pub use linear_bounds::{
    check_small_data, compute_alpha, small_data_thresholds, source_size, trajectory_stats, SmallData,
    TrajectoryStats,
};
pub use oscillatory::{
    oscillatory_decay_check, oscillatory_integral, OscillatoryDecay, OscillatoryOptions, OscillatoryValue, Profile,
};
pub use quadrature::GaussLegendre;
pub use sweep::{approximation_study, bump_initial, StudyParams, SweepPoint, SweepResult};
