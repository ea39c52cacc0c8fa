//! The ω1 sweep comparing the full system with the PAS plus the explicit
//! oscillation `J0`.

use rayon::prelude::*;
use serde::Serialize;

use super::fit::log_log_slope;
use super::linear_bounds::{check_small_data, compute_alpha, source_size, trajectory_stats, SmallData, TrajectoryStats};
use crate::error::{Error, Result};
use crate::model::{Equilibrium, ModelParams};
use crate::rectangles::{InvarianceMonitor, InvarianceReport, Rectangle};
use crate::solver::{simulate, simulate_observed, Component, DtPolicy, FhnSystem, FieldState, Grid, SystemKind, Trajectory};
use crate::source::{eval_profiles, SourceParams};

/// Inputs shared by every point of a sweep. `source.omega1` is replaced by
/// each swept value.
#[derive(Debug, Clone)]
pub struct StudyParams {
    pub model: ModelParams,
    pub equilibrium: Equilibrium,
    pub source: SourceParams,
    pub grid: Grid,
    pub t_end: f64,
    pub dt_policy: DtPolicy,
    /// Centered initial data `(V, W)(0)`, shared by both systems.
    pub initial: FieldState,
    /// Rectangle monitored along the PAS run.
    pub rectangle: Option<Rectangle>,
    /// Errors are measured on `|x| ≤ window · X`; the pinned boundary values
    /// differ from `v0 + J0` in a thin layer at `±X`.
    pub window: f64,
    /// Also integrate the linear error system.
    pub linear_error: bool,
    /// The PAS step is the policy step divided by this.
    pub pas_refinement: usize,
}

/// One swept frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub omega1: f64,
    pub error_v: f64,
    pub error_w: f64,
    /// `‖F_v‖_Y`, `NaN` when the linear error system was not run.
    pub fv_ynorm: f64,
    pub fv_ynorm_times_omega: f64,
    pub dt: f64,
    pub steps: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub omega_values: Vec<f64>,
    pub errors_v: Vec<f64>,
    pub errors_w: Vec<f64>,
    /// Least-squares slope of `log error_v` against `log ω1`, sign flipped so
    /// that `O(1/ω1)` reads as order 1. `None` when an error vanishes.
    pub fitted_order: Option<f64>,
    pub fitted_order_w: Option<f64>,
    pub points: Vec<SweepPoint>,
    pub alpha: f64,
    pub small_data: SmallData,
    pub pas_stats: TrajectoryStats,
    pub pas_dt: f64,
    pub invariance: Option<InvarianceReport>,
    pub window_half_extent: f64,
}

impl SweepResult {
    pub fn monotone_decreasing(&self) -> bool {
        self.errors_v.windows(2).all(|w| w[1] < w[0])
    }

    /// `max / min` of `‖F_v‖_Y ω1` over the sweep.
    pub fn fv_spread(&self) -> Option<f64> {
        let v: Vec<f64> = self.points.iter().map(|p| p.fv_ynorm_times_omega).collect();
        if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return None;
        }
        let max = v.iter().cloned().fold(f64::MIN, f64::max);
        let min = v.iter().cloned().fold(f64::MAX, f64::min);
        Some(max / min)
    }

    /// Writes `omega1,error_v,error_w,alpha,Fv_ynorm_times_omega`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["omega1", "error_v", "error_w", "alpha", "Fv_ynorm_times_omega"])?;
        for p in &self.points {
            w.write_record([
                format!("{:e}", p.omega1),
                format!("{:e}", p.error_v),
                format!("{:e}", p.error_w),
                format!("{:e}", self.alpha),
                format!("{:e}", p.fv_ynorm_times_omega),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Smooth bump `g · (L, S) · exp(-x²/width²)` of gauge `g`.
pub fn bump_initial(grid: &Grid, rect: &Rectangle, gauge: f64, width: f64) -> FieldState {
    FieldState::from_fn(
        0.0,
        grid,
        |x| gauge * rect.l * (-(x / width).powi(2)).exp(),
        |x| gauge * rect.s * (-(x / width).powi(2)).exp(),
    )
}

/// Runs the PAS once and, for every `ω1` in parallel, the full system (and
/// optionally the linear error system), measuring
/// `sup|f - (v0 + V + J0)|` and `sup|g - (w0 + W)|` after every full-system
/// step, with `(V, W)` interpolated linearly between PAS samples.
pub fn approximation_study(params: &StudyParams, omegas: &[f64]) -> Result<SweepResult> {
    if omegas.len() < 3 || omegas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Precondition(
            "a sweep needs at least three strictly increasing frequencies".into(),
        ));
    }
    if !(params.window > 0.0 && params.window <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "window",
            value: params.window,
            reason: "must lie in (0, 1]",
        });
    }
    params.dt_policy.validate()?;
    let grid = params.grid;
    params.initial.check_shape(&grid)?;
    let eq = params.equilibrium;

    let pas_sys = FhnSystem::new(SystemKind::Pas, params.model, eq, params.source, &grid);
    let pas = simulate(
        &pas_sys,
        &grid,
        params.initial.clone(),
        params.t_end,
        params.dt_policy.dt(SystemKind::Pas, &params.source) / params.pas_refinement.max(1) as f64,
        1,
    )?;
    let pas_dt = params.t_end / (pas.len() - 1) as f64;
    let invariance = params.rectangle.map(|r| {
        let mut mon = InvarianceMonitor::new(r, InvarianceMonitor::DEFAULT_TOL);
        pas.states.iter().for_each(|s| mon.observe(s));
        mon.report()
    });
    let m = source_size(&params.source);
    let alpha = compute_alpha(&pas, m, &eq, params.model.gamma);
    let small_data = check_small_data(&pas, m, params.model.gamma, params.model.beta);
    let pas_stats = trajectory_stats(&pas);
    log::info!("PAS: {} samples, dt = {pas_dt:e}, alpha = {alpha:.4}", pas.len());

    let window_half_extent = params.window * grid.half_extent;
    let points = omegas
        .par_iter()
        .map(|&w| {
            sweep_point(params, &pas, w, window_half_extent).map_err(|e| match e {
                Error::BlowUp { system, t } => {
                    log::error!("blow-up of the {system} system at t = {t} for omega1 = {w}");
                    Error::BlowUp { system, t }
                }
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let errors_v: Vec<f64> = points.iter().map(|p| p.error_v).collect();
    let errors_w: Vec<f64> = points.iter().map(|p| p.error_w).collect();
    let order = |e: &[f64]| -> Result<Option<f64>> {
        if e.iter().all(|&x| x > 0.0) {
            Ok(Some(-log_log_slope(omegas, e)?))
        } else {
            Ok(None)
        }
    };
    Ok(SweepResult {
        omega_values: omegas.to_vec(),
        fitted_order: order(&errors_v)?,
        fitted_order_w: order(&errors_w)?,
        errors_v,
        errors_w,
        points,
        alpha,
        small_data,
        pas_stats,
        pas_dt,
        invariance,
        window_half_extent,
    })
}

fn sweep_point(params: &StudyParams, pas: &Trajectory, omega1: f64, window: f64) -> Result<SweepPoint> {
    let grid = params.grid;
    let eq = params.equilibrium;
    let source = params.source.with_omega1(omega1);
    source.validate()?;
    let dt = params.dt_policy.dt(SystemKind::Full, &source);
    let xs = grid.points();
    let inside: Vec<usize> = (0..xs.len()).filter(|&i| xs[i].abs() <= window + 1e-12).collect();
    let fields: Vec<_> = xs.iter().map(|&x| eval_profiles(&source, x)).collect();

    let full = FhnSystem::new(SystemKind::Full, params.model, eq, source, &grid);
    let initial = FieldState {
        t: 0.0,
        u1: params.initial.u1.iter().map(|v| v + eq.v0).collect(),
        u2: params.initial.u2.iter().map(|w| w + eq.w0).collect(),
    };
    let (mut error_v, mut error_w) = (0.0f64, 0.0f64);
    let (mut v, mut w) = (vec![0.0; grid.n_points], vec![0.0; grid.n_points]);
    // Every step is observed: sampling at a fixed interval can lock onto one
    // phase of the fast oscillation.
    let stats = simulate_observed(&full, &grid, initial, params.t_end, dt, 1, |s| {
        pas.component_at(s.t, Component::First, &mut v);
        pas.component_at(s.t, Component::Second, &mut w);
        let (s1, s2) = ((source.omega1 * s.t).sin(), (source.omega2() * s.t).sin());
        for &i in &inside {
            let j0 = fields[i].a * s1 + fields[i].b * s2;
            error_v = error_v.max((s.u1[i] - (eq.v0 + v[i] + j0)).abs());
            error_w = error_w.max((s.u2[i] - (eq.w0 + w[i])).abs());
        }
        Ok(())
    })?;

    let fv_ynorm = if params.linear_error {
        let lin = FhnSystem::new(SystemKind::LinearError, params.model, eq, source, &grid).with_pas(pas);
        let mut sup = 0.0f64;
        simulate_observed(&lin, &grid, FieldState::zeros(0.0, grid.n_points), params.t_end, dt, 1, |s| {
            for &i in &inside {
                sup = sup.max(s.u1[i].abs());
            }
            Ok(())
        })?;
        sup
    } else {
        f64::NAN
    };
    log::info!("omega1 = {omega1}: error_v = {error_v:e}, error_w = {error_w:e}, |F_v| = {fv_ynorm:e}");
    Ok(SweepPoint {
        omega1,
        error_v,
        error_w,
        fv_ynorm,
        fv_ynorm_times_omega: fv_ynorm * omega1,
        dt: stats.dt,
        steps: stats.steps,
        samples: stats.samples,
    })
}
