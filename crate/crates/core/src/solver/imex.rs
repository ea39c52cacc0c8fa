use serde::{Deserialize, Serialize};

use super::grid::Grid;
use super::state::{FieldState, Trajectory};
use super::system::{Reaction, SystemKind};
use super::tridiag::ConstTridiag;
use crate::error::{Error, Result};
use crate::source::SourceParams;

/// States whose sup-norm exceeds this are treated as blown up.
const BLOW_UP_LEVEL: f64 = 1e8;

/// Time step expressed as steps per period of the fastest frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DtPolicy {
    /// Steps per period `2π/ω2` for systems with fast coefficients.
    pub steps_per_fast_period: usize,
    /// Steps per beat period `2π/η` for the averaged system.
    pub steps_per_beat: usize,
}

impl Default for DtPolicy {
    fn default() -> Self {
        Self {
            steps_per_fast_period: 40,
            steps_per_beat: 200,
        }
    }
}

impl DtPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.steps_per_fast_period == 0 || self.steps_per_beat == 0 {
            return Err(Error::Configuration(
                "dt_policy step counts must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn dt(&self, kind: SystemKind, source: &SourceParams) -> f64 {
        let tau = std::f64::consts::TAU;
        if kind.has_fast_terms() {
            tau / (source.omega2() * self.steps_per_fast_period as f64)
        } else {
            tau / (source.eta * self.steps_per_beat as f64)
        }
    }
}

/// Crank–Nicolson diffusion with a Heun (explicit trapezoidal) reaction.
///
/// Both components are pinned to the reaction's boundary values at `±X`.
pub struct ImexStepper {
    dt: f64,
    n: usize,
    ratio: [f64; 2],
    solvers: [Option<ConstTridiag>; 2],
    boundary: [f64; 2],
    explicit: [Vec<f64>; 2],
    r0: [Vec<f64>; 2],
    r1: [Vec<f64>; 2],
    forcing: Vec<f64>,
    predicted: [Vec<f64>; 2],
    warned: bool,
}

impl ImexStepper {
    pub fn new(reaction: &dyn Reaction, grid: &Grid, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "dt",
                value: dt,
                reason: "must be finite and positive",
            });
        }
        let n = grid.n_points;
        let (k1, k2) = reaction.diffusivities();
        if k1 < 0.0 || k2 < 0.0 {
            return Err(Error::Configuration("negative diffusivity".into()));
        }
        let dx2 = grid.dx() * grid.dx();
        let ratio = [k1 * dt / dx2, k2 * dt / dx2];
        let solver = |r: f64| (r > 0.0).then(|| ConstTridiag::new(n - 2, 1.0 + r, -0.5 * r));
        let (b1, b2) = reaction.boundary_values();
        Ok(Self {
            dt,
            n,
            ratio,
            solvers: [solver(ratio[0]), solver(ratio[1])],
            boundary: [b1, b2],
            explicit: [vec![0.0; n], vec![0.0; n]],
            r0: [vec![0.0; n], vec![0.0; n]],
            r1: [vec![0.0; n], vec![0.0; n]],
            forcing: vec![0.0; n],
            predicted: [vec![0.0; n], vec![0.0; n]],
            warned: false,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances `state` from `state.t` to `t1`; `t1 - state.t` must equal the
    /// factorised step up to rounding.
    pub fn advance(&mut self, reaction: &dyn Reaction, state: &mut FieldState, t1: f64) -> Result<()> {
        let n = self.n;
        if state.len() != n {
            return Err(Error::Configuration(format!(
                "state has {} points, stepper expects {n}",
                state.len()
            )));
        }
        let t0 = state.t;
        let dt = t1 - t0;
        debug_assert!((dt - self.dt).abs() <= 1e-9 * self.dt.max(t1.abs() * 1e-6));

        if !self.warned {
            let lambda = reaction.stiffness(t0, &state.u1, &state.u2);
            if lambda * dt >= 2.0 {
                log::warn!(
                    "{}: dt = {dt:e} exceeds the explicit reaction stability bound 2/{lambda:.3}",
                    reaction.name()
                );
                self.warned = true;
            }
        }

        for c in 0..2 {
            let u = if c == 0 { &state.u1 } else { &state.u2 };
            let half = 0.5 * self.ratio[c];
            let e = &mut self.explicit[c];
            e[0] = self.boundary[c];
            e[n - 1] = self.boundary[c];
            for i in 1..n - 1 {
                e[i] = u[i] + half * (u[i - 1] - 2.0 * u[i] + u[i + 1]);
            }
        }
        self.forcing.iter_mut().for_each(|f| *f = 0.0);
        reaction.add_exact_forcing(t0, t1, &mut self.forcing);

        {
            let [r0a, r0b] = &mut self.r0;
            reaction.eval(t0, &state.u1, &state.u2, r0a, r0b);
        }
        for c in 0..2 {
            let out = &mut self.predicted[c];
            for i in 0..n {
                out[i] = self.explicit[c][i] + dt * self.r0[c][i];
            }
            if c == 0 {
                out.iter_mut().zip(&self.forcing).for_each(|(o, f)| *o += f);
            }
            Self::implicit(&self.solvers[c], self.ratio[c], self.boundary[c], out);
        }
        {
            let [p1, p2] = &self.predicted;
            let [r1a, r1b] = &mut self.r1;
            reaction.eval(t1, p1, p2, r1a, r1b);
        }
        for c in 0..2 {
            let out = if c == 0 { &mut state.u1 } else { &mut state.u2 };
            for i in 0..n {
                out[i] = self.explicit[c][i] + 0.5 * dt * (self.r0[c][i] + self.r1[c][i]);
            }
            if c == 0 {
                out.iter_mut().zip(&self.forcing).for_each(|(o, f)| *o += f);
            }
            Self::implicit(&self.solvers[c], self.ratio[c], self.boundary[c], out);
        }
        state.t = t1;

        let blown = state
            .u1
            .iter()
            .chain(&state.u2)
            .any(|v| !v.is_finite() || v.abs() > BLOW_UP_LEVEL);
        if blown {
            return Err(Error::BlowUp {
                system: reaction.name(),
                t: t1,
            });
        }
        Ok(())
    }

    fn implicit(solver: &Option<ConstTridiag>, ratio: f64, boundary: f64, u: &mut [f64]) {
        let n = u.len();
        if let Some(s) = solver {
            let interior = &mut u[1..n - 1];
            let m = interior.len();
            interior[0] += 0.5 * ratio * boundary;
            interior[m - 1] += 0.5 * ratio * boundary;
            s.solve(interior);
        }
        u[0] = boundary;
        u[n - 1] = boundary;
    }
}

/// One IMEX step of size `dt`.
pub fn step_imex(state: &FieldState, dt: f64, reaction: &dyn Reaction, grid: &Grid) -> Result<FieldState> {
    state.check_shape(grid)?;
    let mut stepper = ImexStepper::new(reaction, grid, dt)?;
    let mut next = state.clone();
    stepper.advance(reaction, &mut next, state.t + dt)?;
    Ok(next)
}

/// Bookkeeping of a finished run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunStats {
    pub steps: usize,
    /// Step actually used: `(T - t0)` divided into equal steps no longer than
    /// the requested one.
    pub dt: f64,
    pub samples: usize,
}

/// Number of equal steps covering `span` with steps no longer than `dt`.
pub fn step_count(span: f64, dt: f64) -> usize {
    ((span / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

/// Integrates from `initial` to `t_end`, handing every `sample_every`-th state
/// (plus the initial and final ones) to `observer` without storing them.
pub fn simulate_observed(
    reaction: &dyn Reaction,
    grid: &Grid,
    initial: FieldState,
    t_end: f64,
    dt: f64,
    sample_every: usize,
    mut observer: impl FnMut(&FieldState) -> Result<()>,
) -> Result<RunStats> {
    initial.check_shape(grid)?;
    if !initial.is_finite() {
        return Err(Error::BlowUp {
            system: reaction.name(),
            t: initial.t,
        });
    }
    if sample_every == 0 {
        return Err(Error::Configuration("sample_every must be at least 1".into()));
    }
    let t0 = initial.t;
    if !(t_end > t0) {
        return Err(Error::Configuration(format!(
            "end time {t_end} must exceed start time {t0}"
        )));
    }
    if let Some((a, b)) = reaction.coupled_span() {
        let slack = 1e-9 * (1.0 + t_end.abs());
        if a > t0 + slack || b < t_end - slack {
            return Err(Error::Configuration(format!(
                "coupled trajectory covers [{a}, {b}], {} run needs [{t0}, {t_end}]",
                reaction.name()
            )));
        }
    }
    let steps = step_count(t_end - t0, dt);
    let dt = (t_end - t0) / steps as f64;
    let mut stepper = ImexStepper::new(reaction, grid, dt)?;
    let mut state = initial;
    observer(&state)?;
    let mut samples = 1;
    for k in 1..=steps {
        let t1 = if k == steps { t_end } else { t0 + k as f64 * dt };
        stepper.advance(reaction, &mut state, t1)?;
        if k % sample_every == 0 || k == steps {
            observer(&state)?;
            samples += 1;
        }
    }
    Ok(RunStats { steps, dt, samples })
}

/// Integrates and stores the sampled states.
pub fn simulate(
    reaction: &dyn Reaction,
    grid: &Grid,
    initial: FieldState,
    t_end: f64,
    dt: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    let mut traj = Trajectory::new(*grid);
    simulate_observed(reaction, grid, initial, t_end, dt, sample_every, |s| {
        traj.push(s.clone());
        Ok(())
    })?;
    Ok(traj)
}
