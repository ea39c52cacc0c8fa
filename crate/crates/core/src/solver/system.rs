//! Reaction terms of the six reaction–diffusion systems.
//!
//! Every system has the form `∂t U - diag(1, ρ) ∂x² U = F(U, x, t)` with `F`
//! polynomial in `U`. The pointwise right-hand sides are plain functions so
//! that the rectangle certification evaluates exactly the same vector fields
//! the integrator advances.

use serde::{Deserialize, Serialize};

use super::grid::Grid;
use super::state::{Component, Trajectory};
use crate::error::{Error, Result};
use crate::model::{Equilibrium, ModelParams};
use crate::source::{coefficients_from, eval_profiles, Phases, SourceFields, SourceParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    /// `(f, g)` in original variables.
    Full,
    /// `(v, w) = (f - v0, g - w0)`.
    Centered,
    /// Partially averaged system `(V, W)`.
    Pas,
    /// Linear part `(F_v, F_w)` of the approximation error.
    LinearError,
    /// Approximation error `(E_v, E_w) = (v - V - J0, w - W)`.
    NonlinearError,
    /// `(R_v, R_w) = E - F`.
    Remainder,
}

impl SystemKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Full => "full",
            Self::Centered => "centered",
            Self::Pas => "pas",
            Self::LinearError => "linear_error",
            Self::NonlinearError => "nonlinear_error",
            Self::Remainder => "remainder",
        }
    }

    /// Whether the coefficients oscillate at `ω1`, `ω2` (otherwise only `η`).
    pub fn has_fast_terms(&self) -> bool {
        !matches!(self, Self::Pas)
    }

    fn needs_pas(&self) -> bool {
        matches!(
            self,
            Self::LinearError | Self::NonlinearError | Self::Remainder
        )
    }
}

/// Right-hand side of a semilinear system, evaluated over a whole grid.
pub trait Reaction: Sync {
    fn name(&self) -> String;

    /// Diffusion coefficients of the two components.
    fn diffusivities(&self) -> (f64, f64);

    /// Dirichlet values held at `±X`.
    fn boundary_values(&self) -> (f64, f64) {
        (0.0, 0.0)
    }

    /// Writes `F(U, x_i, t)` into `r1`, `r2`. State-independent terms that
    /// [`Reaction::add_exact_forcing`] integrates must be left out.
    fn eval(&self, t: f64, u1: &[f64], u2: &[f64], r1: &mut [f64], r2: &mut [f64]);

    /// Adds `∫_{t0}^{t1}` of a state-independent forcing of the first
    /// component to `acc`. Returns false when there is none.
    fn add_exact_forcing(&self, _t0: f64, _t1: f64, _acc: &mut [f64]) -> bool {
        false
    }

    /// Rough bound on `|∂F/∂U|` used for the explicit-step warning.
    fn stiffness(&self, _t: f64, _u1: &[f64], _u2: &[f64]) -> f64 {
        0.0
    }

    /// Time span over which coupled trajectories are available.
    fn coupled_span(&self) -> Option<(f64, f64)> {
        None
    }
}

// Pointwise right-hand sides.

/// Original variables: `(f - f³/3 - g, ε(f - γg + β))`, forcing excluded.
pub fn full_rhs(model: &ModelParams, f: f64, g: f64) -> (f64, f64) {
    (
        f - f * f * f / 3.0 - g,
        model.epsilon * (f - model.gamma * g + model.beta),
    )
}

/// Centered variables, forcing excluded.
pub fn centered_rhs(model: &ModelParams, v0: f64, v: f64, w: f64) -> (f64, f64) {
    (
        (1.0 - v0 * v0) * v - v0 * v * v - v * v * v / 3.0 - w,
        model.epsilon * (v - model.gamma * w),
    )
}

/// Partially averaged system; `env = A²/2 + B²/2 + AB cos(ηt)`.
pub fn pas_rhs(model: &ModelParams, v0: f64, env: f64, v: f64, w: f64) -> (f64, f64) {
    (
        (1.0 - v0 * v0 - env) * v - v0 * v * v - v * v * v / 3.0 - w - env * v0,
        model.epsilon * (v - model.gamma * w),
    )
}

/// Coefficients shared by the three error systems at one point.
#[derive(Debug, Clone, Copy)]
pub struct ErrorPoint {
    /// `v0 + V`
    pub shifted: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
    pub j0: f64,
}

impl ErrorPoint {
    pub fn new(source: &SourceParams, v0: f64, fields: &SourceFields, t: f64, v: f64) -> Self {
        Self::from_coefficients(v0, v, coefficients_from(source, v0, fields, t, v))
    }

    fn from_coefficients(v0: f64, v: f64, c: crate::source::ErrorCoefficients) -> Self {
        Self {
            shifted: v0 + v,
            phi1: c.phi1,
            phi2: c.phi2,
            phi3: c.phi3,
            j0: c.j0,
        }
    }

    fn linear_coeff(&self) -> f64 {
        1.0 - self.shifted * self.shifted + self.phi1
    }
}

pub fn linear_error_rhs(model: &ModelParams, p: &ErrorPoint, fv: f64, fw: f64) -> (f64, f64) {
    (
        p.linear_coeff() * fv - fw + p.phi3,
        model.epsilon * (fv - model.gamma * fw + p.j0),
    )
}

pub fn nonlinear_error_rhs(model: &ModelParams, p: &ErrorPoint, ev: f64, ew: f64) -> (f64, f64) {
    (
        p.linear_coeff() * ev + p.phi2 * ev * ev - ev * ev * ev / 3.0 - ew + p.phi3,
        model.epsilon * (ev - model.gamma * ew + p.j0),
    )
}

/// Vector field of the remainder system; `fv` is the linear error at the point.
pub fn remainder_rhs(model: &ModelParams, p: &ErrorPoint, fv: f64, rv: f64, rw: f64) -> (f64, f64) {
    let s = rv + fv;
    (
        p.linear_coeff() * rv - rv * rv * rv / 3.0 - rw - rv * rv * fv - rv * fv * fv
            - fv * fv * fv / 3.0
            + p.phi2 * s * s,
        model.epsilon * (rv - model.gamma * rw),
    )
}

/// One of the FitzHugh–Nagumo systems on a fixed grid.
#[derive(Debug, Clone)]
pub struct FhnSystem<'a> {
    kind: SystemKind,
    model: ModelParams,
    equilibrium: Equilibrium,
    source: SourceParams,
    fields: Vec<SourceFields>,
    pas: Option<&'a Trajectory>,
    linear: Option<&'a Trajectory>,
}

impl<'a> FhnSystem<'a> {
    pub fn new(
        kind: SystemKind,
        model: ModelParams,
        equilibrium: Equilibrium,
        source: SourceParams,
        grid: &Grid,
    ) -> Self {
        let fields = grid.points().iter().map(|&x| eval_profiles(&source, x)).collect();
        Self {
            kind,
            model,
            equilibrium,
            source,
            fields,
            pas: None,
            linear: None,
        }
    }

    /// Couples the `(V, W)` trajectory used by the error systems.
    pub fn with_pas(mut self, pas: &'a Trajectory) -> Self {
        self.pas = Some(pas);
        self
    }

    /// Couples the `(F_v, F_w)` trajectory used by the remainder system.
    pub fn with_linear_error(mut self, linear: &'a Trajectory) -> Self {
        self.linear = Some(linear);
        self
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn source(&self) -> &SourceParams {
        &self.source
    }

    /// Checks that the coupled trajectories exist, match the grid and cover
    /// `[t0, t1]`.
    pub fn check_coupling(&self, grid: &Grid, t0: f64, t1: f64) -> Result<()> {
        let need = |traj: Option<&Trajectory>, what: &str| -> Result<()> {
            let traj = traj.ok_or_else(|| {
                Error::Configuration(format!(
                    "{} system needs a coupled {what} trajectory",
                    self.kind.name()
                ))
            })?;
            if traj.grid != *grid {
                return Err(Error::Configuration(format!(
                    "coupled {what} trajectory lives on a different grid"
                )));
            }
            if !traj.covers(t0, t1) {
                return Err(Error::Configuration(format!(
                    "coupled {what} trajectory covers [{}, {}], simulation needs [{t0}, {t1}]",
                    traj.start_time(),
                    traj.end_time()
                )));
            }
            Ok(())
        };
        if self.kind.needs_pas() {
            need(self.pas, "PAS")?;
        }
        if self.kind == SystemKind::Remainder {
            need(self.linear, "linear-error")?;
        }
        Ok(())
    }

    fn coupled(traj: Option<&Trajectory>, t: f64, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        if let Some(tr) = traj {
            tr.component_at(t, Component::First, &mut out);
        }
        out
    }
}

impl Reaction for FhnSystem<'_> {
    fn name(&self) -> String {
        self.kind.name().to_string()
    }

    fn diffusivities(&self) -> (f64, f64) {
        (1.0, self.model.rho)
    }

    fn boundary_values(&self) -> (f64, f64) {
        match self.kind {
            SystemKind::Full => (self.equilibrium.v0, self.equilibrium.w0),
            _ => (0.0, 0.0),
        }
    }

    fn eval(&self, t: f64, u1: &[f64], u2: &[f64], r1: &mut [f64], r2: &mut [f64]) {
        let m = &self.model;
        let v0 = self.equilibrium.v0;
        let n = u1.len();
        match self.kind {
            SystemKind::Full => {
                for i in 0..n {
                    (r1[i], r2[i]) = full_rhs(m, u1[i], u2[i]);
                }
            }
            SystemKind::Centered => {
                for i in 0..n {
                    (r1[i], r2[i]) = centered_rhs(m, v0, u1[i], u2[i]);
                }
            }
            SystemKind::Pas => {
                let beat = (self.source.eta * t).cos();
                for (i, f) in self.fields.iter().enumerate() {
                    let env = 0.5 * f.a * f.a + 0.5 * f.b * f.b + f.a * f.b * beat;
                    (r1[i], r2[i]) = pas_rhs(m, v0, env, u1[i], u2[i]);
                }
            }
            SystemKind::LinearError | SystemKind::NonlinearError => {
                let v = Self::coupled(self.pas, t, n);
                let ph = Phases::new(&self.source, t);
                for (i, f) in self.fields.iter().enumerate() {
                    let p = ErrorPoint::from_coefficients(v0, v[i], ph.coefficients(v0, f, v[i]));
                    (r1[i], r2[i]) = if self.kind == SystemKind::LinearError {
                        linear_error_rhs(m, &p, u1[i], u2[i])
                    } else {
                        nonlinear_error_rhs(m, &p, u1[i], u2[i])
                    };
                }
            }
            SystemKind::Remainder => {
                let v = Self::coupled(self.pas, t, n);
                let fv = Self::coupled(self.linear, t, n);
                let ph = Phases::new(&self.source, t);
                for (i, f) in self.fields.iter().enumerate() {
                    let p = ErrorPoint::from_coefficients(v0, v[i], ph.coefficients(v0, f, v[i]));
                    (r1[i], r2[i]) = remainder_rhs(m, &p, fv[i], u1[i], u2[i]);
                }
            }
        }
    }

    /// The input current `I = ∂t J0` integrates exactly to `J0(t1) - J0(t0)`.
    fn add_exact_forcing(&self, t0: f64, t1: f64, acc: &mut [f64]) -> bool {
        if !matches!(self.kind, SystemKind::Full | SystemKind::Centered) {
            return false;
        }
        let (w1, w2) = (self.source.omega1, self.source.omega2());
        let d1 = (w1 * t1).sin() - (w1 * t0).sin();
        let d2 = (w2 * t1).sin() - (w2 * t0).sin();
        for (a, f) in acc.iter_mut().zip(&self.fields) {
            *a += f.a * d1 + f.b * d2;
        }
        true
    }

    fn stiffness(&self, t: f64, u1: &[f64], _u2: &[f64]) -> f64 {
        let v0 = self.equilibrium.v0;
        let shift = match self.kind {
            SystemKind::Full => 0.0,
            _ => v0,
        };
        let n = u1.len();
        let coupled = match self.kind {
            SystemKind::Full | SystemKind::Centered | SystemKind::Pas => vec![0.0; n],
            _ => Self::coupled(self.pas, t, n),
        };
        let voltage = u1
            .iter()
            .zip(&coupled)
            .map(|(u, v)| (1.0 - (shift + u + v).powi(2)).abs())
            .fold(0.0, f64::max);
        voltage + self.model.epsilon * self.model.gamma + 1.0
    }

    fn coupled_span(&self) -> Option<(f64, f64)> {
        let spans = [self.pas, self.linear]
            .into_iter()
            .flatten()
            .map(|t| (t.start_time(), t.end_time()));
        spans.reduce(|a, b| (a.0.max(b.0), a.1.min(b.1)))
    }
}

/// A reaction given by a pointwise closure `(x, t, u1, u2) -> (r1, r2)`.
pub struct FnReaction<F> {
    xs: Vec<f64>,
    diffusivities: (f64, f64),
    f: F,
}

impl<F> FnReaction<F>
where
    F: Fn(f64, f64, f64, f64) -> (f64, f64) + Sync,
{
    pub fn new(grid: &Grid, diffusivities: (f64, f64), f: F) -> Self {
        Self {
            xs: grid.points(),
            diffusivities,
            f,
        }
    }
}

impl<F> Reaction for FnReaction<F>
where
    F: Fn(f64, f64, f64, f64) -> (f64, f64) + Sync,
{
    fn name(&self) -> String {
        "custom".into()
    }

    fn diffusivities(&self) -> (f64, f64) {
        self.diffusivities
    }

    fn eval(&self, t: f64, u1: &[f64], u2: &[f64], r1: &mut [f64], r2: &mut [f64]) {
        for (i, &x) in self.xs.iter().enumerate() {
            (r1[i], r2[i]) = (self.f)(x, t, u1[i], u2[i]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::solve_equilibrium;
    use crate::source::{eval_time_fields, j0};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (ModelParams, Equilibrium, SourceParams) {
        let m = ModelParams::new(0.5, 8.0, 6.0, 0.0).unwrap();
        let eq = solve_equilibrium(6.0, 8.0, 1e-12).unwrap();
        let s = SourceParams::new(0.3, -0.2, 1.0, 1.5, 0.8, 37.0, 1.3).unwrap();
        (m, eq, s)
    }

    /// Substituting `v = V + J0 + E`, `w = W + E_w` into the centered system and
    /// subtracting the averaged one must give the error system, pointwise.
    #[test]
    fn error_system_is_the_difference_of_centered_and_pas() {
        let (m, eq, s) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let x = rng.random_range(-4.0..4.0);
            let t = rng.random_range(0.0..10.0);
            let (vv, ww) = (rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
            let (ev, ew) = (rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3));
            let f = eval_profiles(&s, x);
            let tf = eval_time_fields(&s, x, t);
            let j = j0(&s, &f, t);
            let jxx = f.a_xx * (s.omega1 * t).sin() + f.b_xx * (s.omega2() * t).sin();

            let c = centered_rhs(&m, eq.v0, vv + j + ev, ww + ew);
            let p = pas_rhs(&m, eq.v0, tf.envelope, vv, ww);
            let expected = (c.0 - p.0 + jxx, c.1 - p.1);

            let pt = ErrorPoint::new(&s, eq.v0, &f, t, vv);
            let got = nonlinear_error_rhs(&m, &pt, ev, ew);
            assert!((got.0 - expected.0).abs() < 1e-12, "{got:?} vs {expected:?}");
            assert!((got.1 - expected.1).abs() < 1e-12);

            // remainder = error - linear, with E = F + R
            let fv = rng.random_range(-0.2..0.2);
            let fw = rng.random_range(-0.2..0.2);
            let lin = linear_error_rhs(&m, &pt, fv, fw);
            let full = nonlinear_error_rhs(&m, &pt, fv + ev, fw + ew);
            let rem = remainder_rhs(&m, &pt, fv, ev, ew);
            assert!((full.0 - lin.0 - rem.0).abs() < 1e-12);
            assert!((full.1 - lin.1 - rem.1).abs() < 1e-12);
        }
    }

    #[test]
    fn full_and_centered_agree_after_shift() {
        let (m, eq, _) = setup();
        for &(v, w) in &[(0.0, 0.0), (0.3, -0.1), (-0.7, 0.2)] {
            let a = full_rhs(&m, eq.v0 + v, eq.w0 + w);
            let b = centered_rhs(&m, eq.v0, v, w);
            assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
        }
    }

    #[test]
    fn coupling_is_required() {
        let (m, eq, s) = setup();
        let g = Grid::new(5.0, 11).unwrap();
        let sys = FhnSystem::new(SystemKind::LinearError, m, eq, s, &g);
        assert!(matches!(
            sys.check_coupling(&g, 0.0, 1.0),
            Err(Error::Configuration(_))
        ));
        let mut pas = Trajectory::new(g);
        pas.push(crate::solver::FieldState::zeros(0.0, 11));
        pas.push(crate::solver::FieldState::zeros(0.5, 11));
        let sys = sys.with_pas(&pas);
        assert!(sys.check_coupling(&g, 0.0, 0.5).is_ok());
        assert!(matches!(
            sys.check_coupling(&g, 0.0, 1.0),
            Err(Error::Configuration(_))
        ));
    }
}
