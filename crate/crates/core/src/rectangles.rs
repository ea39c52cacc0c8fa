//! Contracting rectangles `[-L, L] × [-S, S]` for the averaged and remainder
//! vector fields, invariance monitoring and the error rectangle `L̂`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Equilibrium, ModelParams};
use crate::solver::{pas_rhs, remainder_rhs, Component, ErrorPoint, FieldState, Trajectory};
use crate::source::{envelope, eval_profiles, SourceParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "S")]
    pub s: f64,
}

impl Rectangle {
    pub fn new(l: f64, s: f64) -> Result<Self> {
        for (name, v) in [("rectangle.L", l), ("rectangle.S", s)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be finite and positive",
                });
            }
        }
        Ok(Self { l, s })
    }

    /// `inf{r > 0 : (u1, u2) ∈ r R}` for a single point.
    pub fn gauge(&self, u1: f64, u2: f64) -> f64 {
        (u1.abs() / self.l).max(u2.abs() / self.s)
    }
}

/// Right-hand side of the third membership inequality of `D(Δ)`.
pub fn d_delta_bound(l: f64, s: f64, v0: f64, delta: f64) -> f64 {
    (v0 * v0 - 1.0 - s / l) / (delta * delta * (-v0 - l) / (l * l) + (-v0 - l / 3.0))
}

/// Membership of `(L, S)` in the closed-form contracting set `D(Δ)`.
pub fn in_d_delta(rect: &Rectangle, v0: f64, gamma: f64, delta: f64) -> bool {
    let (l, s) = (rect.l, rect.s);
    let ratio = s / l;
    l > 0.0
        && l < v0.abs()
        && 1.0 / gamma < ratio
        && ratio < v0 * v0 - 1.0
        && l < d_delta_bound(l, s, v0, delta)
}

/// Aspect margin `ϵ` in `S = (1+ϵ)L/γ`: half the slack in `(1+ϵ)/γ < v0² - 1`.
pub fn aspect_margin(v0: f64, gamma: f64) -> f64 {
    0.5 * (gamma * (v0 * v0 - 1.0) - 1.0)
}

/// A rectangle `(L, (1+ϵ)L/γ)` in `D(Δ)` with `max(L, S) ≤ bound`.
///
/// `L` starts at `0.9 min(|v0|, bound, γ bound/(1+ϵ))` and is halved. For
/// `Δ > 0` the admissible `L` form an interval bounded away from zero that
/// halving can step over, so a finer geometric scan (ratio `2^{1/16}`) over the
/// same range follows before giving up.
pub fn find_rectangle(v0: f64, gamma: f64, delta: f64, bound: f64) -> Option<Rectangle> {
    if !(v0 * v0 - 1.0 > 1.0 / gamma) || !(bound > 0.0) || !(delta >= 0.0) {
        return None;
    }
    let eps = aspect_margin(v0, gamma);
    let aspect = (1.0 + eps) / gamma;
    let start = 0.9 * v0.abs().min(bound).min(bound / aspect);
    let floor = 1e-12 * v0.abs();
    let candidate = |l: f64| {
        let r = Rectangle { l, s: aspect * l };
        in_d_delta(&r, v0, gamma, delta).then_some(r)
    };
    let mut l = start;
    while l > floor {
        if let Some(r) = candidate(l) {
            return Some(r);
        }
        l *= 0.5;
    }
    let ratio = 2f64.powf(-1.0 / 16.0);
    let mut l = start;
    while l > floor {
        if let Some(r) = candidate(l) {
            return Some(r);
        }
        l *= ratio;
    }
    None
}

/// Largest `Δ` (to relative `1e-6`) for which [`find_rectangle`] succeeds.
/// Empirical: it depends on `bound` and on the search recipe.
pub fn empirical_delta_star(v0: f64, gamma: f64, bound: f64) -> f64 {
    let ok = |d: f64| find_rectangle(v0, gamma, d, bound).is_some();
    if !ok(0.0) {
        return 0.0;
    }
    let mut hi = 1e-3;
    while ok(hi) && hi < 1e6 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Face {
    Top,
    Bottom,
    Left,
    Right,
}

impl Face {
    pub const ALL: [Face; 4] = [Face::Top, Face::Bottom, Face::Left, Face::Right];

    /// Point on the face at parameter `s ∈ [-1, 1]` and the outward normal
    /// component `n · (F1, F2)`.
    fn point(self, rect: &Rectangle, s: f64) -> (f64, f64) {
        match self {
            Face::Top => (s * rect.l, rect.s),
            Face::Bottom => (s * rect.l, -rect.s),
            Face::Left => (-rect.l, s * rect.s),
            Face::Right => (rect.l, s * rect.s),
        }
    }

    fn normal(self, f: (f64, f64)) -> f64 {
        match self {
            Face::Top => f.1,
            Face::Bottom => -f.1,
            Face::Left => -f.0,
            Face::Right => f.0,
        }
    }
}

/// Vector field whose flux through the rectangle is sampled.
#[derive(Debug, Clone, Copy)]
pub enum VectorField<'a> {
    /// Averaged system field `H((V, W), x, t)`.
    H,
    /// Remainder field `X((R_v, R_w), x, t)`, with `V` and `F_v` read from the
    /// given trajectories.
    X {
        pas: &'a Trajectory,
        linear: &'a Trajectory,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FaceSampling {
    /// Uniform points on `[-X, X]`; `0` and `x0` are always added.
    pub x_samples: usize,
    pub half_extent: f64,
    /// Uniform times on `[0, t_end]`, both ends included.
    pub t_samples: usize,
    pub t_end: f64,
    /// Points per face, corners included.
    pub face_samples: usize,
    /// Jitters the interior `x` samples by up to half a spacing.
    pub jitter_seed: Option<u64>,
}

impl Default for FaceSampling {
    fn default() -> Self {
        Self {
            x_samples: 2001,
            half_extent: 80.0,
            t_samples: 200,
            t_end: std::f64::consts::TAU,
            face_samples: 21,
            jitter_seed: None,
        }
    }
}

impl FaceSampling {
    pub fn x_points(&self, source: &SourceParams) -> Vec<f64> {
        let n = self.x_samples.max(2);
        let h = 2.0 * self.half_extent / (n - 1) as f64;
        let mut rng = self.jitter_seed.map(ChaCha8Rng::seed_from_u64);
        let mut xs: Vec<f64> = (0..n)
            .map(|i| {
                let x = -self.half_extent + i as f64 * h;
                match rng.as_mut() {
                    Some(r) if i > 0 && i < n - 1 => x + r.random_range(-0.5..0.5) * h,
                    _ => x,
                }
            })
            .collect();
        xs.push(0.0);
        xs.push(source.x0);
        xs
    }

    pub fn t_points(&self) -> Vec<f64> {
        let n = self.t_samples.max(1);
        if n == 1 {
            return vec![0.0];
        }
        (0..n).map(|k| self.t_end * k as f64 / (n - 1) as f64).collect()
    }

    pub fn total(&self) -> usize {
        (self.x_samples.max(2) + 2) * self.t_samples.max(1) * 4 * self.face_samples.max(2)
    }
}

/// Largest outward flux found and where.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxReport {
    pub margin: f64,
    pub face: Face,
    pub x: f64,
    pub t: f64,
    pub u1: f64,
    pub u2: f64,
    pub samples: usize,
}

/// Maximum of `n · field` over the sampled faces, positions and times.
/// Negative values certify contraction at the sampled resolution.
pub fn face_flux_report(
    field: VectorField<'_>,
    rect: &Rectangle,
    model: &ModelParams,
    equilibrium: &Equilibrium,
    source: &SourceParams,
    sampling: &FaceSampling,
) -> Result<FluxReport> {
    if let VectorField::X { pas, linear } = field {
        for (what, tr) in [("PAS", pas), ("linear-error", linear)] {
            if !tr.covers(0.0, sampling.t_end) {
                return Err(Error::Configuration(format!(
                    "{what} trajectory does not cover [0, {}]",
                    sampling.t_end
                )));
            }
        }
    }
    let xs = sampling.x_points(source);
    let ts = sampling.t_points();
    let m = sampling.face_samples.max(2);
    let params: Vec<f64> = (0..m).map(|k| -1.0 + 2.0 * k as f64 / (m - 1) as f64).collect();
    let v0 = equilibrium.v0;

    let per_time = |t: f64| -> FluxReport {
        let coupled = match field {
            VectorField::H => None,
            VectorField::X { pas, linear } => Some((
                interpolate_at(pas, t, &xs),
                interpolate_at(linear, t, &xs),
            )),
        };
        let mut best = FluxReport {
            margin: f64::NEG_INFINITY,
            face: Face::Top,
            x: 0.0,
            t,
            u1: 0.0,
            u2: 0.0,
            samples: 0,
        };
        for (i, &x) in xs.iter().enumerate() {
            let f = eval_profiles(source, x);
            let env = envelope(f.a, f.b, source.eta, t);
            let point = coupled
                .as_ref()
                .map(|(v, fv)| (ErrorPoint::new(source, v0, &f, t, v[i]), fv[i]));
            for face in Face::ALL {
                for &s in &params {
                    let (u1, u2) = face.point(rect, s);
                    let rhs = match &point {
                        None => pas_rhs(model, v0, env, u1, u2),
                        Some((p, fv)) => remainder_rhs(model, p, *fv, u1, u2),
                    };
                    let flux = face.normal(rhs);
                    if flux > best.margin {
                        best = FluxReport {
                            margin: flux,
                            face,
                            x,
                            t,
                            u1,
                            u2,
                            samples: 0,
                        };
                    }
                }
            }
        }
        best
    };
    let mut best = ts
        .par_iter()
        .map(|&t| per_time(t))
        .reduce_with(|a, b| if b.margin > a.margin { b } else { a })
        .expect("at least one time sample");
    best.samples = xs.len() * ts.len() * 4 * m;
    Ok(best)
}

/// [`face_flux_report`] reduced to the margin.
pub fn face_flux_margin(
    field: VectorField<'_>,
    rect: &Rectangle,
    model: &ModelParams,
    equilibrium: &Equilibrium,
    source: &SourceParams,
    sampling: &FaceSampling,
) -> Result<f64> {
    face_flux_report(field, rect, model, equilibrium, source, sampling).map(|r| r.margin)
}

fn interpolate_at(traj: &Trajectory, t: f64, xs: &[f64]) -> Vec<f64> {
    let g = traj.grid;
    let mut row = vec![0.0; g.n_points];
    traj.component_at(t, Component::First, &mut row);
    xs.iter()
        .map(|&x| {
            let f = ((x + g.half_extent) / g.dx()).clamp(0.0, (g.n_points - 1) as f64);
            let j = (f.floor() as usize).min(g.n_points - 2);
            let w = f - j as f64;
            row[j] + w * (row[j + 1] - row[j])
        })
        .collect()
}

/// `max_x max(|u1|/L, |u2|/S)`.
pub fn gauge_norm(state: &FieldState, rect: &Rectangle) -> f64 {
    state
        .u1
        .iter()
        .zip(&state.u2)
        .map(|(&a, &b)| rect.gauge(a, b))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub invariant: bool,
    pub max_gauge: f64,
    pub first_exit_time: Option<f64>,
    pub samples: usize,
}

/// Streaming form of [`monitor_invariance`], usable as a simulation observer.
#[derive(Debug, Clone)]
pub struct InvarianceMonitor {
    rect: Rectangle,
    tol: f64,
    report: InvarianceReport,
}

impl InvarianceMonitor {
    pub const DEFAULT_TOL: f64 = 1e-6;

    pub fn new(rect: Rectangle, tol: f64) -> Self {
        Self {
            rect,
            tol,
            report: InvarianceReport {
                invariant: true,
                max_gauge: 0.0,
                first_exit_time: None,
                samples: 0,
            },
        }
    }

    pub fn observe(&mut self, state: &FieldState) {
        let g = gauge_norm(state, &self.rect);
        let r = &mut self.report;
        r.samples += 1;
        r.max_gauge = r.max_gauge.max(g);
        if g > 1.0 + self.tol && r.first_exit_time.is_none() {
            r.invariant = false;
            r.first_exit_time = Some(state.t);
        }
    }

    pub fn report(&self) -> InvarianceReport {
        self.report
    }
}

pub fn monitor_invariance(trajectory: &Trajectory, rect: &Rectangle, tol: f64) -> InvarianceReport {
    let mut m = InvarianceMonitor::new(*rect, tol);
    trajectory.states.iter().for_each(|s| m.observe(s));
    m.report()
}

/// Measured constants entering the remainder-rectangle construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRectangleInputs {
    /// Bound on `‖V‖_Y`.
    pub c1: f64,
    /// Bound on `‖φ1‖_Y`.
    pub c2: f64,
    /// Bound on `|F_v|`.
    pub c3: f64,
    /// `ϵ` in `S = (1+ϵ)L/γ`.
    pub eps_margin: f64,
    pub v0: f64,
    pub gamma: f64,
}

impl ErrorRectangleInputs {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c1", self.c1),
            ("c2", self.c2),
            ("c3", self.c3),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be finite and non-negative",
                });
            }
        }
        if !(self.eps_margin > 0.0 && self.gamma > 0.0) {
            return Err(Error::Precondition(
                "eps_margin and gamma must be positive".into(),
            ));
        }
        if !(self.slack() > 0.0) {
            return Err(Error::Precondition(format!(
                "v0² - 1 - (1+eps)/gamma = {} must be positive",
                self.slack()
            )));
        }
        Ok(())
    }

    fn slack(&self) -> f64 {
        self.v0 * self.v0 - 1.0 - (1.0 + self.eps_margin) / self.gamma
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorRectangle {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub l_hat: f64,
    /// `P = 0`, so `L̂ = 0` and no rectangle of positive size is produced.
    pub degenerate: bool,
}

impl ErrorRectangle {
    pub fn rectangle(&self, inputs: &ErrorRectangleInputs) -> Option<Rectangle> {
        (!self.degenerate).then(|| Rectangle {
            l: self.l_hat,
            s: (1.0 + inputs.eps_margin) / inputs.gamma * self.l_hat,
        })
    }
}

/// Coefficients of `P - QL + RL²` and its smaller root `L̂`; `None` when
/// `Q ≤ 0` or `4PR ≥ Q²`.
///
/// `L̂ = (Q - √(Q² - 4PR))/(2R)` is evaluated as `2P/(Q + √(Q² - 4PR))`, the
/// same number without the cancellation for small `P`.
pub fn error_rectangle(inputs: &ErrorRectangleInputs) -> Option<ErrorRectangle> {
    let ErrorRectangleInputs { c1, c2, c3, v0, .. } = *inputs;
    let a = v0.abs();
    let k = a + c1 + 1.0;
    let p = c3.powi(3) / 3.0 + k * c3 * c3;
    let q = inputs.slack() - ((2.0 * a + c1) * c1 + c2 + c3 * c3 + 2.0 * k * c3);
    let r = k + c3;
    let disc = q * q - 4.0 * p * r;
    if !(q > 0.0) || !(disc > 0.0) {
        return None;
    }
    let l_hat = 2.0 * p / (q + disc.sqrt());
    Some(ErrorRectangle {
        p,
        q,
        r,
        l_hat,
        degenerate: p == 0.0,
    })
}

/// Smaller root of `P - QL + RL²` by bisection on `[0, Q/(2R)]`.
pub fn smaller_root_bisection(p: f64, q: f64, r: f64) -> f64 {
    let g = |l: f64| p - q * l + r * l * l;
    let (mut lo, mut hi) = (0.0, q / (2.0 * r));
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return if g(lo).abs() <= g(hi).abs() { lo } else { hi };
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::solve_equilibrium;

    fn v0() -> f64 {
        solve_equilibrium(6.0, 8.0, 1e-12).unwrap().v0
    }

    #[test]
    fn membership_examples() {
        let v0 = v0();
        let r = Rectangle::new(0.5, 0.5).unwrap();
        assert!(in_d_delta(&r, v0, 8.0, 0.1));
        // frozen from direct evaluation of the third inequality
        assert!((d_delta_bound(0.5, 0.5, v0, 0.1) - 0.9706518187957097).abs() < 1e-12);
        let edge = Rectangle::new(0.5, 0.5 / 8.0).unwrap();
        assert!(!in_d_delta(&edge, v0, 8.0, 0.0));
        let bound0 = d_delta_bound(0.5, 0.5, v0, 0.0);
        assert!((bound0 - (v0 * v0 - 2.0) / (-v0 - 0.5 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn find_rectangle_examples() {
        let v0 = v0();
        for bound in [1e-3, 0.1, 0.5, 2.0] {
            let r = find_rectangle(v0, 8.0, 0.0, bound).unwrap();
            assert!(in_d_delta(&r, v0, 8.0, 0.0));
            assert!(r.l.max(r.s) <= bound);
        }
        assert!(find_rectangle(v0, 8.0, 10.0, 0.5).is_none());
        let r = find_rectangle(v0, 8.0, 0.1, 0.5).unwrap();
        assert!(in_d_delta(&r, v0, 8.0, 0.1));
    }

    #[test]
    fn delta_star_separates_success_from_failure() {
        let v0 = v0();
        let d = empirical_delta_star(v0, 8.0, 0.5);
        assert!(d > 0.1 && d < 10.0, "{d}");
        assert!(find_rectangle(v0, 8.0, 0.999 * d, 0.5).is_some());
        assert!(find_rectangle(v0, 8.0, 1.01 * d, 0.5).is_none());
    }

    fn coarse() -> FaceSampling {
        FaceSampling {
            x_samples: 201,
            half_extent: 20.0,
            t_samples: 50,
            ..Default::default()
        }
    }

    #[test]
    fn top_face_flux_matches_linear_bound() {
        let eq = solve_equilibrium(6.0, 8.0, 1e-12).unwrap();
        let m = ModelParams::new(0.5, 8.0, 6.0, 0.0).unwrap();
        let s = SourceParams::silent();
        let r = Rectangle::new(0.5, 0.5).unwrap();
        let (u1, u2) = Face::Top.point(&r, 1.0);
        let flux = Face::Top.normal(pas_rhs(&m, eq.v0, 0.0, u1, u2));
        assert!((flux + 1.75).abs() < 1e-12);
        assert!(face_flux_margin(VectorField::H, &r, &m, &eq, &s, &coarse()).unwrap() < 0.0);
        let thin = Rectangle::new(0.5, 0.5 / 16.0).unwrap();
        let rep = face_flux_report(VectorField::H, &thin, &m, &eq, &s, &coarse()).unwrap();
        assert!(rep.margin > 0.0 && rep.face == Face::Top, "{rep:?}");
    }

    #[test]
    fn right_face_margin_grows_with_amplitude() {
        let eq = solve_equilibrium(6.0, 8.0, 1e-12).unwrap();
        let m = ModelParams::new(0.5, 8.0, 6.0, 0.0).unwrap();
        let r = Rectangle::new(0.3, 0.3).unwrap();
        let flux = |a: f64| {
            let s = SourceParams::new(a, 0.02, 1.0, 1.0, 1.0, 100.0, 1.0).unwrap();
            let f = eval_profiles(&s, 0.0);
            let env = envelope(f.a, f.b, s.eta, 0.0);
            (-1..=1)
                .map(|k| Face::Right.normal(pas_rhs(&m, eq.v0, env, r.l, k as f64 * r.s)))
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let mut prev = flux(0.0);
        for k in 1..20 {
            let next = flux(0.01 * k as f64);
            assert!(next >= prev);
            prev = next;
        }
    }

    #[test]
    fn gauge_examples() {
        let g = crate::solver::Grid::new(1.0, 3).unwrap();
        let r = Rectangle::new(0.4, 0.2).unwrap();
        let st = FieldState {
            t: 0.0,
            u1: vec![0.0, 0.4, 0.0],
            u2: vec![0.0, 0.2, 0.0],
        };
        assert_eq!(gauge_norm(&st, &r), 1.0);
        assert_eq!(gauge_norm(&FieldState::zeros(0.0, 3), &r), 0.0);
        let st = FieldState {
            t: 0.0,
            u1: vec![0.2, 0.0, 0.0],
            u2: vec![0.2, 0.0, 0.0],
        };
        assert_eq!(gauge_norm(&st, &r), 1.0);

        let mut tr = Trajectory::new(g);
        tr.push(FieldState::zeros(0.0, 3));
        let rep = monitor_invariance(&tr, &r, 1e-6);
        assert!(rep.invariant && rep.max_gauge == 0.0);
        tr.push(FieldState {
            t: 1.0,
            u1: vec![0.0, 0.8, 0.0],
            u2: vec![0.0; 3],
        });
        let rep = monitor_invariance(&tr, &r, 1e-6);
        assert!(!rep.invariant);
        assert_eq!(rep.max_gauge, 2.0);
        assert_eq!(rep.first_exit_time, Some(1.0));
    }

    fn inputs(c1: f64, c2: f64, c3: f64) -> ErrorRectangleInputs {
        ErrorRectangleInputs {
            c1,
            c2,
            c3,
            eps_margin: 0.1,
            v0: v0(),
            gamma: 8.0,
        }
    }

    #[test]
    fn error_rectangle_examples() {
        let z = error_rectangle(&inputs(0.0, 0.0, 0.0)).unwrap();
        assert!(z.degenerate && z.l_hat == 0.0 && z.p == 0.0);

        let i = inputs(0.01, 0.001, 0.01);
        let e = error_rectangle(&i).unwrap();
        assert!(e.q > 0.0 && 4.0 * e.p * e.r < e.q * e.q && e.l_hat > 0.0);
        assert!((e.l_hat - e.p / e.q).abs() < 1e-3 * e.l_hat);
        assert!((e.l_hat - smaller_root_bisection(e.p, e.q, e.r)).abs() < 1e-15);
        assert!(i.validate().is_ok());

        assert!(error_rectangle(&inputs(0.01, 0.001, 1.0)).is_none());
    }
}
