use serde::Serialize;

use super::grid::Grid;
use crate::error::{Error, Result};

/// Two sampled fields on a grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub t: f64,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
}

impl FieldState {
    pub fn zeros(t: f64, n: usize) -> Self {
        Self {
            t,
            u1: vec![0.0; n],
            u2: vec![0.0; n],
        }
    }

    /// Both components set from functions of `x`.
    pub fn from_fn(
        t: f64,
        grid: &Grid,
        f1: impl Fn(f64) -> f64,
        f2: impl Fn(f64) -> f64,
    ) -> Self {
        let xs = grid.points();
        Self {
            t,
            u1: xs.iter().map(|&x| f1(x)).collect(),
            u2: xs.iter().map(|&x| f2(x)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.u1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u1.is_empty()
    }

    pub fn component(&self, c: Component) -> &[f64] {
        match c {
            Component::First => &self.u1,
            Component::Second => &self.u2,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u1.iter().chain(&self.u2).all(|v| v.is_finite())
    }

    pub fn check_shape(&self, grid: &Grid) -> Result<()> {
        if self.u1.len() != grid.n_points || self.u2.len() != grid.n_points {
            return Err(Error::Configuration(format!(
                "state has {}/{} values, grid has {} points",
                self.u1.len(),
                self.u2.len(),
                grid.n_points
            )));
        }
        Ok(())
    }

    /// Every other grid value, undoing [`Grid::refined`].
    pub fn coarsened(&self) -> Self {
        Self {
            t: self.t,
            u1: self.u1.iter().step_by(2).copied().collect(),
            u2: self.u2.iter().step_by(2).copied().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Component {
    First,
    Second,
}

/// Time-ordered samples of a [`FieldState`] on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: Grid,
    pub states: Vec<FieldState>,
}

impl Trajectory {
    pub fn new(grid: Grid) -> Self {
        Self {
            grid,
            states: Vec::new(),
        }
    }

    pub fn push(&mut self, state: FieldState) {
        debug_assert!(self.states.last().is_none_or(|s| s.t < state.t));
        self.states.push(state);
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    pub fn end_time(&self) -> f64 {
        self.states.last().map_or(f64::NEG_INFINITY, |s| s.t)
    }

    pub fn start_time(&self) -> f64 {
        self.states.first().map_or(f64::INFINITY, |s| s.t)
    }

    /// Whether `[t0, t1]` lies inside the sampled time span.
    pub fn covers(&self, t0: f64, t1: f64) -> bool {
        let slack = 1e-9 * (1.0 + t1.abs());
        !self.is_empty() && self.start_time() <= t0 + slack && self.end_time() >= t1 - slack
    }

    /// Linear interpolation in time of one component, written into `out`.
    pub fn component_at(&self, t: f64, c: Component, out: &mut [f64]) {
        let (i, w) = self.bracket(t);
        let lo = self.states[i].component(c);
        if w == 0.0 {
            out.copy_from_slice(lo);
            return;
        }
        let hi = self.states[i + 1].component(c);
        for ((o, a), b) in out.iter_mut().zip(lo).zip(hi) {
            *o = a + w * (b - a);
        }
    }

    /// Linear interpolation in both `x` and `t`.
    pub fn value_at(&self, x: f64, t: f64, c: Component) -> f64 {
        let (i, w) = self.bracket(t);
        let g = &self.grid;
        let f = ((x + g.half_extent) / g.dx()).clamp(0.0, (g.n_points - 1) as f64);
        let j = (f.floor() as usize).min(g.n_points - 2);
        let s = f - j as f64;
        let at = |k: usize| {
            let u = self.states[k].component(c);
            u[j] + s * (u[j + 1] - u[j])
        };
        if w == 0.0 {
            at(i)
        } else {
            at(i) + w * (at(i + 1) - at(i))
        }
    }

    /// Sample index and weight for time `t`, clamped to the sampled span.
    fn bracket(&self, t: f64) -> (usize, f64) {
        let n = self.states.len();
        assert!(n > 0, "empty trajectory");
        if n == 1 || t <= self.states[0].t {
            return (0, 0.0);
        }
        if t >= self.states[n - 1].t {
            return (n - 1, 0.0);
        }
        let k = self.states.partition_point(|s| s.t <= t);
        let (t0, t1) = (self.states[k - 1].t, self.states[k].t);
        (k - 1, (t - t0) / (t1 - t0))
    }
}

/// Sup over samples and grid points of `|u_c|`.
pub fn y_norm(trajectory: &Trajectory, c: Component) -> f64 {
    trajectory
        .states
        .iter()
        .flat_map(|s| s.component(c).iter())
        .fold(0.0, |m, v| m.max(v.abs()))
}
