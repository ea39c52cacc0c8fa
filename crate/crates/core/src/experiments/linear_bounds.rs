//! Contraction constant of the linear error iteration, the small-data
//! thresholds and sampled regularity statistics of the PAS solution.

use serde::Serialize;

use crate::model::Equilibrium;
use crate::solver::Trajectory;

/// `M = |a|/d1² + |b|/d2²`.
pub fn source_size(source: &crate::source::SourceParams) -> f64 {
    source.a.abs() / (source.d1 * source.d1) + source.b.abs() / (source.d2 * source.d2)
}

/// `α(T) = (‖v0² - (v0+V)²‖_Y + M² + 2M‖v0+V‖_Y + 1/γ) / (v0² - 1)`, norms over
/// the samples of `v_traj` (first component).
pub fn compute_alpha(v_traj: &Trajectory, m: f64, equilibrium: &Equilibrium, gamma: f64) -> f64 {
    let v0 = equilibrium.v0;
    let (mut quad, mut shifted) = (0.0f64, 0.0f64);
    for s in &v_traj.states {
        for &v in &s.u1 {
            let u = v0 + v;
            quad = quad.max((v0 * v0 - u * u).abs());
            shifted = shifted.max(u.abs());
        }
    }
    (quad + m * m + 2.0 * m * shifted + 1.0 / gamma) / (v0 * v0 - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmallData {
    pub ok: bool,
    pub v_norm: f64,
    pub m: f64,
    pub v_threshold: f64,
    pub m_threshold: f64,
    /// `(v_threshold - ‖V‖_Y, m_threshold - M)`
    pub slack: (f64, f64),
}

/// Thresholds `‖V‖_Y ≤ min{1, 1/(γ(1 + 2 max{√3, β}))}` and
/// `M ≤ min{1/√γ, 1/(2γ(1 + max{√3, β}))}`.
pub fn small_data_thresholds(gamma: f64, beta: f64) -> (f64, f64) {
    let k = 3f64.sqrt().max(beta);
    let v = 1f64.min(1.0 / (gamma * (1.0 + 2.0 * k)));
    let m = (1.0 / gamma.sqrt()).min(1.0 / (2.0 * gamma * (1.0 + k)));
    (v, m)
}

pub fn check_small_data(v_traj: &Trajectory, m: f64, gamma: f64, beta: f64) -> SmallData {
    let (v_threshold, m_threshold) = small_data_thresholds(gamma, beta);
    let v_norm = v_traj
        .states
        .iter()
        .flat_map(|s| s.u1.iter())
        .fold(0.0f64, |a, v| a.max(v.abs()));
    let slack = (v_threshold - v_norm, m_threshold - m);
    SmallData {
        ok: slack.0 >= 0.0 && slack.1 >= 0.0,
        v_norm,
        m,
        v_threshold,
        m_threshold,
        slack,
    }
}

/// Sampled `sup|V|`, `sup|∂xV|` (centred differences) and `sup|∂tV|`
/// (difference quotients between samples, biased by `O(sample_interval)`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryStats {
    pub sup_v: f64,
    pub sup_dx_v: f64,
    pub sup_dt_v: f64,
    pub dx: f64,
    /// Largest gap between consecutive samples.
    pub sample_interval: f64,
    pub samples: usize,
}

pub fn trajectory_stats(traj: &Trajectory) -> TrajectoryStats {
    let dx = traj.grid.dx();
    let mut stats = TrajectoryStats {
        sup_v: 0.0,
        sup_dx_v: 0.0,
        sup_dt_v: 0.0,
        dx,
        sample_interval: 0.0,
        samples: traj.len(),
    };
    for s in &traj.states {
        let u = &s.u1;
        for i in 0..u.len() {
            stats.sup_v = stats.sup_v.max(u[i].abs());
            if i > 0 && i + 1 < u.len() {
                stats.sup_dx_v = stats.sup_dx_v.max(((u[i + 1] - u[i - 1]) / (2.0 * dx)).abs());
            }
        }
    }
    for w in traj.states.windows(2) {
        let h = w[1].t - w[0].t;
        if h <= 0.0 {
            continue;
        }
        stats.sample_interval = stats.sample_interval.max(h);
        for (a, b) in w[0].u1.iter().zip(&w[1].u1) {
            stats.sup_dt_v = stats.sup_dt_v.max(((b - a) / h).abs());
        }
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::solve_equilibrium;
    use crate::solver::{FieldState, Grid};

    fn zero_traj() -> Trajectory {
        let g = Grid::new(5.0, 51).unwrap();
        let mut t = Trajectory::new(g);
        t.push(FieldState::zeros(0.0, 51));
        t.push(FieldState::zeros(1.0, 51));
        t
    }

    #[test]
    fn alpha_at_rest() {
        let eq = solve_equilibrium(6.0, 8.0, 1e-12).unwrap();
        let a = compute_alpha(&zero_traj(), 0.0, &eq, 8.0);
        let lambda = eq.v0 * eq.v0 - 1.0;
        assert!((a - 1.0 / (8.0 * lambda)).abs() < 1e-15);
        assert!((a - 0.045).abs() < 5e-4 && a < 1.0);
        assert!(compute_alpha(&zero_traj(), 0.01, &eq, 8.0) > a);
    }

    #[test]
    fn thresholds_for_reference_pair() {
        let (v, m) = small_data_thresholds(8.0, 6.0);
        assert!((v - 1.0 / 104.0).abs() < 1e-16);
        assert!((m - 1.0 / 112.0).abs() < 1e-16);
        let sd = check_small_data(&zero_traj(), 0.0, 8.0, 6.0);
        assert!(sd.ok);
        assert_eq!(sd.slack, (v, m));
        assert!(!check_small_data(&zero_traj(), 0.01, 8.0, 6.0).ok);
    }

    #[test]
    fn stats_of_a_travelling_profile() {
        let g = Grid::new(10.0, 2001).unwrap();
        let mut tr = Trajectory::new(g);
        for k in 0..=100 {
            let t = k as f64 * 0.01;
            tr.push(FieldState::from_fn(t, &g, |x| (x - t).sin(), |_| 0.0));
        }
        let st = trajectory_stats(&tr);
        assert!((st.sup_v - 1.0).abs() < 1e-4);
        assert!((st.sup_dx_v - 1.0).abs() < 1e-4);
        assert!((st.sup_dt_v - 1.0).abs() < 1e-3);
        assert!((st.sample_interval - 0.01).abs() < 1e-12);
    }
}
