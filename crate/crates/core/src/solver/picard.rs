use serde::Serialize;

use super::heat::HeatKernel;
use super::imex::step_count;
use super::state::{Component, FieldState, Trajectory};
use crate::error::{Error, Result};
use crate::model::{Equilibrium, ModelParams};
use crate::source::{eval_profiles, Phases, SourceFields, SourceParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    /// Time step of the Duhamel quadrature.
    pub dt: f64,
    pub n_iters: usize,
    /// Successive distances below this are rounding noise and are not
    /// checked for contraction.
    pub noise_floor: f64,
}

impl PicardOptions {
    pub fn new(dt: f64, n_iters: usize) -> Self {
        Self {
            dt,
            n_iters,
            noise_floor: 1e-13,
        }
    }
}

/// Sup-distances between successive iterates.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PicardReport {
    /// `‖F_v^(k+1) - F_v^(k)‖_Y` for `k = 0, 1, ...`
    pub distances_v: Vec<f64>,
    /// `‖F_w^(k+1) - F_w^(k)‖_Y`
    pub distances_w: Vec<f64>,
    /// `distances_v[k+1] / distances_v[k]`, only while above the noise floor.
    pub ratios: Vec<f64>,
    pub dt: f64,
    pub steps: usize,
}

impl PicardReport {
    pub fn max_ratio(&self) -> Option<f64> {
        self.ratios.iter().copied().reduce(f64::max)
    }
}

/// Picard iteration of the Duhamel form of the linear error system.
///
/// With `λ = v0² - 1`, the iterates are
///
/// ```text
/// F_v^(k+1)(t) = ∫_0^t e^{-λ(t-s)} G_1(t-s) * [c F_v^(k) - F_w^(k) + φ3](s) ds
/// F_w^(k+1)(t) = ∫_0^t e^{-εγ(t-s)} G_ρ(t-s) * [ε F_v^(k+1) + ε J0](s) ds
/// ```
///
/// where `c = v0² - (v0+V)² + φ1` and `G_σ` is the heat kernel of `∂t - σ∂x²`.
/// Each time integral is advanced by the trapezoidal rule on the semigroup.
/// `V` is read from `pas` by linear interpolation, on `pas.grid`.
pub fn picard_linear_error(
    model: &ModelParams,
    equilibrium: &Equilibrium,
    source: &SourceParams,
    pas: &Trajectory,
    t_end: f64,
    options: &PicardOptions,
) -> Result<(Trajectory, PicardReport)> {
    if !(options.dt > 0.0) {
        return Err(Error::InvalidParameter {
            name: "picard.dt",
            value: options.dt,
            reason: "must be positive",
        });
    }
    if !pas.covers(0.0, t_end) {
        return Err(Error::Configuration(format!(
            "PAS trajectory covers [{}, {}], Picard iteration needs [0, {t_end}]",
            pas.start_time(),
            pas.end_time()
        )));
    }
    let grid = pas.grid;
    let n = grid.n_points;
    let steps = step_count(t_end, options.dt);
    let dt = t_end / steps as f64;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();

    let v0 = equilibrium.v0;
    let lambda = v0 * v0 - 1.0;
    let fields: Vec<SourceFields> = grid.points().iter().map(|&x| eval_profiles(source, x)).collect();
    let mut coeff = vec![vec![0.0; n]; steps + 1];
    let mut phi3 = vec![vec![0.0; n]; steps + 1];
    let mut j0 = vec![vec![0.0; n]; steps + 1];
    let mut v = vec![0.0; n];
    for (k, &t) in times.iter().enumerate() {
        pas.component_at(t, Component::First, &mut v);
        let ph = Phases::new(source, t);
        for i in 0..n {
            let c = ph.coefficients(v0, &fields[i], v[i]);
            let s = v0 + v[i];
            coeff[k][i] = v0 * v0 - s * s + c.phi1;
            phi3[k][i] = c.phi3;
            j0[k][i] = c.j0;
        }
    }

    let kernel_v = HeatKernel::new(1.0, dt, &grid);
    let kernel_w = HeatKernel::new(model.rho, dt, &grid);
    let decay_v = (-lambda * dt).exp();
    let decay_w = (-model.epsilon * model.gamma * dt).exp();

    let mut fv = vec![vec![0.0; n]; steps + 1];
    let mut fw = vec![vec![0.0; n]; steps + 1];
    let mut report = PicardReport {
        dt,
        steps,
        ..Default::default()
    };
    let mut src = vec![vec![0.0; n]; steps + 1];
    for iter in 0..options.n_iters {
        for k in 0..=steps {
            for i in 0..n {
                src[k][i] = coeff[k][i] * fv[k][i] - fw[k][i] + phi3[k][i];
            }
        }
        let new_v = duhamel(&src, &kernel_v, decay_v, dt);
        for k in 0..=steps {
            for i in 0..n {
                src[k][i] = model.epsilon * (new_v[k][i] + j0[k][i]);
            }
        }
        let new_w = duhamel(&src, &kernel_w, decay_w, dt);

        let dv = sup_distance(&new_v, &fv);
        let dw = sup_distance(&new_w, &fw);
        fv = new_v;
        fw = new_w;
        log::debug!("picard iterate {}: |dF_v| = {dv:e}, |dF_w| = {dw:e}", iter + 1);
        if let Some(&prev) = report.distances_v.last() {
            if prev > options.noise_floor && dv > options.noise_floor {
                if dv > prev {
                    return Err(Error::ContractionViolation {
                        iteration: iter + 1,
                        previous: prev,
                        current: dv,
                    });
                }
                report.ratios.push(dv / prev);
            }
        }
        report.distances_v.push(dv);
        report.distances_w.push(dw);
    }

    let mut traj = Trajectory::new(grid);
    for ((t, u1), u2) in times.into_iter().zip(fv).zip(fw) {
        traj.push(FieldState { t, u1, u2 });
    }
    Ok((traj, report))
}

/// `D_{k+1} = e^{-λ dt} G(dt) * (D_k + dt/2 S_k) + dt/2 S_{k+1}`, `D_0 = 0`.
fn duhamel(src: &[Vec<f64>], kernel: &HeatKernel, decay: f64, dt: f64) -> Vec<Vec<f64>> {
    let n = src[0].len();
    let mut out = vec![vec![0.0; n]; src.len()];
    let mut tmp = vec![0.0; n];
    let mut conv = vec![0.0; n];
    for k in 0..src.len() - 1 {
        for i in 0..n {
            tmp[i] = out[k][i] + 0.5 * dt * src[k][i];
        }
        kernel.apply(&tmp, &mut conv);
        for i in 0..n {
            out[k + 1][i] = decay * conv[i] + 0.5 * dt * src[k + 1][i];
        }
    }
    out
}

fn sup_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::solve_equilibrium;
    use crate::solver::Grid;

    fn setup(a: f64) -> (ModelParams, Equilibrium, SourceParams, Trajectory) {
        let m = ModelParams::new(0.5, 8.0, 6.0, 0.0).unwrap();
        let eq = solve_equilibrium(6.0, 8.0, 1e-12).unwrap();
        let s = SourceParams::new(a, 0.5 * a, 1.0, 1.0, 0.5, 20.0, 1.0).unwrap();
        let g = Grid::new(10.0, 201).unwrap();
        let mut pas = Trajectory::new(g);
        pas.push(FieldState::zeros(0.0, 201));
        pas.push(FieldState::zeros(1.0, 201));
        (m, eq, s, pas)
    }

    #[test]
    fn zero_iterations_give_zero() {
        let (m, eq, s, pas) = setup(0.05);
        let (traj, rep) = picard_linear_error(&m, &eq, &s, &pas, 1.0, &PicardOptions::new(0.01, 0)).unwrap();
        assert!(traj.states.iter().all(|st| st.u1.iter().chain(&st.u2).all(|&v| v == 0.0)));
        assert!(rep.distances_v.is_empty());
    }

    #[test]
    fn silent_source_keeps_iterates_zero() {
        let (m, eq, s, pas) = setup(0.0);
        let (traj, _) = picard_linear_error(&m, &eq, &s, &pas, 1.0, &PicardOptions::new(0.01, 5)).unwrap();
        assert!(traj.states.iter().all(|st| st.u1.iter().chain(&st.u2).all(|&v| v == 0.0)));
    }

    #[test]
    fn iterates_contract() {
        let (m, eq, s, pas) = setup(0.05);
        let (_, rep) = picard_linear_error(&m, &eq, &s, &pas, 1.0, &PicardOptions::new(0.005, 8)).unwrap();
        assert!(!rep.ratios.is_empty());
        assert!(rep.max_ratio().unwrap() < 0.2, "{rep:?}");
    }

    #[test]
    fn short_pas_is_rejected() {
        let (m, eq, s, pas) = setup(0.05);
        let err = picard_linear_error(&m, &eq, &s, &pas, 2.0, &PicardOptions::new(0.01, 1)).unwrap_err();
        assert!(matches!(err, Error::Configuration(_)));
    }
}
