//! Window averages over one fast period and the residual of the averaged
//! right-hand side against the pre-averaged one.

use serde::Serialize;

use super::quadrature::GaussLegendre;
use crate::model::{Equilibrium, ModelParams};
use crate::solver::pas_rhs;
use crate::source::{envelope, eval_profiles, SourceFields, SourceParams};

/// Default number of quadrature nodes per window (eight 8-point panels).
pub const DEFAULT_QUAD_POINTS: usize = 64;

/// `(ω1/2π) ∫_{t-π/ω1}^{t+π/ω1} f(s) ds` by composite 8-point Gauss–Legendre
/// with `quad_points / 8` panels.
pub fn window_average(f: impl FnMut(f64) -> f64, t: f64, omega1: f64, quad_points: usize) -> f64 {
    assert!(quad_points >= 8, "window_average needs at least 8 quadrature points");
    let half = std::f64::consts::PI / omega1;
    let gl = GaussLegendre::new(8);
    gl.composite(t - half, t + half, quad_points / 8, f) / (2.0 * half)
}

/// Terms of the pre-averaged right-hand side with `(V, W)` frozen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreAveraged {
    pub psi1: f64,
    pub psi2: f64,
    pub x1: f64,
    pub x2: f64,
    pub z: f64,
}

/// `ψ1 = (1-v0²)V - v0V² - V³/3 - W - V X1 - Z - v0 J0²` and
/// `ψ2 = ε(V - γW) + εJ0` at time `s`.
pub fn pre_averaged(
    model: &ModelParams,
    v0: f64,
    source: &SourceParams,
    f: &SourceFields,
    v: f64,
    w: f64,
    s: f64,
) -> PreAveraged {
    let (w1, w2) = (source.omega1, source.omega2());
    let (s1, s2) = ((w1 * s).sin(), (w2 * s).sin());
    let (a, b) = (f.a, f.b);
    let j0 = a * s1 + b * s2;
    let j0_xx = f.a_xx * s1 + f.b_xx * s2;
    let x1 = a * a * s1 * s1 + b * b * s2 * s2 + 2.0 * a * b * s1 * s2 + 2.0 * v0 * j0;
    let x2 = -0.5 * a * a * (2.0 * w1 * s).cos() - 0.5 * b * b * (2.0 * w2 * s).cos()
        - a * b * ((w1 + w2) * s).cos()
        + 2.0 * v0 * j0;
    let z = -a * s1 - b * s2
        + a.powi(3) / 3.0 * s1.powi(3)
        + b.powi(3) / 3.0 * s2.powi(3)
        + a * v * v * s1
        + b * v * v * s2
        + a * a * b * s1 * s1 * s2
        + a * b * b * s1 * s2 * s2
        - j0_xx
        + v0 * v0 * j0;
    let psi1 = (1.0 - v0 * v0) * v - v0 * v * v - v * v * v / 3.0 - w - v * x1 - z - v0 * j0 * j0;
    let psi2 = model.epsilon * (v - model.gamma * w) + model.epsilon * j0;
    PreAveraged {
        psi1,
        psi2,
        x1,
        x2,
        z,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PasResidual {
    pub residual1: f64,
    pub residual2: f64,
}

/// Distance between the window average of `(ψ1, ψ2)` and the averaged
/// right-hand side at `(V, W, x, t)`.
pub fn verify_pas_derivation(
    model: &ModelParams,
    equilibrium: &Equilibrium,
    source: &SourceParams,
    v: f64,
    w: f64,
    x: f64,
    t: f64,
) -> PasResidual {
    residual_at(model, equilibrium.v0, source, &eval_profiles(source, x), v, w, t, DEFAULT_QUAD_POINTS)
}

#[allow(clippy::too_many_arguments)]
fn residual_at(
    model: &ModelParams,
    v0: f64,
    source: &SourceParams,
    f: &SourceFields,
    v: f64,
    w: f64,
    t: f64,
    quad_points: usize,
) -> PasResidual {
    let avg1 = window_average(|s| pre_averaged(model, v0, source, f, v, w, s).psi1, t, source.omega1, quad_points);
    let avg2 = window_average(|s| pre_averaged(model, v0, source, f, v, w, s).psi2, t, source.omega1, quad_points);
    let (h1, h2) = pas_rhs(model, v0, envelope(f.a, f.b, source.eta, t), v, w);
    PasResidual {
        residual1: (avg1 - h1).abs(),
        residual2: (avg2 - h2).abs(),
    }
}

/// Largest residual over `t' ∈ [t, t + 2π/ω1]` (`samples` equally spaced
/// points). The pointwise residual carries the fast phase `ω2 t`, which moves
/// when `ω1` changes; the local maximum only depends on the slow time.
#[allow(clippy::too_many_arguments)]
pub fn residual_amplitude(
    model: &ModelParams,
    equilibrium: &Equilibrium,
    source: &SourceParams,
    v: f64,
    w: f64,
    x: f64,
    t: f64,
    samples: usize,
) -> PasResidual {
    let f = eval_profiles(source, x);
    let period = std::f64::consts::TAU / source.omega1;
    let n = samples.max(1);
    (0..n)
        .map(|k| {
            let tk = t + period * k as f64 / n as f64;
            residual_at(model, equilibrium.v0, source, &f, v, w, tk, DEFAULT_QUAD_POINTS)
        })
        .fold(
            PasResidual {
                residual1: 0.0,
                residual2: 0.0,
            },
            |a, b| PasResidual {
                residual1: a.residual1.max(b.residual1),
                residual2: a.residual2.max(b.residual2),
            },
        )
}

/// `(1 + V²)(|A| + |B| + |A|³ + |B|³) η/ω1`, the shape of the residual bound.
pub fn residual_bound_shape(source: &SourceParams, v: f64, x: f64) -> f64 {
    let f = eval_profiles(source, x);
    let (a, b) = (f.a.abs(), f.b.abs());
    (1.0 + v * v) * (a + b + a.powi(3) + b.powi(3)) * source.eta / source.omega1
}

/// Constant `C` of the residual bound fitted on calibration points and
/// checked on held-out points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualConstantFit {
    /// `safety · max(amplitude/shape)` over the calibration set.
    pub c: f64,
    pub calibration_max: f64,
    /// Largest `amplitude / (C · shape)` over the held-out set.
    pub held_out_worst: f64,
    pub ok: bool,
}

/// Fits `C` in `residual_amplitude.residual1 ≤ C · shape` on `calibration`
/// points `(V, x, t, ω1)` and verifies it on `held_out`. `W = 0`.
#[allow(clippy::too_many_arguments)]
pub fn fit_residual_constant(
    model: &ModelParams,
    equilibrium: &Equilibrium,
    source: &SourceParams,
    calibration: &[(f64, f64, f64, f64)],
    held_out: &[(f64, f64, f64, f64)],
    window_samples: usize,
    safety: f64,
) -> ResidualConstantFit {
    let ratio = |&(v, x, t, w): &(f64, f64, f64, f64)| {
        let s = source.with_omega1(w);
        let r = residual_amplitude(model, equilibrium, &s, v, 0.0, x, t, window_samples).residual1;
        r / residual_bound_shape(&s, v, x)
    };
    let calibration_max = calibration.iter().map(ratio).fold(0.0, f64::max);
    let c = safety * calibration_max;
    let held_out_worst = held_out.iter().map(|p| ratio(p) / c).fold(0.0, f64::max);
    ResidualConstantFit {
        c,
        calibration_max,
        held_out_worst,
        ok: held_out_worst <= 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::solve_equilibrium;
    use crate::solver::centered_rhs;

    #[test]
    fn full_period_averages() {
        let w = 37.0;
        for t in [0.0, 0.3, 11.7] {
            assert!((window_average(|s| (w * s).sin().powi(2), t, w, 64) - 0.5).abs() < 1e-14);
            assert!(window_average(|s| (w * s).sin(), t, w, 64).abs() < 1e-14);
            assert!(window_average(|s| (w * s).cos(), t, w, 64).abs() < 1e-14);
            let prod = window_average(|s| (w * s).sin() * (w * s).cos(), t, w, 64);
            assert!(prod.abs() < 1e-14);
        }
    }

    #[test]
    fn beat_product_averages_to_envelope() {
        let (w1, eta) = (200.0, 1.0);
        let w2 = w1 + eta;
        for t in [0.0, 0.7, 2.0] {
            let avg = window_average(|s| (w1 * s).sin() * (w2 * s).sin(), t, w1, 64);
            assert!((avg - 0.5 * (eta * t).cos()).abs() <= 2.0 * eta / w1);
        }
    }

    #[test]
    fn psi_is_the_substituted_centered_rhs() {
        let m = ModelParams::new(0.5, 8.0, 6.0, 0.0).unwrap();
        let eq = solve_equilibrium(6.0, 8.0, 1e-12).unwrap();
        let s = SourceParams::new(0.2, 0.1, 1.0, 1.5, 0.5, 50.0, 1.0).unwrap();
        let f = eval_profiles(&s, 0.3);
        for &(v, w, t) in &[(0.1, 0.02, 0.0), (-0.2, 0.1, 0.37), (0.05, -0.03, 4.2)] {
            let p = pre_averaged(&m, eq.v0, &s, &f, v, w, t);
            let j0 = f.a * (s.omega1 * t).sin() + f.b * (s.omega2() * t).sin();
            let j0_xx = f.a_xx * (s.omega1 * t).sin() + f.b_xx * (s.omega2() * t).sin();
            let c = centered_rhs(&m, eq.v0, v + j0, w);
            assert!((p.psi1 - (c.0 + j0_xx)).abs() < 1e-13);
            let x1 = 0.5 * f.a * f.a + 0.5 * f.b * f.b + f.a * f.b * (-s.eta * t).cos() + p.x2;
            assert!((p.x1 - x1).abs() < 1e-13);
        }
    }

    #[test]
    fn fitted_constant_covers_held_out_points() {
        let m = ModelParams::new(0.5, 8.0, 6.0, 0.0).unwrap();
        let eq = solve_equilibrium(6.0, 8.0, 1e-12).unwrap();
        let s = SourceParams::new(0.3, 0.2, 1.0, 1.5, 0.5, 100.0, 1.0).unwrap();
        let cal: Vec<_> = [(-0.2, 0.0, 0.3), (0.0, 0.7, 1.1), (0.2, 2.0, 2.5)]
            .iter()
            .map(|&(v, x, t)| (v, x, t, 100.0))
            .collect();
        let held: Vec<_> = [(-0.1, 0.4, 0.8), (0.1, 1.3, 1.9)]
            .iter()
            .map(|&(v, x, t)| (v, x, t, 300.0))
            .collect();
        let fit = fit_residual_constant(&m, &eq, &s, &cal, &held, 32, 2.0);
        assert!(fit.ok && fit.c > 0.0, "{fit:?}");
    }

    #[test]
    fn silent_source_has_zero_residual() {
        let m = ModelParams::new(0.5, 8.0, 6.0, 0.0).unwrap();
        let eq = solve_equilibrium(6.0, 8.0, 1e-12).unwrap();
        let s = SourceParams::silent();
        let r = verify_pas_derivation(&m, &eq, &s, 0.3, -0.1, 0.0, 1.0);
        assert!(r.residual1 < 1e-14 && r.residual2 < 1e-14);
    }
}
