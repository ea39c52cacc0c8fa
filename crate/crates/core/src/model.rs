//! Reaction parameters, the admissibility condition and the resting
//! equilibrium `(v0, w0)`.
//!
//! The equilibrium solves
//!
//! ```text
//! 0 = v0 - v0^3/3 - w0
//! 0 = v0 - gamma*w0 + beta
//! ```
//!
//! which after eliminating `w0` is the depressed cubic
//! `h(v) = v^3 - 3(1 - 1/gamma) v + 3 beta/gamma`. Admissible `(beta, gamma)`
//! make the real root unique and push it far enough below `-1` that the
//! linearisation `1 - v0^2` is strongly dissipative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Residual tolerance used for the equilibrium invariants.
pub const EQUILIBRIUM_RESIDUAL_TOL: f64 = 1e-12;

/// FitzHugh–Nagumo reaction constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Recovery rate.
    pub epsilon: f64,
    pub gamma: f64,
    pub beta: f64,
    /// Diffusivity of the recovery variable (0 for the classical model).
    pub rho: f64,
    /// A `delta` in (0, 1/4) for which the admissibility condition holds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_witness: Option<f64>,
}

impl ModelParams {
    pub fn new(epsilon: f64, gamma: f64, beta: f64, rho: f64) -> Result<Self> {
        let params = Self {
            epsilon,
            gamma,
            beta,
            rho,
            delta_witness: None,
        };
        params.validate()?;
        Ok(params)
    }

    /// Attaches the first admissibility witness from `delta_grid`, failing if
    /// the parameters are not admissible on that grid.
    pub fn with_witness(mut self, delta_grid: &[f64]) -> Result<Self> {
        let check = check_admissible(self.beta, self.gamma, delta_grid)?;
        match check.witness {
            Some(delta) if check.admissible => {
                self.delta_witness = Some(delta);
                Ok(self)
            }
            _ => Err(Error::Precondition(format!(
                "(beta, gamma) = ({}, {}) is not admissible on the supplied delta grid",
                self.beta, self.gamma
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("epsilon", self.epsilon)?;
        positive("gamma", self.gamma)?;
        positive("beta", self.beta)?;
        if !(self.rho >= 0.0) || !self.rho.is_finite() {
            return Err(Error::InvalidParameter {
                name: "rho",
                value: self.rho,
                reason: "must be finite and non-negative",
            });
        }
        if let Some(delta) = self.delta_witness {
            if !(delta > 0.0 && delta < 0.25) {
                return Err(Error::InvalidParameter {
                    name: "delta_witness",
                    value: delta,
                    reason: "must lie in (0, 1/4)",
                });
            }
            if !(discriminant_term(self.beta, self.gamma) > 0.0
                && delta_condition(self.beta, self.gamma, delta) > 0.0)
            {
                return Err(Error::InvalidParameter {
                    name: "delta_witness",
                    value: delta,
                    reason: "does not satisfy the admissibility inequalities",
                });
            }
        }
        Ok(())
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and strictly positive",
        })
    }
}

/// `(1-γ)³/γ³ + 9/4 β²/γ²`, positive iff the cubic has a single real root.
pub fn discriminant_term(beta: f64, gamma: f64) -> f64 {
    let r = (1.0 - gamma) / gamma;
    r * r * r + 2.25 * beta * beta / (gamma * gamma)
}

/// `(1 + 1/(δγ))^{1/2} (2 - (3 + 1/δ)/γ) + 3β/γ`.
///
/// This equals `h(-sqrt(1 + 1/(δγ)))`, so positivity places the root below
/// `-sqrt(1 + 1/(δγ))`.
pub fn delta_condition(beta: f64, gamma: f64, delta: f64) -> f64 {
    (1.0 + 1.0 / (delta * gamma)).sqrt() * (2.0 - (3.0 + 1.0 / delta) / gamma) + 3.0 * beta / gamma
}

/// Log-spaced grid of `n` points between `lo` and `hi` (inclusive).
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Default δ search grid: 64 log-spaced points on [1e-4, 0.2499].
pub fn default_delta_grid() -> Vec<f64> {
    log_spaced(1e-4, 0.2499, 64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Admissibility {
    pub admissible: bool,
    pub witness: Option<f64>,
    pub discriminant: f64,
    /// Largest value of the δ-inequality seen on the grid. A small negative
    /// value flags a marginal failure that a finer or wider grid might fix.
    pub best_delta_margin: f64,
}

/// Checks the admissibility condition, searching `delta_grid` for a witness.
pub fn check_admissible(beta: f64, gamma: f64, delta_grid: &[f64]) -> Result<Admissibility> {
    positive("beta", beta)?;
    positive("gamma", gamma)?;
    if delta_grid.is_empty() {
        return Err(Error::InvalidGrid("delta grid is empty".into()));
    }
    if let Some(bad) = delta_grid.iter().find(|d| !(**d > 0.0 && **d < 0.25)) {
        return Err(Error::InvalidGrid(format!(
            "delta = {bad} is outside (0, 1/4)"
        )));
    }

    let discriminant = discriminant_term(beta, gamma);
    let mut witness = None;
    let mut best = f64::NEG_INFINITY;
    for &delta in delta_grid {
        let value = delta_condition(beta, gamma, delta);
        best = best.max(value);
        if value > 0.0 && witness.is_none() {
            witness = Some(delta);
        }
    }
    let admissible = discriminant > 0.0 && witness.is_some();
    if !admissible && best > -1e-3 && best <= 0.0 {
        log::info!(
            "delta search failed marginally (best margin {best:e}); the grid lower bound is {:e}",
            delta_grid.iter().cloned().fold(f64::INFINITY, f64::min)
        );
    }
    Ok(Admissibility {
        admissible,
        witness: if admissible { witness } else { None },
        discriminant,
        best_delta_margin: best,
    })
}

/// The cubic `h(v) = v^3 - 3(1 - 1/γ) v + 3β/γ`.
pub fn cubic_h(v: f64, beta: f64, gamma: f64) -> f64 {
    v * v * v - 3.0 * (1.0 - 1.0 / gamma) * v + 3.0 * beta / gamma
}

fn cubic_h_prime(v: f64, gamma: f64) -> f64 {
    3.0 * v * v - 3.0 * (1.0 - 1.0 / gamma)
}

/// The resting state of the uncentered system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub v0: f64,
    pub w0: f64,
}

impl Equilibrium {
    /// `v0^2 - 1`, the decay rate of the linearised voltage equation.
    pub fn dissipation(&self) -> f64 {
        self.v0 * self.v0 - 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumResiduals {
    pub cubic: f64,
    /// `v0 - v0^3/3 - w0`
    pub nullcline_v: f64,
    /// `v0 - γ w0 + β`
    pub nullcline_w: f64,
}

/// Record emitted by the `equilibrium` study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub v0: f64,
    pub w0: f64,
    pub residuals: EquilibriumResiduals,
    pub bounds_satisfied: bool,
    pub lower_bound: f64,
    pub upper_bound: Option<f64>,
    pub witness_delta: Option<f64>,
    /// Bisection-only root, before Newton polishing.
    pub bisection_root: f64,
    pub newton_bisection_gap: f64,
}

/// Plain bisection on `h` over `[lo, hi]` down to `width`.
pub fn bisect_cubic(beta: f64, gamma: f64, mut lo: f64, mut hi: f64, width: f64) -> Result<f64> {
    let (mut h_lo, h_hi) = (cubic_h(lo, beta, gamma), cubic_h(hi, beta, gamma));
    if h_lo.signum() == h_hi.signum() {
        return Err(Error::Numeric(format!(
            "h does not change sign on [{lo}, {hi}] (h = {h_lo:e}, {h_hi:e})"
        )));
    }
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        let h_mid = cubic_h(mid, beta, gamma);
        if h_mid == 0.0 {
            return Ok(mid);
        }
        if h_mid.signum() == h_lo.signum() {
            lo = mid;
            h_lo = h_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Finds `(v0, w0)` for admissible `(β, γ)`: bisection to width 1e-13 on
/// `[-max(β, √3) - 1, 0]`, then Newton until `|h(v0)| <= tol`.
pub fn solve_equilibrium(beta: f64, gamma: f64, tol: f64) -> Result<Equilibrium> {
    Ok(equilibrium_report(beta, gamma, tol, &default_delta_grid())?.equilibrium())
}

impl EquilibriumReport {
    pub fn equilibrium(&self) -> Equilibrium {
        Equilibrium {
            v0: self.v0,
            w0: self.w0,
        }
    }
}

/// [`solve_equilibrium`] with the full diagnostic record.
pub fn equilibrium_report(
    beta: f64,
    gamma: f64,
    tol: f64,
    delta_grid: &[f64],
) -> Result<EquilibriumReport> {
    let adm = check_admissible(beta, gamma, delta_grid)?;
    if !adm.admissible {
        return Err(Error::Precondition(format!(
            "(beta, gamma) = ({beta}, {gamma}) is not admissible"
        )));
    }

    let lo = -beta.max(SQRT_3) - 1.0;
    let bisection_root = bisect_cubic(beta, gamma, lo, 0.0, 1e-13)?;

    let mut v = bisection_root;
    let mut converged = false;
    for _ in 0..50 {
        let h = cubic_h(v, beta, gamma);
        if h.abs() <= tol {
            converged = true;
            break;
        }
        let dh = cubic_h_prime(v, gamma);
        if dh == 0.0 {
            break;
        }
        v -= h / dh;
    }
    if !converged {
        // Newton can stall one ulp away from the tolerance; finish by bisection.
        v = bisect_cubic(beta, gamma, lo, 0.0, 0.0)?;
    }
    let cubic = cubic_h(v, beta, gamma);
    if cubic.abs() > tol {
        return Err(Error::Numeric(format!(
            "equilibrium residual |h(v0)| = {:e} exceeds {tol:e}",
            cubic.abs()
        )));
    }

    let w0 = (v + beta) / gamma;
    let lower_bound = (-beta).min(-SQRT_3);
    let upper_bound = adm.witness.map(|d| -(1.0 + 1.0 / (d * gamma)).sqrt());
    let bounds_satisfied = lower_bound <= v
        && upper_bound.is_some_and(|ub| v < ub)
        && v * v - 1.0 > 0.0;
    if !bounds_satisfied {
        log::warn!("equilibrium v0 = {v} violates its admissibility bounds");
    }

    Ok(EquilibriumReport {
        v0: v,
        w0,
        residuals: EquilibriumResiduals {
            cubic,
            nullcline_v: v - v * v * v / 3.0 - w0,
            nullcline_w: v - gamma * w0 + beta,
        },
        bounds_satisfied,
        lower_bound,
        upper_bound,
        witness_delta: adm.witness,
        bisection_root,
        newton_bisection_gap: (v - bisection_root).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // Root of v^3 - 2.625 v + 2.25 from an independent 200-step bisection.
    const V0_BETA6_GAMMA8: f64 = -1.944_729_592_921_271_6;

    #[test]
    fn beta1_gamma1_is_not_admissible() {
        let adm = check_admissible(1.0, 1.0, &default_delta_grid()).unwrap();
        assert!(!adm.admissible);
        assert!(adm.witness.is_none());
        assert!((adm.discriminant - 2.25).abs() < 1e-15);
        // Brute-force sweep of the same grid: best value is about -8.19.
        assert!((adm.best_delta_margin - -8.185709027775).abs() < 1e-9);
    }

    #[test]
    fn beta6_gamma8_witness() {
        let adm = check_admissible(6.0, 8.0, &[0.2]).unwrap();
        assert!(adm.admissible);
        assert_eq!(adm.witness, Some(0.2));
        // First passing grid point from the brute-force sweep.
        let adm = check_admissible(6.0, 8.0, &default_delta_grid()).unwrap();
        assert!((adm.witness.unwrap() - 0.049_732_453_566_126_27).abs() < 1e-12);
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(matches!(
            check_admissible(-1.0, 8.0, &[0.1]),
            Err(Error::InvalidParameter { name: "beta", .. })
        ));
        assert!(matches!(
            check_admissible(6.0, 0.0, &[0.1]),
            Err(Error::InvalidParameter { name: "gamma", .. })
        ));
        assert!(matches!(check_admissible(6.0, 8.0, &[0.3]), Err(Error::InvalidGrid(_))));
        assert!(matches!(check_admissible(6.0, 8.0, &[]), Err(Error::InvalidGrid(_))));
        assert!(ModelParams::new(0.5, -1.0, 6.0, 0.0).is_err());
        assert!(ModelParams::new(0.5, 8.0, 6.0, -0.1).is_err());
    }

    #[test]
    fn equilibrium_beta6_gamma8() {
        let rep = equilibrium_report(6.0, 8.0, 1e-12, &default_delta_grid()).unwrap();
        assert!((rep.v0 - V0_BETA6_GAMMA8).abs() < 1e-12);
        assert!(rep.v0 > -1.95 && rep.v0 < -1.94);
        assert!(rep.residuals.cubic.abs() <= 1e-12);
        assert!(rep.residuals.nullcline_v.abs() <= 1e-12);
        assert!(rep.residuals.nullcline_w.abs() <= 1e-12);
        assert!(rep.bounds_satisfied);
        assert_eq!(rep.w0, (rep.v0 + 6.0) / 8.0);
        assert!(rep.v0 < -(1.625f64).sqrt());
        assert!(rep.newton_bisection_gap < 1e-6);
    }

    #[test]
    fn non_admissible_equilibrium_is_a_precondition_error() {
        assert!(matches!(
            solve_equilibrium(1.0, 1.0, 1e-12),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn witness_is_validated() {
        let p = ModelParams::new(0.5, 8.0, 6.0, 0.0).unwrap();
        let p = p.with_witness(&[0.2]).unwrap();
        assert_eq!(p.delta_witness, Some(0.2));
        let bad = ModelParams {
            delta_witness: Some(1e-4),
            ..p
        };
        assert!(bad.validate().is_err());
    }
}
