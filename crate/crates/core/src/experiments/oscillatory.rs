//! Kernel-weighted oscillatory integral of the linear heat equation and its
//! decay in the frequency.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::log_log_slope;
use super::quadrature::GaussLegendre;
use crate::error::{Error, Result};

/// Test profiles `f(y, s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Zero,
    Constant,
    /// `exp(-y²) cos(s)`
    GaussianCos,
}

impl Profile {
    pub fn name(self) -> &'static str {
        match self {
            Profile::Zero => "zero",
            Profile::Constant => "constant",
            Profile::GaussianCos => "gaussian_cos",
        }
    }

    pub fn eval(self, y: f64, s: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Constant => 1.0,
            Profile::GaussianCos => (-y * y).exp() * s.cos(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscillatoryOptions {
    /// Inner (`z`) panels of the coarsest level.
    pub inner_panels: usize,
    /// Refinement levels before giving up.
    pub max_refinements: usize,
    pub rel_tol: f64,
}

impl Default for OscillatoryOptions {
    fn default() -> Self {
        Self {
            inner_panels: 24,
            max_refinements: 4,
            rel_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillatoryValue {
    pub re: f64,
    pub im: f64,
    pub abs: f64,
    pub refinements: usize,
}

/// Gaussian weight `e^{-z²}` is cut at 8 of its standard deviations.
const Z_MAX: f64 = 8.0 / std::f64::consts::SQRT_2;

/// `|∫_0^t e^{-(λ + iω)τ} ψ(x, τ) dτ|` with
/// `ψ(x, τ) = π^{-1/2} ∫ e^{-z²} h(x - 2√τ z, t - τ) dz` and `h = f/(d² + y²)`.
///
/// This is the modulus of the heat-kernel Duhamel integral of
/// `h(y, s) e^{iωs}` weighted by `e^{-λ(t-s)}`. The outer integral uses
/// `τ = u²`. Both panel counts are doubled until successive values agree to
/// `rel_tol · |I|`.
pub fn oscillatory_integral(
    lambda: f64,
    d: f64,
    omega: f64,
    profile: Profile,
    x: f64,
    t: f64,
    options: &OscillatoryOptions,
) -> Result<OscillatoryValue> {
    if !(d > 0.0) {
        return Err(Error::InvalidParameter {
            name: "d",
            value: d,
            reason: "must be positive",
        });
    }
    if !(t > 0.0) {
        return Err(Error::InvalidParameter {
            name: "t",
            value: t,
            reason: "must be positive",
        });
    }
    let gl = GaussLegendre::new(8);
    let base_outer = 16usize.max((2.0 * omega * t / std::f64::consts::PI).ceil() as usize);
    let eval = |outer: usize, inner: usize| -> (f64, f64) {
        let zs = gl.composite_points(-Z_MAX, Z_MAX, inner);
        let norm = 1.0 / std::f64::consts::PI.sqrt();
        gl.composite_points(0.0, t.sqrt(), outer)
            .into_iter()
            .map(|(u, wu)| {
                let tau = u * u;
                let s = t - tau;
                let psi: f64 = zs
                    .iter()
                    .map(|&(z, wz)| {
                        let y = x - 2.0 * u * z;
                        wz * (-z * z).exp() * profile.eval(y, s) / (d * d + y * y)
                    })
                    .sum::<f64>()
                    * norm;
                let mag = (-lambda * tau).exp() * psi * 2.0 * u * wu;
                (mag * (omega * tau).cos(), -mag * (omega * tau).sin())
            })
            .fold((0.0, 0.0), |(a, b), (c, e)| (a + c, b + e))
    };
    let (mut outer, mut inner) = (base_outer, options.inner_panels.max(1));
    let mut prev = eval(outer, inner);
    let mut diff = f64::INFINITY;
    for level in 1..=options.max_refinements {
        outer *= 2;
        inner *= 2;
        let cur = eval(outer, inner);
        diff = (cur.0 - prev.0).hypot(cur.1 - prev.1);
        let abs = cur.0.hypot(cur.1);
        if diff <= options.rel_tol * abs {
            return Ok(OscillatoryValue {
                re: cur.0,
                im: cur.1,
                abs,
                refinements: level,
            });
        }
        prev = cur;
    }
    Err(Error::Accuracy {
        difference: diff,
        magnitude: prev.0.hypot(prev.1),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscillatoryDecay {
    pub profile: Profile,
    pub omegas: Vec<f64>,
    pub magnitudes: Vec<f64>,
    /// `ω |I(ω)|`
    pub scaled: Vec<f64>,
    /// Log-log slope of `|I|` against `ω`; `None` when `I` vanishes.
    pub order: Option<f64>,
}

/// Evaluates the integral over `omegas` (in parallel) and fits the decay order.
pub fn oscillatory_decay_check(
    lambda: f64,
    d: f64,
    omegas: &[f64],
    profile: Profile,
    x: f64,
    t: f64,
    options: &OscillatoryOptions,
) -> Result<OscillatoryDecay> {
    if !(lambda > 0.0) {
        return Err(Error::Precondition(format!(
            "oscillatory integral needs v0² - 1 > 0, got {lambda}"
        )));
    }
    if omegas.len() < 2 || omegas.windows(2).any(|w| !(w[1] > w[0])) || omegas[0] <= 1.0 {
        return Err(Error::Precondition(
            "omega list must be increasing, with at least two values above 1".into(),
        ));
    }
    let values = omegas
        .par_iter()
        .map(|&w| oscillatory_integral(lambda, d, w, profile, x, t, options))
        .collect::<Result<Vec<_>>>()?;
    let magnitudes: Vec<f64> = values.iter().map(|v| v.abs).collect();
    let scaled = omegas.iter().zip(&magnitudes).map(|(w, m)| w * m).collect();
    let order = if magnitudes.iter().all(|&m| m > 0.0) {
        Some(log_log_slope(omegas, &magnitudes)?)
    } else {
        None
    };
    Ok(OscillatoryDecay {
        profile,
        omegas: omegas.to_vec(),
        magnitudes,
        scaled,
        order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_profile_gives_zero() {
        let v = oscillatory_integral(2.78, 1.0, 100.0, Profile::Zero, 0.0, 2.0, &Default::default()).unwrap();
        assert_eq!(v.abs, 0.0);
    }

    #[test]
    fn zero_frequency_constant_profile_at_small_time() {
        // h is nearly constant near x = 0 for t ≪ d², so I ≈ (1 - e^{-λt})/(λ d²).
        let (lambda, d, t) = (1.0, 10.0, 0.01);
        let v = oscillatory_integral(lambda, d, 1e-9, Profile::Constant, 0.0, t, &Default::default()).unwrap();
        let expect = (1.0 - (-lambda * t).exp()) / lambda / (d * d);
        assert!((v.abs - expect).abs() < 1e-3 * expect, "{} vs {expect}", v.abs);
    }

    #[test]
    fn decays_like_inverse_frequency() {
        let dec = oscillatory_decay_check(
            2.78,
            1.0,
            &[50.0, 100.0, 200.0, 400.0],
            Profile::Constant,
            0.0,
            2.0,
            &Default::default(),
        )
        .unwrap();
        let order = dec.order.unwrap();
        assert!((-1.3..=-0.7).contains(&order), "{order}");
    }

    #[test]
    fn rejects_bad_omega_list() {
        let e = oscillatory_decay_check(1.0, 1.0, &[100.0, 50.0], Profile::Constant, 0.0, 1.0, &Default::default());
        assert!(matches!(e, Err(Error::Precondition(_))));
    }
}
