//! The interferential stimulus and the coefficient fields built from it.
//!
//! Two point sources sit at distances `d1`, `d2` from the axon, the second
//! shifted by `x0` along it:
//!
//! ```text
//! A(x) = a / (d1^2 + x^2)          B(x) = b / (d2^2 + (x - x0)^2)
//! I(x,t) = A ω1 cos(ω1 t) + B ω2 cos(ω2 t),      ω2 = ω1 + η
//! ```
//!
//! `I = ∂t J0` with `J0 = A sin(ω1 t) + B sin(ω2 t)`, the explicit fast
//! oscillation that is subtracted before comparing with the averaged system.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Equilibrium;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceParams {
    pub a: f64,
    pub b: f64,
    pub d1: f64,
    pub d2: f64,
    pub x0: f64,
    pub omega1: f64,
    /// Beat frequency.
    pub eta: f64,
}

impl SourceParams {
    pub fn new(a: f64, b: f64, d1: f64, d2: f64, x0: f64, omega1: f64, eta: f64) -> Result<Self> {
        let s = Self {
            a,
            b,
            d1,
            d2,
            x0,
            omega1,
            eta,
        };
        s.validate()?;
        Ok(s)
    }

    /// No stimulation; the frequencies are irrelevant but must be valid.
    pub fn silent() -> Self {
        Self {
            a: 0.0,
            b: 0.0,
            d1: 1.0,
            d2: 1.0,
            x0: 0.0,
            omega1: 100.0,
            eta: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, f64, bool); 7] = [
            ("a", self.a, self.a.is_finite()),
            ("b", self.b, self.b.is_finite()),
            ("d1", self.d1, self.d1 > 0.0 && self.d1.is_finite()),
            ("d2", self.d2, self.d2 > 0.0 && self.d2.is_finite()),
            ("x0", self.x0, self.x0.is_finite()),
            ("omega1", self.omega1, self.omega1 > 0.0 && self.omega1.is_finite()),
            ("eta", self.eta, self.eta > 0.0 && self.eta.is_finite()),
        ];
        for (name, value, ok) in checks {
            if !ok {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "distances and frequencies must be positive, amplitudes finite",
                });
            }
        }
        Ok(())
    }

    pub fn omega2(&self) -> f64 {
        self.omega1 + self.eta
    }

    pub fn with_omega1(self, omega1: f64) -> Self {
        Self { omega1, ..self }
    }

    pub fn is_silent(&self) -> bool {
        self.a == 0.0 && self.b == 0.0
    }
}

/// Spatial profiles at one point, with analytic second derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceFields {
    pub a: f64,
    pub b: f64,
    pub a_xx: f64,
    pub b_xx: f64,
}

fn lorentzian(amp: f64, d: f64, y: f64) -> (f64, f64) {
    let q = d * d + y * y;
    let value = amp / q;
    let second = amp * (6.0 * y * y - 2.0 * d * d) / (q * q * q);
    (value, second)
}

pub fn eval_profiles(params: &SourceParams, x: f64) -> SourceFields {
    let (a, a_xx) = lorentzian(params.a, params.d1, x);
    let (b, b_xx) = lorentzian(params.b, params.d2, x - params.x0);
    SourceFields { a, b, a_xx, b_xx }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeFields {
    /// Input current `I(x,t)`.
    pub current: f64,
    pub j0: f64,
    /// `A²/2 + B²/2 + AB cos(ηt)`.
    pub envelope: f64,
}

pub fn eval_time_fields(params: &SourceParams, x: f64, t: f64) -> TimeFields {
    time_fields_from(params, &eval_profiles(params, x), t)
}

pub(crate) fn time_fields_from(params: &SourceParams, f: &SourceFields, t: f64) -> TimeFields {
    let (w1, w2) = (params.omega1, params.omega2());
    let (s1, c1) = (w1 * t).sin_cos();
    let (s2, c2) = (w2 * t).sin_cos();
    TimeFields {
        current: f.a * w1 * c1 + f.b * w2 * c2,
        j0: f.a * s1 + f.b * s2,
        envelope: envelope(f.a, f.b, params.eta, t),
    }
}

pub fn envelope(a: f64, b: f64, eta: f64, t: f64) -> f64 {
    0.5 * a * a + 0.5 * b * b + a * b * (eta * t).cos()
}

/// `J0(x,t)` alone.
pub fn j0(params: &SourceParams, f: &SourceFields, t: f64) -> f64 {
    f.a * (params.omega1 * t).sin() + f.b * (params.omega2() * t).sin()
}

/// Coefficients of the approximation-error equation at one point.
///
/// `phi3 = ∂x²J0 + (1 - (v0+V)²) J0 - J0³/3 + (v0+V)(A²/2 cos 2ω1t + B²/2 cos 2ω2t
/// + AB cos (ω1+ω2)t)`. The linear `J0` term comes from `(1 - v0²) v` in the
/// centered equation and is required for `v - V - J0` to solve the error
/// system exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorCoefficients {
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
    pub j0: f64,
}

pub fn error_coefficients(
    params: &SourceParams,
    equilibrium: &Equilibrium,
    x: f64,
    t: f64,
    v: f64,
) -> ErrorCoefficients {
    coefficients_from(params, equilibrium.v0, &eval_profiles(params, x), t, v)
}

pub(crate) fn coefficients_from(
    params: &SourceParams,
    v0: f64,
    f: &SourceFields,
    t: f64,
    v: f64,
) -> ErrorCoefficients {
    Phases::new(params, t).coefficients(v0, f, v)
}

/// Trigonometric factors of the source at one time, shared by all grid points.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Phases {
    s1: f64,
    s2: f64,
    c11: f64,
    c22: f64,
    c12: f64,
}

impl Phases {
    pub(crate) fn new(params: &SourceParams, t: f64) -> Self {
        let (w1, w2) = (params.omega1, params.omega2());
        Self {
            s1: (w1 * t).sin(),
            s2: (w2 * t).sin(),
            c11: (2.0 * w1 * t).cos(),
            c22: (2.0 * w2 * t).cos(),
            c12: ((w1 + w2) * t).cos(),
        }
    }

    pub(crate) fn coefficients(&self, v0: f64, f: &SourceFields, v: f64) -> ErrorCoefficients {
        let j0 = f.a * self.s1 + f.b * self.s2;
        let j0_xx = f.a_xx * self.s1 + f.b_xx * self.s2;
        let shifted = v0 + v;
        let fast_envelope =
            0.5 * f.a * f.a * self.c11 + 0.5 * f.b * f.b * self.c22 + f.a * f.b * self.c12;
        ErrorCoefficients {
            phi1: -j0 * j0 - 2.0 * shifted * j0,
            phi2: -(shifted + j0),
            phi3: j0_xx + (1.0 - shifted * shifted) * j0 - j0 * j0 * j0 / 3.0
                + shifted * fast_envelope,
            j0,
        }
    }
}

/// `Δ = |a|/d1² + |b|/d2²`, also used as the bound `M >= ||J0||`.
pub fn sup_amplitude(params: &SourceParams) -> f64 {
    params.a.abs() / (params.d1 * params.d1) + params.b.abs() / (params.d2 * params.d2)
}

/// `max_x (|A(x)| + |B(x)|)` over the given points. Equals
/// [`sup_amplitude`] only when the two peaks coincide (`x0 = 0`).
pub fn grid_sup_amplitude(params: &SourceParams, xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter()
        .map(|x| {
            let f = eval_profiles(params, x);
            f.a.abs() + f.b.abs()
        })
        .fold(0.0, f64::max)
}

/// Writes `(x, A, B, I, J0, envelope)` rows at time `t`.
pub fn write_fields_csv<W: std::io::Write>(
    params: &SourceParams,
    xs: &[f64],
    t: f64,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "A", "B", "I", "J0", "envelope"])?;
    for &x in xs {
        let f = eval_profiles(params, x);
        let tf = time_fields_from(params, &f, t);
        w.write_record(
            [x, f.a, f.b, tf.current, tf.j0, tf.envelope]
                .iter()
                .map(|v| format!("{v:e}")),
        )?;
    }
    w.flush()?;
    Ok(())
}
