//! JSON run configurations.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{OscillatoryOptions, Profile};
use crate::model::ModelParams;
use crate::rectangles::FaceSampling;
use crate::solver::{DtPolicy, Grid, SystemKind};
use crate::source::SourceParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParams,
    #[serde(default = "SourceParams::silent")]
    pub source: SourceParams,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub study: StudyConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Chosen from the truncation tolerance when absent.
    pub half_extent: Option<f64>,
    pub n_points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            half_extent: None,
            n_points: 2001,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(rename = "T")]
    pub t_end: f64,
    pub dt_policy: DtPolicy,
    pub sample_every: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            t_end: 20.0,
            dt_policy: DtPolicy::default(),
            sample_every: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Json],
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

/// Gaussian initial data `(u1, u2) = (amp_1, amp_2) exp(-x²/width²)` in
/// centered variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConfig {
    pub amplitude_v: f64,
    pub amplitude_w: f64,
    pub width: f64,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            amplitude_v: 0.0,
            amplitude_w: 0.0,
            width: 3.0,
        }
    }
}

/// Bounds `(c1, c2, c3)` feeding the error rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorBounds {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StudyConfig {
    Equilibrium {
        #[serde(default = "default_tol")]
        tol: f64,
        #[serde(default)]
        delta_grid: Option<Vec<f64>>,
    },
    Admissible {
        #[serde(default)]
        delta_grid: Option<Vec<f64>>,
    },
    Rectangle {
        /// Defaults to the source's `Δ`.
        #[serde(default)]
        delta: Option<f64>,
        #[serde(default = "default_bound")]
        bound: f64,
        #[serde(default)]
        sampling: FaceSampling,
        /// Gauge of the initial bump of the invariance run; `0` skips it.
        #[serde(default = "default_gauge")]
        initial_gauge: f64,
        #[serde(default = "default_width")]
        initial_width: f64,
        #[serde(default)]
        error_bounds: Option<ErrorBounds>,
    },
    Simulate {
        #[serde(default = "default_system")]
        system: SystemKind,
        #[serde(default)]
        initial: InitialConfig,
    },
    AverageCheck {
        #[serde(default = "default_average_omegas")]
        omega_list: Vec<f64>,
        #[serde(default = "default_v_values")]
        v_values: Vec<f64>,
        #[serde(default = "default_x_values")]
        x_values: Vec<f64>,
        #[serde(default = "default_t_values")]
        t_values: Vec<f64>,
        #[serde(default = "default_window_samples")]
        window_samples: usize,
        #[serde(default = "default_ratio_range")]
        ratio_range: (f64, f64),
    },
    Sweep {
        omega_list: Vec<f64>,
        #[serde(default = "default_window")]
        window: f64,
        #[serde(default = "default_true")]
        linear_error: bool,
        #[serde(default = "default_pas_refinement")]
        pas_refinement: usize,
        #[serde(default = "default_gauge")]
        initial_gauge: f64,
        #[serde(default = "default_width")]
        initial_width: f64,
        /// Bound on `max(L, S)` of the certified rectangle.
        #[serde(default = "default_sweep_bound")]
        bound: f64,
        #[serde(default = "default_order_range")]
        order_range: (f64, f64),
        #[serde(default = "default_spread")]
        max_fv_spread: f64,
    },
    Oscillatory {
        #[serde(default = "default_oscillatory_omegas")]
        omega_list: Vec<f64>,
        #[serde(default = "default_profiles")]
        profiles: Vec<Profile>,
        /// Defaults to `source.d1`.
        #[serde(default)]
        d: Option<f64>,
        #[serde(default)]
        x: f64,
        #[serde(default = "default_oscillatory_t")]
        t: f64,
        #[serde(default)]
        options: OscillatoryOptions,
        #[serde(default = "default_decay_range")]
        order_range: (f64, f64),
    },
}

fn default_tol() -> f64 {
    1e-12
}
fn default_bound() -> f64 {
    0.5
}
fn default_gauge() -> f64 {
    0.5
}
fn default_width() -> f64 {
    3.0
}
fn default_system() -> SystemKind {
    SystemKind::Centered
}
fn default_average_omegas() -> Vec<f64> {
    vec![100.0, 200.0, 400.0]
}
fn default_v_values() -> Vec<f64> {
    vec![-0.2, 0.0, 0.2]
}
fn default_x_values() -> Vec<f64> {
    vec![0.0, 0.7, 2.0]
}
fn default_t_values() -> Vec<f64> {
    vec![0.3, 1.1, 2.5]
}
fn default_window_samples() -> usize {
    64
}
fn default_ratio_range() -> (f64, f64) {
    (0.4, 0.6)
}
fn default_window() -> f64 {
    0.5
}
fn default_true() -> bool {
    true
}
fn default_pas_refinement() -> usize {
    4
}
fn default_sweep_bound() -> f64 {
    0.009
}
fn default_order_range() -> (f64, f64) {
    (0.7, 1.3)
}
fn default_spread() -> f64 {
    3.0
}
fn default_oscillatory_omegas() -> Vec<f64> {
    vec![50.0, 100.0, 200.0, 400.0, 800.0]
}
fn default_profiles() -> Vec<Profile> {
    vec![Profile::Constant, Profile::GaussianCos]
}
fn default_oscillatory_t() -> f64 {
    2.0
}
fn default_decay_range() -> (f64, f64) {
    (-1.3, -0.7)
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig::Equilibrium {
            tol: default_tol(),
            delta_grid: None,
        }
    }
}

/// Study kinds, named as the subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    Equilibrium,
    Admissible,
    Rectangle,
    Simulate,
    AverageCheck,
    Sweep,
    Oscillatory,
}

impl StudyKind {
    pub fn name(self) -> &'static str {
        match self {
            StudyKind::Equilibrium => "equilibrium",
            StudyKind::Admissible => "admissible",
            StudyKind::Rectangle => "rectangle",
            StudyKind::Simulate => "simulate",
            StudyKind::AverageCheck => "average-check",
            StudyKind::Sweep => "sweep",
            StudyKind::Oscillatory => "oscillatory",
        }
    }
}

impl StudyConfig {
    pub fn kind(&self) -> StudyKind {
        match self {
            StudyConfig::Equilibrium { .. } => StudyKind::Equilibrium,
            StudyConfig::Admissible { .. } => StudyKind::Admissible,
            StudyConfig::Rectangle { .. } => StudyKind::Rectangle,
            StudyConfig::Simulate { .. } => StudyKind::Simulate,
            StudyConfig::AverageCheck { .. } => StudyKind::AverageCheck,
            StudyConfig::Sweep { .. } => StudyKind::Sweep,
            StudyConfig::Oscillatory { .. } => StudyKind::Oscillatory,
        }
    }

    /// Default options for `kind`; sweeps get `ω1 ∈ {100, 200, 400, 800}`.
    pub fn default_for(kind: StudyKind) -> Self {
        let json = match kind {
            StudyKind::Sweep => r#"{"kind":"sweep","omega_list":[100,200,400,800]}"#.to_string(),
            k => format!(r#"{{"kind":"{}"}}"#, k.name()),
        };
        serde_json::from_str(&json).expect("study defaults deserialize")
    }
}

impl RunConfig {
    /// Reference parameters `(ε, γ, β, ρ) = (0.5, 8, 6, 0)` with a small
    /// source and the default options of `kind`. Sweeps use `X = 40` and
    /// measure errors on `|x| ≤ 20`; simulations run to `T = 2`.
    pub fn reference(kind: StudyKind) -> Self {
        let mut time = TimeConfig::default();
        if kind == StudyKind::Simulate {
            time.t_end = 2.0;
            time.sample_every = 100;
        }
        Self {
            model: ModelParams::new(0.5, 8.0, 6.0, 0.0).expect("reference model"),
            source: SourceParams::new(0.004, 0.004, 1.0, 1.0, 1.0, 100.0, 1.0).expect("reference source"),
            grid: GridConfig {
                half_extent: (kind == StudyKind::Sweep).then_some(40.0),
                n_points: 2001,
            },
            time,
            study: StudyConfig::default_for(kind),
            output: OutputConfig::default(),
        }
    }

    /// Grid from the configuration, with the half-extent chosen from the
    /// truncation tolerance when not given.
    pub fn grid(&self) -> Result<Grid> {
        let x = match self.grid.half_extent {
            Some(x) => x,
            None => Grid::half_extent_for_tolerance(&self.source, crate::solver::Truncation::DEFAULT_TOL),
        };
        Grid::new(x, self.grid.n_points).map_err(|e| at("grid", e))
    }

    /// Checks every module precondition, reporting the offending field path.
    pub fn validate(&self) -> Result<()> {
        self.model.validate().map_err(|e| at("model", e))?;
        self.source.validate().map_err(|e| at("source", e))?;
        self.grid()?;
        let t = &self.time;
        if !(t.t_end > 0.0 && t.t_end.is_finite()) {
            return Err(field("time.T", "must be finite and positive"));
        }
        t.dt_policy.validate().map_err(|e| at("time.dt_policy", e))?;
        if t.sample_every == 0 {
            return Err(field("time.sample_every", "must be at least 1"));
        }
        if self.output.formats.is_empty() {
            return Err(field("output.formats", "must name at least one format"));
        }
        self.validate_study()
    }

    fn validate_study(&self) -> Result<()> {
        let increasing = |name: &str, w: &[f64], min_len: usize| -> Result<()> {
            if w.len() < min_len {
                return Err(field(name, &format!("needs at least {min_len} values")));
            }
            if w.iter().any(|x| !(x.is_finite() && *x > 0.0)) || w.windows(2).any(|p| !(p[1] > p[0])) {
                return Err(field(name, "must be positive and strictly increasing"));
            }
            Ok(())
        };
        let grid_ok = |name: &str, g: &Option<Vec<f64>>| -> Result<()> {
            match g {
                Some(g) if g.is_empty() || g.iter().any(|d| !(*d > 0.0 && *d < 0.25)) => {
                    Err(field(name, "must be non-empty with values in (0, 1/4)"))
                }
                _ => Ok(()),
            }
        };
        match &self.study {
            StudyConfig::Equilibrium { tol, delta_grid } => {
                if !(*tol > 0.0) {
                    return Err(field("study.tol", "must be positive"));
                }
                grid_ok("study.delta_grid", delta_grid)
            }
            StudyConfig::Admissible { delta_grid } => grid_ok("study.delta_grid", delta_grid),
            StudyConfig::Rectangle {
                delta,
                bound,
                sampling,
                initial_gauge,
                initial_width,
                ..
            } => {
                if let Some(d) = delta {
                    if !(*d >= 0.0 && d.is_finite()) {
                        return Err(field("study.delta", "must be finite and non-negative"));
                    }
                }
                if !(*bound > 0.0) {
                    return Err(field("study.bound", "must be positive"));
                }
                if sampling.x_samples < 2 || sampling.t_samples < 1 || sampling.face_samples < 2 {
                    return Err(field("study.sampling", "needs x_samples >= 2, t_samples >= 1, face_samples >= 2"));
                }
                if !(*initial_gauge >= 0.0 && *initial_gauge < 1.0) {
                    return Err(field("study.initial_gauge", "must lie in [0, 1)"));
                }
                if !(*initial_width > 0.0) {
                    return Err(field("study.initial_width", "must be positive"));
                }
                Ok(())
            }
            StudyConfig::Simulate { initial, .. } => {
                if !(initial.width > 0.0) {
                    return Err(field("study.initial.width", "must be positive"));
                }
                if !(initial.amplitude_v.is_finite() && initial.amplitude_w.is_finite()) {
                    return Err(field("study.initial", "amplitudes must be finite"));
                }
                Ok(())
            }
            StudyConfig::AverageCheck {
                omega_list,
                v_values,
                x_values,
                t_values,
                window_samples,
                ratio_range,
            } => {
                increasing("study.omega_list", omega_list, 2)?;
                if v_values.is_empty() || x_values.is_empty() || t_values.is_empty() {
                    return Err(field("study", "v_values, x_values and t_values must be non-empty"));
                }
                if *window_samples == 0 {
                    return Err(field("study.window_samples", "must be at least 1"));
                }
                if !(ratio_range.0 < ratio_range.1) {
                    return Err(field("study.ratio_range", "must be an increasing pair"));
                }
                Ok(())
            }
            StudyConfig::Sweep {
                omega_list,
                window,
                pas_refinement,
                initial_gauge,
                initial_width,
                bound,
                order_range,
                max_fv_spread,
                ..
            } => {
                increasing("study.omega_list", omega_list, 3)?;
                if !(*window > 0.0 && *window <= 1.0) {
                    return Err(field("study.window", "must lie in (0, 1]"));
                }
                if *pas_refinement == 0 {
                    return Err(field("study.pas_refinement", "must be at least 1"));
                }
                if !(*initial_gauge >= 0.0 && *initial_gauge < 1.0) {
                    return Err(field("study.initial_gauge", "must lie in [0, 1)"));
                }
                if !(*initial_width > 0.0) {
                    return Err(field("study.initial_width", "must be positive"));
                }
                if !(*bound > 0.0) {
                    return Err(field("study.bound", "must be positive"));
                }
                if !(order_range.0 < order_range.1) {
                    return Err(field("study.order_range", "must be an increasing pair"));
                }
                if !(*max_fv_spread >= 1.0) {
                    return Err(field("study.max_fv_spread", "must be at least 1"));
                }
                Ok(())
            }
            StudyConfig::Oscillatory {
                omega_list,
                profiles,
                d,
                t,
                order_range,
                ..
            } => {
                increasing("study.omega_list", omega_list, 2)?;
                if omega_list[0] <= 1.0 {
                    return Err(field("study.omega_list", "values must exceed 1"));
                }
                if profiles.is_empty() {
                    return Err(field("study.profiles", "must name at least one profile"));
                }
                if let Some(d) = d {
                    if !(*d > 0.0) {
                        return Err(field("study.d", "must be positive"));
                    }
                }
                if !(*t > 0.0) {
                    return Err(field("study.t", "must be positive"));
                }
                if !(order_range.0 < order_range.1) {
                    return Err(field("study.order_range", "must be an increasing pair"));
                }
                Ok(())
            }
        }
    }
}

fn field(path: &str, reason: &str) -> Error {
    Error::Configuration(format!("{path}: {reason}"))
}

fn at(prefix: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, value, reason } => {
            Error::Configuration(format!("{prefix}.{name} = {value}: {reason}"))
        }
        other => Error::Configuration(format!("{prefix}: {other}")),
    }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Configuration(format!("{path}: {inner}"))
    })?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Configuration(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "model": {"epsilon": 0.5, "gamma": 8, "beta": 6, "rho": 0},
        "source": {"a": 0, "b": 0, "d1": 1, "d2": 1, "x0": 0, "omega1": 100, "eta": 1}
    }"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.study.kind(), StudyKind::Equilibrium);
        assert_eq!(c.grid.n_points, 2001);
        assert_eq!(c.time.t_end, 20.0);
        assert_eq!(c.output.formats, vec![Format::Csv, Format::Json]);
    }

    #[test]
    fn negative_gamma_names_the_field() {
        let text = MINIMAL.replace("\"gamma\": 8", "\"gamma\": -1");
        let msg = parse_config(&text).unwrap_err().to_string();
        assert!(msg.contains("model.gamma"), "{msg}");
    }

    fn with(key: &str, value: serde_json::Value) -> String {
        let mut v: serde_json::Value = serde_json::from_str(MINIMAL).unwrap();
        v[key] = value;
        v.to_string()
    }

    #[test]
    fn sweep_without_omegas_is_rejected() {
        let msg = parse_config(&with("study", serde_json::json!({"kind": "sweep"}))).unwrap_err().to_string();
        assert!(msg.contains("omega_list"), "{msg}");
        let ok = with("study", serde_json::json!({"kind": "sweep", "omega_list": [100, 200, 400, 800]}));
        assert_eq!(parse_config(&ok).unwrap().study.kind(), StudyKind::Sweep);
    }

    #[test]
    fn parse_errors_carry_position() {
        let msg = parse_config("{\"model\": {\"epsilon\": 0.5,,}}").unwrap_err().to_string();
        assert!(msg.contains("line 1"), "{msg}");
    }

    #[test]
    fn unknown_fields_are_rejected_with_path() {
        let msg = parse_config(&with("grid", serde_json::json!({"n_pts": 3}))).unwrap_err().to_string();
        assert!(msg.starts_with("configuration error: grid"), "{msg}");
        let msg = parse_config(&with("study", serde_json::json!({"kind": "sweep", "omega_list": [1, 2, 3], "window": 2})))
            .unwrap_err()
            .to_string();
        assert!(msg.contains("study.window"), "{msg}");
    }

    #[test]
    fn reference_configs_validate() {
        for k in [
            StudyKind::Equilibrium,
            StudyKind::Admissible,
            StudyKind::Rectangle,
            StudyKind::Simulate,
            StudyKind::AverageCheck,
            StudyKind::Sweep,
            StudyKind::Oscillatory,
        ] {
            let c = RunConfig::reference(k);
            c.validate().unwrap();
            assert_eq!(c.study.kind(), k);
            let round: RunConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
            assert_eq!(round, c);
        }
    }
}
