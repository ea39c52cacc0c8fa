//! Study execution, artifacts and manifests.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{Format, RunConfig, StudyConfig, StudyKind};
use crate::error::{Error, Result};
use crate::experiments::{
    approximation_study, bump_initial, fit_residual_constant, oscillatory_decay_check, residual_amplitude,
    StudyParams,
};
use crate::model::{check_admissible, default_delta_grid, equilibrium_report, Equilibrium};
use crate::rectangles::{
    aspect_margin, empirical_delta_star, error_rectangle, face_flux_report, find_rectangle, ErrorRectangleInputs,
    InvarianceMonitor, VectorField,
};
use crate::solver::io::{write_trajectory_csv, SolverManifest};
use crate::solver::{simulate, simulate_observed, FhnSystem, FieldState, SystemKind, Trajectory};
use crate::source::sup_amplitude;

/// Settings that come from the command line rather than the config file.
#[derive(Debug, Clone, Default)]
pub struct RunContext {
    /// Overrides `output.directory`.
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    /// Jitters the certification sample points; deterministic when absent.
    pub seed: Option<u64>,
    pub command: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".into(), |x| format!("{x:.6}"))
}

fn check(name: &str, pass: bool, detail: String) -> Check {
    Check {
        name: name.to_string(),
        pass,
        detail,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunOutcome {
    pub study: StudyKind,
    pub checks: Vec<Check>,
    pub artifacts: Vec<PathBuf>,
    pub manifest: PathBuf,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// 0 when every check passes, 1 when a check fails, 2 when the run aborted
/// (blow-up, invalid configuration, I/O).
pub fn exit_code(result: &Result<RunOutcome>) -> i32 {
    match result {
        Ok(o) if o.passed() => 0,
        Ok(_) => 1,
        Err(_) => 2,
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    study: StudyKind,
    command: &'a [String],
    config: &'a RunConfig,
    seed: Option<u64>,
    threads: usize,
    wall_time_s: f64,
    diagnostics: &'a Value,
    checks: &'a [Check],
    all_passed: bool,
    artifacts: Vec<String>,
    error: Option<String>,
}

struct Artifacts<'a> {
    dir: PathBuf,
    config: &'a RunConfig,
    written: Vec<PathBuf>,
}

impl Artifacts<'_> {
    fn csv(&mut self, name: &str, write: impl FnOnce(BufWriter<File>) -> Result<()>) -> Result<()> {
        if !self.config.output.wants(Format::Csv) {
            return Ok(());
        }
        let path = self.dir.join(name);
        write(BufWriter::new(File::create(&path)?))?;
        self.written.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        if !self.config.output.wants(Format::Json) {
            return Ok(());
        }
        let path = self.dir.join(name);
        serde_json::to_writer_pretty(BufWriter::new(File::create(&path)?), value)?;
        self.written.push(path);
        Ok(())
    }
}

/// Executes the configured study and writes its artifacts plus
/// `manifest.json`. The manifest is written even when the study fails.
pub fn run(config: &RunConfig, ctx: &RunContext) -> Result<RunOutcome> {
    config.validate()?;
    let dir = ctx.out_dir.clone().unwrap_or_else(|| config.output.directory.clone());
    std::fs::create_dir_all(&dir)?;
    let start = Instant::now();
    let mut art = Artifacts {
        dir: dir.clone(),
        config,
        written: Vec::new(),
    };
    let result = run_study(config, ctx, &mut art);
    let (diagnostics, checks, error) = match &result {
        Ok((d, c)) => (d.clone(), c.clone(), None),
        Err(e) => (Value::Null, Vec::new(), Some(e.to_string())),
    };
    let manifest_path = dir.join("manifest.json");
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        study: config.study.kind(),
        command: &ctx.command,
        config,
        seed: ctx.seed,
        threads: rayon::current_num_threads(),
        wall_time_s: start.elapsed().as_secs_f64(),
        diagnostics: &diagnostics,
        checks: &checks,
        all_passed: error.is_none() && checks.iter().all(|c| c.pass),
        artifacts: art.written.iter().map(|p| file_name(p)).collect(),
        error,
    };
    serde_json::to_writer_pretty(BufWriter::new(File::create(&manifest_path)?), &manifest)?;
    result.map(|(_, checks)| RunOutcome {
        study: config.study.kind(),
        checks,
        artifacts: art.written,
        manifest: manifest_path,
    })
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn equilibrium_for(config: &RunConfig) -> Result<Equilibrium> {
    Ok(equilibrium_report(config.model.beta, config.model.gamma, 1e-12, &default_delta_grid())?.equilibrium())
}

fn run_study(config: &RunConfig, ctx: &RunContext, art: &mut Artifacts) -> Result<(Value, Vec<Check>)> {
    let model = config.model;
    match &config.study {
        StudyConfig::Equilibrium { tol, delta_grid } => {
            let grid = delta_grid.clone().unwrap_or_else(default_delta_grid);
            let rep = equilibrium_report(model.beta, model.gamma, *tol, &grid)?;
            art.json("equilibrium.json", &rep)?;
            let checks = vec![
                check(
                    "cubic_residual",
                    rep.residuals.cubic.abs() <= *tol,
                    format!("|h(v0)| = {:e}", rep.residuals.cubic.abs()),
                ),
                check(
                    "bounds_satisfied",
                    rep.bounds_satisfied,
                    format!("v0 = {} in [{}, {})", rep.v0, rep.lower_bound, opt(rep.upper_bound)),
                ),
            ];
            Ok((serde_json::to_value(rep)?, checks))
        }
        StudyConfig::Admissible { delta_grid } => {
            let grid = delta_grid.clone().unwrap_or_else(default_delta_grid);
            let adm = check_admissible(model.beta, model.gamma, &grid)?;
            art.json("admissible.json", &adm)?;
            let checks = vec![check(
                "admissible",
                adm.admissible,
                format!("witness {}, discriminant {:e}", opt(adm.witness), adm.discriminant),
            )];
            Ok((serde_json::to_value(adm)?, checks))
        }
        StudyConfig::Rectangle {
            delta,
            bound,
            sampling,
            initial_gauge,
            initial_width,
            error_bounds,
        } => {
            let eq = equilibrium_for(config)?;
            let source = config.source;
            let delta = delta.unwrap_or_else(|| sup_amplitude(&source));
            let delta_star = empirical_delta_star(eq.v0, model.gamma, *bound);
            let Some(rect) = find_rectangle(eq.v0, model.gamma, delta, *bound) else {
                let report = json!({"rect": null, "Delta": delta, "empirical_delta_star": delta_star});
                art.json("rectangle.json", &report)?;
                return Ok((
                    report,
                    vec![check("rectangle_found", false, format!("D({delta}) has no rectangle within bound {bound}"))],
                ));
            };
            let mut sampling = *sampling;
            if ctx.seed.is_some() {
                sampling.jitter_seed = ctx.seed;
            }
            let flux = face_flux_report(VectorField::H, &rect, &model, &eq, &source, &sampling)?;
            let mut checks = vec![
                check("rectangle_found", true, format!("L = {:e}, S = {:e}", rect.l, rect.s)),
                check("face_flux_negative", flux.margin < 0.0, format!("margin {:e} over {} samples", flux.margin, flux.samples)),
            ];
            let invariance = if *initial_gauge > 0.0 {
                let grid = config.grid()?;
                let sys = FhnSystem::new(SystemKind::Pas, model, eq, source, &grid);
                let mut mon = InvarianceMonitor::new(rect, InvarianceMonitor::DEFAULT_TOL);
                let dt = config.time.dt_policy.dt(SystemKind::Pas, &source);
                let init = bump_initial(&grid, &rect, *initial_gauge, *initial_width);
                simulate_observed(&sys, &grid, init, config.time.t_end, dt, 1, |s| {
                    mon.observe(s);
                    Ok(())
                })?;
                let r = mon.report();
                checks.push(check(
                    "pas_invariance",
                    r.invariant,
                    format!("max gauge {} over {} samples", r.max_gauge, r.samples),
                ));
                Some(r)
            } else {
                None
            };
            let l_hat = error_bounds.and_then(|b| {
                error_rectangle(&ErrorRectangleInputs {
                    c1: b.c1,
                    c2: b.c2,
                    c3: b.c3,
                    eps_margin: aspect_margin(eq.v0, model.gamma),
                    v0: eq.v0,
                    gamma: model.gamma,
                })
            });
            let report = json!({
                "rect": rect,
                "Delta": delta,
                "empirical_delta_star": delta_star,
                "margin": flux.margin,
                "worst_sample": flux,
                "samples": flux.samples,
                "invariant": invariance.map(|r| r.invariant),
                "max_gauge": invariance.map(|r| r.max_gauge),
                "first_exit_time": invariance.and_then(|r| r.first_exit_time),
                "L_hat": l_hat.map(|e| e.l_hat),
                "error_rectangle": l_hat,
            });
            art.json("rectangle.json", &report)?;
            Ok((report, checks))
        }
        StudyConfig::Simulate { system, initial } => {
            let eq = equilibrium_for(config)?;
            let grid = config.grid()?;
            let source = config.source;
            let t_end = config.time.t_end;
            let policy = config.time.dt_policy;
            let bump = FieldState::from_fn(
                0.0,
                &grid,
                |x| initial.amplitude_v * (-(x / initial.width).powi(2)).exp(),
                |x| initial.amplitude_w * (-(x / initial.width).powi(2)).exp(),
            );
            let run_pas = || -> Result<Trajectory> {
                let sys = FhnSystem::new(SystemKind::Pas, model, eq, source, &grid);
                simulate(&sys, &grid, bump.clone(), t_end, policy.dt(SystemKind::Pas, &source), 1)
            };
            let zero = FieldState::zeros(0.0, grid.n_points);
            let sample = config.time.sample_every;
            let dt = policy.dt(*system, &source);
            let traj = match system {
                SystemKind::Full => {
                    let init = FieldState {
                        t: 0.0,
                        u1: bump.u1.iter().map(|v| v + eq.v0).collect(),
                        u2: bump.u2.iter().map(|w| w + eq.w0).collect(),
                    };
                    simulate(&FhnSystem::new(*system, model, eq, source, &grid), &grid, init, t_end, dt, sample)?
                }
                SystemKind::Centered | SystemKind::Pas => {
                    simulate(&FhnSystem::new(*system, model, eq, source, &grid), &grid, bump.clone(), t_end, dt, sample)?
                }
                SystemKind::LinearError | SystemKind::NonlinearError => {
                    let pas = run_pas()?;
                    let sys = FhnSystem::new(*system, model, eq, source, &grid).with_pas(&pas);
                    simulate(&sys, &grid, zero, t_end, dt, sample)?
                }
                SystemKind::Remainder => {
                    let pas = run_pas()?;
                    let lin_sys = FhnSystem::new(SystemKind::LinearError, model, eq, source, &grid).with_pas(&pas);
                    let lin = simulate(&lin_sys, &grid, zero.clone(), t_end, dt, 1)?;
                    let sys = FhnSystem::new(*system, model, eq, source, &grid)
                        .with_pas(&pas)
                        .with_linear_error(&lin);
                    simulate(&sys, &grid, zero, t_end, dt, sample)?
                }
            };
            art.csv("trajectory.csv", |w| write_trajectory_csv(&traj, w))?;
            let steps = crate::solver::step_count(t_end, dt);
            let manifest = SolverManifest {
                system: *system,
                grid,
                dx: grid.dx(),
                dt: t_end / steps as f64,
                steps,
                samples: traj.len(),
                t_end,
                truncation: grid.truncation(&source),
            };
            let sup = |c: crate::solver::Component| crate::solver::y_norm(&traj, c);
            let diag = json!({
                "solver": manifest,
                "sup_u1": sup(crate::solver::Component::First),
                "sup_u2": sup(crate::solver::Component::Second),
            });
            art.json("simulation.json", &diag)?;
            let checks = vec![
                check("finite", traj.states.iter().all(|s| s.is_finite()), format!("{} samples", traj.len())),
                check(
                    "truncation",
                    manifest.truncation.acceptable(),
                    format!("relative edge amplitude {:e}", manifest.truncation.relative),
                ),
            ];
            Ok((diag, checks))
        }
        StudyConfig::AverageCheck {
            omega_list,
            v_values,
            x_values,
            t_values,
            window_samples,
            ratio_range,
        } => {
            let eq = equilibrium_for(config)?;
            let source = config.source;
            let mut rows = Vec::new();
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            let mut calibration = Vec::new();
            let mut held_out = Vec::new();
            for &v in v_values {
                for &x in x_values {
                    for &t in t_values {
                        let res: Vec<_> = omega_list
                            .iter()
                            .map(|&w| residual_amplitude(&model, &eq, &source.with_omega1(w), v, 0.0, x, t, *window_samples))
                            .collect();
                        for (w, r) in omega_list.iter().zip(&res) {
                            rows.push((v, x, t, *w, r.residual1, r.residual2));
                        }
                        for k in 1..res.len() {
                            for ratio in [res[k].residual1 / res[k - 1].residual1, res[k].residual2 / res[k - 1].residual2] {
                                lo = lo.min(ratio);
                                hi = hi.max(ratio);
                            }
                        }
                        calibration.push((v, x, t, omega_list[0]));
                        held_out.push((0.5 * v + 0.05, x + 0.35, t + 0.45, omega_list[omega_list.len() - 1]));
                    }
                }
            }
            let fit = fit_residual_constant(&model, &eq, &source, &calibration, &held_out, *window_samples, 2.0);
            art.csv("average_check.csv", |w| {
                let mut w = csv::Writer::from_writer(w);
                w.write_record(["V", "x", "t", "omega1", "residual1", "residual2"])?;
                for r in &rows {
                    w.serialize(r)?;
                }
                w.flush()?;
                Ok(())
            })?;
            let diag = json!({
                "halving_ratio_min": lo,
                "halving_ratio_max": hi,
                "residual_constant": fit,
                "points": rows.len(),
            });
            art.json("average_check.json", &diag)?;
            let checks = vec![
                check(
                    "halving_ratio",
                    lo >= ratio_range.0 && hi <= ratio_range.1,
                    format!("ratios in [{lo:.4}, {hi:.4}], required [{}, {}]", ratio_range.0, ratio_range.1),
                ),
                check(
                    "residual_constant_held_out",
                    fit.ok,
                    format!("C = {:e}, worst held-out ratio {:.3}", fit.c, fit.held_out_worst),
                ),
            ];
            Ok((diag, checks))
        }
        StudyConfig::Sweep {
            omega_list,
            window,
            linear_error,
            pas_refinement,
            initial_gauge,
            initial_width,
            bound,
            order_range,
            max_fv_spread,
        } => {
            let eq = equilibrium_for(config)?;
            let grid = config.grid()?;
            let source = config.source;
            let delta = sup_amplitude(&source);
            let rect = find_rectangle(eq.v0, model.gamma, delta, *bound).ok_or_else(|| {
                Error::Precondition(format!("no certified rectangle for Delta = {delta} within bound {bound}"))
            })?;
            let params = StudyParams {
                model,
                equilibrium: eq,
                source,
                grid,
                t_end: config.time.t_end,
                dt_policy: config.time.dt_policy,
                initial: bump_initial(&grid, &rect, *initial_gauge, *initial_width),
                rectangle: Some(rect),
                window: *window,
                linear_error: *linear_error,
                pas_refinement: *pas_refinement,
            };
            let res = approximation_study(&params, omega_list)?;
            art.csv("sweep.csv", |w| res.write_csv(w))?;
            art.json("sweep.json", &res)?;
            let order = res.fitted_order;
            let mut checks = vec![
                check(
                    "fitted_order",
                    order.is_some_and(|o| o >= order_range.0 && o <= order_range.1),
                    format!("order {}, required [{}, {}]", opt(order), order_range.0, order_range.1),
                ),
                check("monotone_decreasing", res.monotone_decreasing(), format!("errors_v {:?}", res.errors_v)),
                check(
                    "pas_invariance",
                    res.invariance.is_some_and(|r| r.invariant),
                    match res.invariance {
                        Some(r) => format!("max gauge {}, first exit {}", r.max_gauge, opt(r.first_exit_time)),
                        None => "no rectangle".into(),
                    },
                ),
                check(
                    "alpha_below_one_under_small_data",
                    !res.small_data.ok || res.alpha < 1.0,
                    format!("alpha {}, small data {}", res.alpha, res.small_data.ok),
                ),
            ];
            if *linear_error {
                let spread = res.fv_spread();
                checks.push(check(
                    "fv_times_omega_bounded",
                    spread.is_some_and(|s| s < *max_fv_spread),
                    format!("spread {}, required < {max_fv_spread}", opt(spread)),
                ));
            }
            let diag = json!({
                "fitted_order": res.fitted_order,
                "fitted_order_w": res.fitted_order_w,
                "rectangle": rect,
                "Delta": delta,
                "alpha": res.alpha,
                "small_data": res.small_data,
                "pas_stats": res.pas_stats,
                "pas_dt": res.pas_dt,
                "points": res.points,
                "truncation": grid.truncation(&source),
            });
            Ok((diag, checks))
        }
        StudyConfig::Oscillatory {
            omega_list,
            profiles,
            d,
            x,
            t,
            options,
            order_range,
        } => {
            let eq = equilibrium_for(config)?;
            let lambda = eq.v0 * eq.v0 - 1.0;
            let d = d.unwrap_or(config.source.d1);
            let mut results = Vec::new();
            for &p in profiles {
                results.push(oscillatory_decay_check(lambda, d, omega_list, p, *x, *t, options)?);
            }
            art.csv("oscillatory.csv", |w| {
                let mut w = csv::Writer::from_writer(w);
                w.write_record(["profile", "omega", "abs_I", "omega_times_abs_I"])?;
                for r in &results {
                    let name = serde_json::to_value(r.profile)?.as_str().unwrap_or_default().to_string();
                    for k in 0..r.omegas.len() {
                        w.write_record([
                            name.clone(),
                            format!("{:e}", r.omegas[k]),
                            format!("{:e}", r.magnitudes[k]),
                            format!("{:e}", r.scaled[k]),
                        ])?;
                    }
                }
                w.flush()?;
                Ok(())
            })?;
            art.json("oscillatory.json", &results)?;
            let checks = results
                .iter()
                .filter(|r| r.profile != crate::experiments::Profile::Zero)
                .map(|r| {
                    check(
                        &format!("decay_order_{}", r.profile.name()),
                        r.order.is_some_and(|o| o >= order_range.0 && o <= order_range.1),
                        format!("order {}, required [{}, {}]", opt(r.order), order_range.0, order_range.1),
                    )
                })
                .collect();
            Ok((serde_json::to_value(&results)?, checks))
        }
    }
}
