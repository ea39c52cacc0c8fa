//! Approximation error between the full system and the PAS across `ω1`.
//!
//! Takes a minute or two in release mode.

use fhn_pas::experiments::{approximation_study, bump_initial, StudyParams};
use fhn_pas::model::solve_equilibrium;
use fhn_pas::rectangles::find_rectangle;
use fhn_pas::solver::{DtPolicy, Grid};
use fhn_pas::{Error, ModelParams, SourceParams};

fn main() -> fhn_pas::Result<()> {
    let model = ModelParams::new(0.5, 8.0, 6.0, 0.0)?;
    let eq = solve_equilibrium(6.0, 8.0, 1e-12)?;
    let source = SourceParams::new(0.004, 0.004, 1.0, 1.0, 1.0, 100.0, 1.0)?;
    let grid = Grid::new(40.0, 1001)?;
    let rect = find_rectangle(eq.v0, model.gamma, 0.008, 0.009)
        .ok_or_else(|| Error::Precondition("no rectangle".into()))?;
    let params = StudyParams {
        model,
        equilibrium: eq,
        source,
        grid,
        t_end: 5.0,
        dt_policy: DtPolicy::default(),
        initial: bump_initial(&grid, &rect, 0.5, 3.0),
        rectangle: Some(rect),
        window: 0.5,
        linear_error: true,
        pas_refinement: 4,
    };
    let res = approximation_study(&params, &[100.0, 200.0, 400.0])?;
    for p in &res.points {
        println!(
            "omega1 = {:5}: |E_v| = {:.4e}, |E_w| = {:.4e}, |F_v| omega1 = {:.4}",
            p.omega1, p.error_v, p.error_w, p.fv_ynorm_times_omega
        );
    }
    println!("fitted order {:?}, alpha = {:.4}", res.fitted_order, res.alpha);
    Ok(())
}
