//! Picard iteration of the linear error system on top of a PAS run.

use fhn_pas::model::solve_equilibrium;
use fhn_pas::solver::{picard_linear_error, simulate, DtPolicy, FhnSystem, FieldState, Grid, PicardOptions, SystemKind};
use fhn_pas::{ModelParams, SourceParams};

fn main() -> fhn_pas::Result<()> {
    let model = ModelParams::new(0.5, 8.0, 6.0, 0.0)?;
    let eq = solve_equilibrium(6.0, 8.0, 1e-12)?;
    let source = SourceParams::new(0.02, 0.02, 1.0, 1.0, 0.5, 20.0, 1.0)?;
    let grid = Grid::new(20.0, 401)?;
    let t_end = 1.0;
    let dt = DtPolicy::default().dt(SystemKind::Full, &source);
    let sys = FhnSystem::new(SystemKind::Pas, model, eq, source, &grid);
    let init = FieldState::from_fn(0.0, &grid, |x| 0.01 * (-x * x / 9.0).exp(), |_| 0.0);
    let pas = simulate(&sys, &grid, init, t_end, dt / 4.0, 1)?;
    let (_, report) = picard_linear_error(&model, &eq, &source, &pas, t_end, &PicardOptions::new(dt, 8))?;
    for (k, d) in report.distances_v.iter().enumerate() {
        println!("iterate {:2}: |F_v^(k+1) - F_v^(k)| = {d:.3e}", k + 1);
    }
    println!("worst contraction ratio {:?}", report.max_ratio());
    Ok(())
}
