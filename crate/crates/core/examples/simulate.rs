//! Integrates the full cable equation and the partially averaged system side by side.

use fhn_pas::model::solve_equilibrium;
use fhn_pas::solver::{simulate, DtPolicy, FhnSystem, FieldState, Grid, SystemKind};
use fhn_pas::source::{eval_profiles, j0};
use fhn_pas::{ModelParams, SourceParams};

fn main() -> fhn_pas::Result<()> {
    let model = ModelParams::new(0.5, 8.0, 6.0, 0.0)?;
    let eq = solve_equilibrium(6.0, 8.0, 1e-12)?;
    let source = SourceParams::new(0.05, 0.05, 1.0, 1.0, 1.0, 50.0, 1.0)?;
    let grid = Grid::new(Grid::default_half_extent(&source), 2001)?;
    let t_end = 2.0;
    let dt = DtPolicy::default().dt(SystemKind::Full, &source);

    let pas_sys = FhnSystem::new(SystemKind::Pas, model, eq, source, &grid);
    let pas = simulate(&pas_sys, &grid, FieldState::zeros(0.0, grid.n_points), t_end, dt, 1)?;
    let rest = FieldState::from_fn(0.0, &grid, |_| eq.v0, |_| eq.w0);
    let full_sys = FhnSystem::new(SystemKind::Full, model, eq, source, &grid);
    let full = simulate(&full_sys, &grid, rest, t_end, dt, 1)?;

    let i = grid.index_of(source.x0).unwrap_or(grid.n_points / 2);
    let f = eval_profiles(&source, grid.x(i));
    println!("{:>8} {:>14} {:>14} {:>14}", "t", "v", "V + J0", "gap");
    for (k, (a, b)) in full.states.iter().zip(&pas.states).enumerate() {
        if k % (full.len() / 10).max(1) != 0 {
            continue;
        }
        let v = a.u1[i] - eq.v0;
        let approx = b.u1[i] + j0(&source, &f, a.t);
        println!("{:8.3} {:14.6e} {:14.6e} {:14.6e}", a.t, v, approx, v - approx);
    }
    Ok(())
}
