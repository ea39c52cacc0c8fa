//! Averaging residual of the fast terms halves as `ω1` doubles.

use fhn_pas::experiments::{residual_amplitude, DEFAULT_QUAD_POINTS};
use fhn_pas::model::solve_equilibrium;
use fhn_pas::{ModelParams, SourceParams};

fn main() -> fhn_pas::Result<()> {
    let model = ModelParams::new(0.5, 8.0, 6.0, 0.0)?;
    let eq = solve_equilibrium(6.0, 8.0, 1e-12)?;
    let base = SourceParams::new(0.3, 0.2, 1.0, 1.5, 0.5, 100.0, 1.0)?;
    let (v, x, t) = (0.05, 0.3, 1.0);
    let mut prev = None;
    for omega1 in [100.0, 200.0, 400.0, 800.0] {
        let r = residual_amplitude(&model, &eq, &base.with_omega1(omega1), v, 0.0, x, t, DEFAULT_QUAD_POINTS);
        match prev {
            Some(p) => println!("omega1 = {omega1:5}: residual {:.4e}, ratio {:.4}", r.residual1, r.residual1 / p),
            None => println!("omega1 = {omega1:5}: residual {:.4e}", r.residual1),
        }
        prev = Some(r.residual1);
    }
    Ok(())
}
