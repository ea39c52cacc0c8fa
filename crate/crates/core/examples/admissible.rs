//! Scans a few `(β, γ)` pairs for admissibility.

use fhn_pas::model::{check_admissible, default_delta_grid};

fn main() -> fhn_pas::Result<()> {
    let grid = default_delta_grid();
    for (beta, gamma) in [(6.0, 8.0), (0.5, 1.0), (20.0, 10.0), (5.0, 30.0)] {
        let a = check_admissible(beta, gamma, &grid)?;
        println!(
            "beta = {beta:5}, gamma = {gamma:5}: admissible = {}, witness = {:?}",
            a.admissible, a.witness
        );
    }
    Ok(())
}
