//! Resting state of the reference cell and the bounds it must satisfy.

use fhn_pas::model::{default_delta_grid, equilibrium_report};

fn main() -> fhn_pas::Result<()> {
    let report = equilibrium_report(6.0, 8.0, 1e-12, &default_delta_grid())?;
    println!("v0 = {:.12}, w0 = {:.12}", report.v0, report.w0);
    println!(
        "bounds {} < v0 < {:?}: {}",
        report.lower_bound, report.upper_bound, report.bounds_satisfied
    );
    println!("Newton vs bisection: {:e}", report.newton_bisection_gap);
    Ok(())
}
