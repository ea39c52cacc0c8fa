//! Trajectory CSV dumps and solver manifests.

use std::io::Write;

use serde::Serialize;

use super::grid::{Grid, Truncation};
use super::state::Trajectory;
use super::system::SystemKind;
use crate::error::Result;

/// Writes `t,x,u1,u2` rows, sample-major.
pub fn write_trajectory_csv<W: Write>(trajectory: &Trajectory, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "x", "u1", "u2"])?;
    let xs = trajectory.grid.points();
    for s in &trajectory.states {
        for (i, x) in xs.iter().enumerate() {
            w.write_record([
                format!("{:e}", s.t),
                format!("{x:e}"),
                format!("{:e}", s.u1[i]),
                format!("{:e}", s.u2[i]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Solver diagnostics recorded next to a trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct SolverManifest {
    pub system: SystemKind,
    pub grid: Grid,
    pub dx: f64,
    pub dt: f64,
    pub steps: usize,
    pub samples: usize,
    pub t_end: f64,
    pub truncation: Truncation,
}
