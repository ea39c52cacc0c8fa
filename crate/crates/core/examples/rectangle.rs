//! Builds a contracting rectangle and samples the averaged field on its faces.

use fhn_pas::model::solve_equilibrium;
use fhn_pas::rectangles::{empirical_delta_star, face_flux_report, find_rectangle, FaceSampling, VectorField};
use fhn_pas::source::sup_amplitude;
use fhn_pas::{ModelParams, SourceParams};

fn main() -> fhn_pas::Result<()> {
    let model = ModelParams::new(0.5, 8.0, 6.0, 0.0)?;
    let eq = solve_equilibrium(6.0, 8.0, 1e-12)?;
    let source = SourceParams::new(0.03, 0.02, 1.0, 1.0, 1.0, 100.0, 1.0)?;
    let delta = sup_amplitude(&source);

    println!("largest usable delta: {:.4}", empirical_delta_star(eq.v0, model.gamma, 0.5));
    let rect = find_rectangle(eq.v0, model.gamma, delta, 0.5)
        .ok_or_else(|| fhn_pas::Error::Precondition("no rectangle for this source".into()))?;
    println!("L = {:.4}, S = {:.4}", rect.l, rect.s);

    let sampling = FaceSampling {
        x_samples: 401,
        t_samples: 50,
        ..FaceSampling::default()
    };
    let flux = face_flux_report(VectorField::H, &rect, &model, &eq, &source, &sampling)?;
    println!(
        "max outward flux {:e} on {:?} at x = {:.2}, t = {:.2} ({} samples)",
        flux.margin, flux.face, flux.x, flux.t, flux.samples
    );
    Ok(())
}
