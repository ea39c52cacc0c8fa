//! `|I(ω)|` of the damped oscillatory heat integral decays like `1/ω`.

use fhn_pas::experiments::{oscillatory_decay_check, OscillatoryOptions, Profile};

fn main() -> fhn_pas::Result<()> {
    let omegas = [50.0, 100.0, 200.0, 400.0, 800.0];
    for profile in [Profile::Constant, Profile::GaussianCos] {
        let d = oscillatory_decay_check(0.5, 1.0, &omegas, profile, 0.3, 2.0, &OscillatoryOptions::default())?;
        println!("{}: order {:?}", profile.name(), d.order);
        for (w, s) in d.omegas.iter().zip(&d.scaled) {
            println!("  omega = {w:5}: omega |I| = {s:.6}");
        }
    }
    Ok(())
}
