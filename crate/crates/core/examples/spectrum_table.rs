//! Laplace eigenvalue tables: flat torus, round sphere and a peanut surface
//! of revolution, with Weyl completeness certificates and a save/load cycle.

use focal_lab::spectral::radial::RadialParams;
use focal_lab::spectral::{revolution_spectrum, sphere_spectrum, torus_spectrum, SpectrumTable};
use focal_lab::surfaces::Profile;

fn show(name: &str, t: &SpectrumTable) {
    let c = &t.certificate;
    println!(
        "{name:8} λ ≤ {:5}: {:6} modes, Weyl {:9.1}, deviation {:+.3}%",
        t.lambda_max,
        c.count,
        c.weyl,
        100.0 * c.relative_deviation
    );
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    show("torus", &torus_spectrum(1.0, 1.3, 60.0)?);
    show("sphere", &sphere_spectrum(60.0)?);
    let peanut = revolution_spectrum(&Profile::peanut(0.3)?, 30.0, None, RadialParams::default())?;
    show("peanut", &peanut);
    println!("lowest peanut frequencies: {:?}", &peanut.frequencies()[..8]);
    let dir = std::env::temp_dir().join("focal-lab-example");
    let (json, csv) = peanut.save(&dir, "peanut")?;
    let back = SpectrumTable::load(&json, &csv)?;
    println!("reload identical: {}", back.modes == peanut.modes && back.radial == peanut.radial);
    Ok(())
}
