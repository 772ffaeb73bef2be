//! Spectral window masses and spectral projector norms on the sphere and on
//! a peanut surface, at a pole and at a generic point. Frequencies seen
//! from the pole cluster near half-integers.

use focal_lab::spectral::radial::RadialParams;
use focal_lab::spectral::{local_weyl_constant, projector_norm, revolution_spectrum, window_mass, Mesh};
use focal_lab::surfaces::{ChartPoint, Profile, SurfaceModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let profile = Profile::peanut(0.3)?;
    let s = SurfaceModel::revolution(profile);
    let t = revolution_spectrum(&profile, 40.0, None, RadialParams::default())?;
    let pole = ChartPoint::polar(0.0, 0.0);
    let generic = ChartPoint::polar(1.1, 0.7);
    println!("local Weyl constant at the pole {:.4}", local_weyl_constant(&t, &pole)?);
    for lambda in [30.0, 30.5] {
        for delta in [0.4, 0.2, 0.1] {
            let a = window_mass(&t, &pole, lambda, delta)?;
            let b = window_mass(&t, &generic, lambda, delta)?;
            println!("λ = {lambda}, δ = {delta}: pole {a:.5e}  generic {b:.5e}");
        }
    }
    let mesh = Mesh::focal(&s, 0.1, &[pole, ChartPoint::polar(profile.length(), 0.0)], 30.0)?;
    let p = projector_norm(&t, 30.4, 0.2, &mesh)?;
    println!("one-sided [30.4, 30.6]: max over {} mesh points: {:.5e} at {:?}", mesh.len(), p.value, p.argmax);
    Ok(())
}
