//! Window masses along the quantized sequence 2π/ℓ (k + β/4) at the pole of
//! a peanut surface, with loop length and Maslov index from the flow.

use focal_lab::focal::{extract_return_map, ExtractOptions};
use focal_lab::geoflow::{maslov_index, StepPolicy};
use focal_lab::spectral::radial::RadialParams;
use focal_lab::spectral::{omega_bound_check, revolution_spectrum};
use focal_lab::surfaces::{ChartPoint, Profile, SurfaceModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let profile = Profile::peanut(0.3)?;
    let s = SurfaceModel::revolution(profile);
    let pole = ChartPoint::polar(0.0, 0.0);
    let map = extract_return_map(&s, pole, &ExtractOptions { n: 64, ..Default::default() })?;
    let beta = maslov_index(&s, pole, map.ell, 16, StepPolicy::default())? as u32;
    println!("ℓ = {:.10}, β = {beta}", map.ell);
    let t = revolution_spectrum(&profile, 40.0, None, RadialParams::default())?;
    let chk = omega_bound_check(&t, &pole, map.ell, beta, 0.2, 4..=12)?;
    for r in &chk.rows {
        println!("  k = {:2}  μ = {:8.4}  mass = {:.5}  mass/μ = {:.5}", r.k, r.mu, r.mass, r.scaled);
    }
    println!("min over k: {:.6}", chk.liminf);
    Ok(())
}
