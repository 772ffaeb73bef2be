//! Smoothed spectral quasimodes centred at the pole and at a generic point
//! of a peanut surface: norms, residuals and peak heights, plus a synthesis CSV.

use focal_lab::quasimode::{coherent_state, l2_and_residual, make_rho, peak_value, write_synthesis_csv};
use focal_lab::spectral::radial::RadialParams;
use focal_lab::spectral::{revolution_spectrum, Mesh};
use focal_lab::surfaces::{ChartPoint, Profile, SurfaceModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let profile = Profile::peanut(0.3)?;
    let t = revolution_spectrum(&profile, 50.0, None, RadialParams::default())?;
    let rho = make_rho();
    println!("window: δ_ρ = {:.6}, ρ̂(0) = {:.6}", rho.delta_rho, rho.rho_hat(0.0));
    let pole = ChartPoint::polar(0.0, 0.0);
    let generic = ChartPoint::polar(1.1, 0.7);
    for tt in [2.0, 4.0, 8.0] {
        for (name, x) in [("pole", pole), ("generic", generic)] {
            let st = coherent_state(&t, &rho, &x, 30.5, tt)?;
            let nr = l2_and_residual(&st);
            let pk = peak_value(&st);
            println!(
                "T = {tt:4}  {name:8} ‖ψ‖ = {:.5}  ‖(Δ+λ²)ψ‖ = {:.4}  ψ(x) = {:.5}",
                nr.l2_norm, nr.residual, pk.value
            );
        }
    }
    let st = coherent_state(&t, &rho, &pole, 30.5, 4.0)?;
    let mesh = Mesh::covering(&SurfaceModel::revolution(profile), 0.05)?;
    let values = st.synthesize(&t, &mesh)?;
    let path = std::env::temp_dir().join("coherent_state.csv");
    write_synthesis_csv(&mesh, &values, std::fs::File::create(&path)?)?;
    println!("wrote {} samples to {}", values.len(), path.display());
    Ok(())
}
