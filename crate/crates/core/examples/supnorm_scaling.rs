//! λ^(-1/2)-scaled sup norms of zonal eigenfunctions on the sphere and on
//! a peanut surface.

use focal_lab::spectral::radial::RadialParams;
use focal_lab::spectral::{revolution_spectrum, sphere_spectrum, sup_norm_scaling, Mesh, ModeKind};
use focal_lab::surfaces::{ChartPoint, Profile, SurfaceModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sphere = SurfaceModel::sphere(1.0)?;
    let st = sphere_spectrum(40.0)?;
    let poles = [ChartPoint::polar(0.0, 0.0), ChartPoint::polar(std::f64::consts::PI, 0.0)];
    let mesh = Mesh::focal(&sphere, 0.1, &poles, 40.0)?;
    let zonal = |_: usize, m: &focal_lab::spectral::EigenMode| {
        matches!(m.kind, ModeKind::Sphere { m: 0, .. } | ModeKind::Revolution { m: 0, .. })
    };
    println!("sphere zonal harmonics:");
    for r in sup_norm_scaling(&st, &mesh, zonal)?.iter().step_by(6) {
        println!("  λ = {:8.4}  λ^(-1/2) sup|e| = {:.5}", r.lambda, r.scaled);
    }
    let profile = Profile::peanut(0.3)?;
    let pt = revolution_spectrum(&profile, 40.0, None, RadialParams::default())?;
    let s = SurfaceModel::revolution(profile);
    let mesh = Mesh::focal(&s, 0.1, &[ChartPoint::polar(0.0, 0.0), ChartPoint::polar(profile.length(), 0.0)], 40.0)?;
    println!("peanut zonal modes:");
    for r in sup_norm_scaling(&pt, &mesh, zonal)?.iter().step_by(4) {
        println!("  λ = {:8.4}  λ^(-1/2) sup|e| = {:.5}", r.lambda, r.scaled);
    }
    Ok(())
}
