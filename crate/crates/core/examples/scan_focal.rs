//! Loop scans at the pole and a generic point of a peanut surface, and at an
//! umbilic of a triaxial ellipsoid.

use focal_lab::focal::{classify_point, extract_return_map, scan_loops, ExtractOptions, Thresholds};
use focal_lab::geoflow::StepPolicy;
use focal_lab::surfaces::{ChartPoint, Profile, SurfaceModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let peanut = SurfaceModel::revolution(Profile::peanut(0.3)?);
    let ell = SurfaceModel::ellipsoid(1.5, 1.2, 1.0)?;
    let cases = [
        ("peanut pole", peanut, ChartPoint::polar(0.0, 0.0)),
        ("peanut generic", peanut, ChartPoint::polar(1.1, 0.7)),
        ("ellipsoid umbilic", ell, ell.umbilic_points()?[0]),
    ];
    for (name, s, x) in cases {
        let scan = scan_loops(&s, x, 20.0, 64, 1e-4, StepPolicy::default())?;
        let th = Thresholds::default();
        let map = if scan.loop_fraction >= th.self_focal {
            Some(extract_return_map(&s, x, &ExtractOptions { n: 64, ..Default::default() })?)
        } else {
            None
        };
        let c = classify_point(&scan, map.as_ref(), &th);
        let first = scan.first_loop.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        println!("{name:18} loop fraction {:.3}  shortest loop {:.6}  {:?}", c.loop_fraction, first, c.verdict);
    }
    Ok(())
}
