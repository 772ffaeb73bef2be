//! First-return map at an umbilic of a triaxial ellipsoid: loop length,
//! deviation from the identity and the range of the Jacobian.

use focal_lab::focal::{extract_return_map, ExtractOptions};
use focal_lab::surfaces::SurfaceModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = SurfaceModel::ellipsoid(1.5, 1.2, 1.0)?;
    let x = s.umbilic_points()?[0];
    let opts = ExtractOptions { n: 128, ..Default::default() };
    let m = extract_return_map(&s, x, &opts)?;
    let jmin = m.jacobian.iter().copied().fold(f64::INFINITY, f64::min);
    let jmax = m.jacobian.iter().copied().fold(0.0, f64::max);
    println!("loop length   {:.10}", m.ell);
    println!("sup |η - id|  {:.6}", m.sup_deviation());
    println!("J range       [{jmin:.6}, {jmax:.6}]");
    println!("FD check      {:.3e}", m.fd_max_rel_diff);
    for i in (0..m.n).step_by(16) {
        println!("  ω = {:.4}  η = {:.4}  J = {:.4}", m.omega[i], m.eta[i], m.jacobian[i]);
    }
    Ok(())
}
