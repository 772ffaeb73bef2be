//! Integrate one unit-speed geodesic on a triaxial ellipsoid and report
//! speed drift, the Joachimsthal invariant and the Jacobi field at the end.

use focal_lab::geoflow::{flow_recorded, DirectionFrame, StepPolicy};
use focal_lab::surfaces::{ChartPoint, SurfaceModel};

fn joachimsthal(axes2: [f64; 3], p: [f64; 3], v: [f64; 3]) -> f64 {
    let a: f64 = (0..3).map(|i| p[i] * p[i] / (axes2[i] * axes2[i])).sum();
    let b: f64 = (0..3).map(|i| v[i] * v[i] / axes2[i]).sum();
    a * b
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = SurfaceModel::ellipsoid(1.5, 1.2, 1.0)?;
    let x = s.ambient_point(1.1, 0.7)?;
    let policy = StepPolicy::default();
    let frame = DirectionFrame::new(&s, x, policy)?;
    let start = frame.phase_point(0.4);
    let r = flow_recorded(&s, &start, 10.0, policy)?;
    let axes2 = s.axes_squared().expect("ellipsoid");
    let traj = r.trajectory.unwrap_or_default();
    let inv: Vec<f64> = traj
        .iter()
        .filter_map(|t| match t.point.position {
            ChartPoint::Ambient { p } => Some(joachimsthal(axes2, p, t.point.xi)),
            _ => None,
        })
        .collect();
    let (lo, hi) = inv.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    println!("samples        {}", traj.len());
    println!("max speed drift {:.3e} (flagged: {})", r.drift, r.flagged);
    println!("Joachimsthal   spread {:.3e}", hi - lo);
    if let Some(last) = traj.last() {
        println!("J(10) = {:.6}, J'(10) = {:.6}", last.j, last.dj);
    }
    println!("end {:?}", r.end.position);
    Ok(())
}
