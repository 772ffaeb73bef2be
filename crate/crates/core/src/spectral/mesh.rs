//! Evaluation meshes: product quadratures with weights, coarse coverings,
//! and local refinement around focal candidates.

use super::{Result, SpectralError};
use crate::surfaces::{ChartPoint, SurfaceModel};
use std::f64::consts::{PI, TAU};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Mesh {
    pub points: Vec<ChartPoint>,
    /// Quadrature weights; empty for pure search meshes.
    pub weights: Vec<f64>,
}

type RadialProfile<'a> = Box<dyn Fn(f64) -> f64 + 'a>;

/// Radial profile and radial length of a table surface.
fn polar_profile(surface: &SurfaceModel) -> Option<(RadialProfile<'_>, f64)> {
    match surface {
        SurfaceModel::RoundSphere { radius } if *radius == 1.0 => Some((Box::new(f64::sin), PI)),
        SurfaceModel::Revolution { profile } => Some((Box::new(move |r| profile.f(r)), profile.length())),
        _ => None,
    }
}

fn unsupported(surface: &SurfaceModel) -> SpectralError {
    SpectralError::InvalidParameter(format!("no mesh for {surface:?}"))
}

impl Mesh {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Midpoint product rule with `n1 × n2` cells; polar surfaces use
    /// `(r, θ)` with the area element `f(r) dr dθ`.
    pub fn quadrature(surface: &SurfaceModel, n1: usize, n2: usize) -> Result<Mesh> {
        if n1 == 0 || n2 == 0 {
            return Err(SpectralError::InvalidParameter("empty quadrature".into()));
        }
        let mut mesh = Mesh::default();
        if let SurfaceModel::FlatTorus { l1, l2 } = *surface {
            let (h1, h2) = (l1 / n1 as f64, l2 / n2 as f64);
            for i in 0..n1 {
                for j in 0..n2 {
                    mesh.points.push(ChartPoint::planar((i as f64 + 0.5) * h1, (j as f64 + 0.5) * h2));
                    mesh.weights.push(h1 * h2);
                }
            }
            return Ok(mesh);
        }
        let (f, len) = polar_profile(surface).ok_or_else(|| unsupported(surface))?;
        let (hr, ht) = (len / n1 as f64, TAU / n2 as f64);
        for i in 0..n1 {
            let r = (i as f64 + 0.5) * hr;
            let w = f(r) * hr * ht;
            for j in 0..n2 {
                mesh.points.push(ChartPoint::polar(r, j as f64 * ht));
                mesh.weights.push(w);
            }
        }
        Ok(mesh)
    }

    /// Search mesh with spacing about `h` in both directions, poles included.
    pub fn covering(surface: &SurfaceModel, h: f64) -> Result<Mesh> {
        if !(h > 0.0) {
            return Err(SpectralError::InvalidParameter(format!("spacing {h} must be positive")));
        }
        if let SurfaceModel::FlatTorus { l1, l2 } = *surface {
            let n1 = (l1 / h).ceil() as usize;
            let n2 = (l2 / h).ceil() as usize;
            let mut mesh = Mesh::default();
            for i in 0..n1 {
                for j in 0..n2 {
                    mesh.points.push(ChartPoint::planar(i as f64 * l1 / n1 as f64, j as f64 * l2 / n2 as f64));
                }
            }
            return Ok(mesh);
        }
        let (f, len) = polar_profile(surface).ok_or_else(|| unsupported(surface))?;
        let nr = (len / h).ceil() as usize;
        let mut mesh = Mesh::default();
        for i in 0..=nr {
            let r = i as f64 * len / nr as f64;
            let nt = ((TAU * f(r)) / h).ceil().max(1.0) as usize;
            for j in 0..nt {
                mesh.points.push(ChartPoint::polar(r, j as f64 * TAU / nt as f64));
            }
        }
        Ok(mesh)
    }

    /// Adds points at spacing `h` within distance about `radius` of `center`.
    pub fn refine_around(&mut self, surface: &SurfaceModel, center: &ChartPoint, radius: f64, h: f64) -> Result<()> {
        if !(radius > 0.0 && h > 0.0) {
            return Err(SpectralError::InvalidParameter("refinement radius and spacing must be positive".into()));
        }
        self.weights.clear();
        let steps = (radius / h).ceil() as i64;
        match (surface, *center) {
            (SurfaceModel::FlatTorus { .. }, ChartPoint::Planar { x, y }) => {
                for i in -steps..=steps {
                    for j in -steps..=steps {
                        self.points.push(ChartPoint::planar(x + i as f64 * h, y + j as f64 * h));
                    }
                }
                Ok(())
            }
            _ => {
                let (f, len) = polar_profile(surface).ok_or_else(|| unsupported(surface))?;
                let (r0, t0) = match *center {
                    ChartPoint::Polar { r, theta } => (r, theta),
                    ChartPoint::Ambient { p } => {
                        let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                        ((p[2] / n).clamp(-1.0, 1.0).acos(), p[1].atan2(p[0]))
                    }
                    _ => return Err(SpectralError::UnsupportedPoint(*center)),
                };
                if r0 < radius || len - r0 < radius {
                    let north = r0 < radius;
                    for i in 0..=steps {
                        let rho = i as f64 * h;
                        let r = if north { rho } else { len - rho };
                        let nt = ((TAU * f(r)) / h).ceil().max(1.0) as usize;
                        for j in 0..nt {
                            self.points.push(ChartPoint::polar(r, j as f64 * TAU / nt as f64));
                        }
                    }
                } else {
                    let dt = h / f(r0);
                    for i in -steps..=steps {
                        let r = r0 + i as f64 * h;
                        for j in -steps..=steps {
                            self.points.push(ChartPoint::polar(r, t0 + j as f64 * dt));
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// Coarse covering plus refinement of radius `5/λ` at spacing `1/(4λ)`
    /// around every candidate.
    pub fn focal(surface: &SurfaceModel, coarse: f64, candidates: &[ChartPoint], lambda: f64) -> Result<Mesh> {
        let mut mesh = Mesh::covering(surface, coarse)?;
        for c in candidates {
            mesh.refine_around(surface, c, 5.0 / lambda, 0.25 / lambda)?;
        }
        Ok(mesh)
    }

    /// `Σ w_i g_i` over a quadrature mesh.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        if self.weights.len() != self.points.len() || values.len() != self.points.len() {
            return Err(SpectralError::InvalidParameter("mesh has no quadrature weights for these values".into()));
        }
        Ok(self.weights.iter().zip(values).map(|(w, v)| w * v).sum())
    }
}
