//! Eigenvalue tables for the flat torus, the round unit sphere and surfaces
//! of revolution, plus the pointwise spectral sums built on them.

pub mod functionals;
pub mod mesh;
pub mod radial;
pub mod store;

use crate::numerics::legendre::normalized_table;
use crate::surfaces::{ChartPoint, Profile, SurfaceModel};
use radial::{RadialMode, RadialParams, RadialProblem};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

pub use functionals::*;
pub use mesh::Mesh;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("window [{lo}, {hi}] exceeds the table's λ_max = {lambda_max}")]
    WindowExceedsTable { lo: f64, hi: f64, lambda_max: f64 },
    #[error("insufficient spectral range: tail bound {tail:e} vs main sum {main:e}")]
    InsufficientRange { tail: f64, main: f64 },
    #[error("radial solve failed at m = {0}")]
    RadialSolveFailed(u32),
    #[error("point {0:?} is not in a chart this table can evaluate")]
    UnsupportedPoint(ChartPoint),
    #[error("corrupted table: {0}")]
    Corrupted(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SpectralError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trig {
    Const,
    Cos,
    Sin,
}

impl Trig {
    fn apply(self, phase: f64) -> f64 {
        match self {
            Trig::Const => 1.0,
            Trig::Cos => phase.cos(),
            Trig::Sin => phase.sin(),
        }
    }
}

/// What identifies a mode and how to evaluate it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ModeKind {
    /// `cos/sin(2π(p x / L1 + q y / L2))`.
    Torus { p: i64, q: i64, trig: Trig },
    /// Real spherical harmonic; `m < 0` is the sine partner.
    Sphere { l: u32, m: i32 },
    /// `v_{m,k}(r) · cos/sin(m θ)`; `radial` indexes the table's radial modes.
    Revolution { m: u32, k: u32, trig: Trig, radial: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenMode {
    pub lambda: f64,
    pub kind: ModeKind,
    /// Constant factor applied to the unnormalized evaluation.
    pub norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Completeness {
    pub count: usize,
    pub weyl: f64,
    pub relative_deviation: f64,
    pub passed: bool,
}

/// Weyl count `Area λ²/(4π) + χ/6`.
pub fn weyl_count(area: f64, euler: f64, lambda: f64) -> f64 {
    area * lambda * lambda / (4.0 * PI) + euler / 6.0
}

impl Completeness {
    fn new(surface: &SurfaceModel, count: usize, lambda_max: f64, tol: f64) -> Self {
        let euler = match surface {
            SurfaceModel::FlatTorus { .. } => 0.0,
            _ => 2.0,
        };
        let weyl = weyl_count(surface.area(), euler, lambda_max);
        let relative_deviation = (count as f64 - weyl).abs() / weyl.max(1.0);
        Completeness {
            count,
            weyl,
            relative_deviation,
            passed: relative_deviation <= tol,
        }
    }
}

/// Completeness tolerance on the mode count relative to Weyl.
pub const COMPLETENESS_TOL: f64 = 0.05;
/// Largest frequency accepted by the exact solvers.
pub const EXACT_LAMBDA_LIMIT: f64 = 200.0;
/// Largest frequency accepted by the revolution solver.
pub const RADIAL_LAMBDA_LIMIT: f64 = 120.0;

#[derive(Debug, Clone)]
pub struct SpectrumTable {
    pub surface: SurfaceModel,
    pub lambda_max: f64,
    pub modes: Vec<EigenMode>,
    pub radial: Vec<RadialMode>,
    pub params: Option<RevolutionParams>,
    pub certificate: Completeness,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RevolutionParams {
    pub m_max: u32,
    pub radial: RadialParams,
}

fn check_lambda(lambda_max: f64, limit: f64) -> Result<()> {
    if !(lambda_max > 0.0 && lambda_max <= limit) {
        return Err(SpectralError::InvalidParameter(format!(
            "λ_max = {lambda_max} outside (0, {limit}]"
        )));
    }
    Ok(())
}

fn sort_modes(modes: &mut [EigenMode]) {
    modes.sort_by(|a, b| {
        a.lambda
            .partial_cmp(&b.lambda)
            .expect("finite")
            .then_with(|| key(&a.kind).cmp(&key(&b.kind)))
    });
}

fn key(k: &ModeKind) -> (i64, i64, Trig) {
    match *k {
        ModeKind::Torus { p, q, trig } => (p, q, trig),
        ModeKind::Sphere { l, m } => (l as i64, m as i64, Trig::Const),
        ModeKind::Revolution { m, k, trig, .. } => (m as i64, k as i64, trig),
    }
}

/// Exact spectrum of the flat torus `[0, L1) × [0, L2)`.
pub fn torus_spectrum(l1: f64, l2: f64, lambda_max: f64) -> Result<SpectrumTable> {
    check_lambda(lambda_max, EXACT_LAMBDA_LIMIT)?;
    let surface = SurfaceModel::torus(l1, l2).map_err(|e| SpectralError::InvalidParameter(e.to_string()))?;
    let area = l1 * l2;
    let pmax = (lambda_max * l1 / TAU).floor() as i64;
    let qmax = (lambda_max * l2 / TAU).floor() as i64;
    let mut modes = Vec::new();
    for p in 0..=pmax {
        for q in -qmax..=qmax {
            if p == 0 && q < 0 {
                continue;
            }
            let lambda = (TAU * p as f64 / l1).hypot(TAU * q as f64 / l2);
            if lambda > lambda_max {
                continue;
            }
            if p == 0 && q == 0 {
                modes.push(EigenMode {
                    lambda,
                    kind: ModeKind::Torus { p, q, trig: Trig::Const },
                    norm: 1.0 / area.sqrt(),
                });
                continue;
            }
            for trig in [Trig::Cos, Trig::Sin] {
                modes.push(EigenMode {
                    lambda,
                    kind: ModeKind::Torus { p, q, trig },
                    norm: (2.0 / area).sqrt(),
                });
            }
        }
    }
    sort_modes(&mut modes);
    let certificate = Completeness::new(&surface, modes.len(), lambda_max, COMPLETENESS_TOL);
    Ok(SpectrumTable {
        surface,
        lambda_max,
        modes,
        radial: Vec::new(),
        params: None,
        certificate,
    })
}

/// Exact spectrum of the unit sphere, `λ_l = √(l(l+1))`.
pub fn sphere_spectrum(lambda_max: f64) -> Result<SpectrumTable> {
    check_lambda(lambda_max, EXACT_LAMBDA_LIMIT)?;
    let surface = SurfaceModel::sphere(1.0).expect("unit sphere");
    let mut modes = Vec::new();
    let mut l = 0u32;
    loop {
        let lambda = ((l * (l + 1)) as f64).sqrt();
        if lambda > lambda_max {
            break;
        }
        for m in -(l as i32)..=(l as i32) {
            modes.push(EigenMode {
                lambda,
                kind: ModeKind::Sphere { l, m },
                norm: if m == 0 { 1.0 } else { 2f64.sqrt() },
            });
        }
        l += 1;
    }
    sort_modes(&mut modes);
    let certificate = Completeness::new(&surface, modes.len(), lambda_max, COMPLETENESS_TOL);
    Ok(SpectrumTable {
        surface,
        lambda_max,
        modes,
        radial: Vec::new(),
        params: None,
        certificate,
    })
}

/// Separated spectrum of the surface of revolution with the given profile.
///
/// `m_max` defaults to `⌈3 λ_max⌉`; angular modes with no eigenvalue below
/// `λ_max` are skipped.
pub fn revolution_spectrum(profile: &Profile, lambda_max: f64, m_max: Option<u32>, radial: RadialParams) -> Result<SpectrumTable> {
    check_lambda(lambda_max, RADIAL_LAMBDA_LIMIT)?;
    let m_max = m_max.unwrap_or((3.0 * lambda_max).ceil() as u32);
    if (m_max as f64) < 3.0 * lambda_max {
        return Err(SpectralError::InvalidParameter(format!(
            "m_max = {m_max} below 3 λ_max"
        )));
    }
    let solved: Vec<(u32, Vec<RadialMode>)> = (0..=m_max)
        .into_par_iter()
        .map(|m| {
            let prob = RadialProblem::new(profile, m, radial);
            let freqs = prob.frequencies_below(lambda_max);
            let modes = freqs.iter().enumerate().map(|(k, l)| prob.mode(k as u32, *l)).collect();
            (m, modes)
        })
        .collect();
    build_revolution_table(profile, lambda_max, RevolutionParams { m_max, radial }, solved)
}

fn build_revolution_table(
    profile: &Profile,
    lambda_max: f64,
    params: RevolutionParams,
    solved: Vec<(u32, Vec<RadialMode>)>,
) -> Result<SpectrumTable> {
    let surface = SurfaceModel::revolution(*profile);
    let mut radial_modes = Vec::new();
    let mut modes = Vec::new();
    for (m, list) in solved {
        for rm in list {
            if !rm.lambda.is_finite() || rm.values.iter().any(|v| !v.is_finite()) {
                return Err(SpectralError::RadialSolveFailed(m));
            }
            let idx = radial_modes.len() as u32;
            let trigs: &[Trig] = if m == 0 { &[Trig::Const] } else { &[Trig::Cos, Trig::Sin] };
            for &trig in trigs {
                modes.push(EigenMode {
                    lambda: rm.lambda,
                    kind: ModeKind::Revolution { m, k: rm.k, trig, radial: idx },
                    norm: if m == 0 { 1.0 / TAU.sqrt() } else { 1.0 / PI.sqrt() },
                });
            }
            radial_modes.push(rm);
        }
    }
    sort_modes(&mut modes);
    let certificate = Completeness::new(&surface, modes.len(), lambda_max, COMPLETENESS_TOL);
    Ok(SpectrumTable {
        surface,
        lambda_max,
        modes,
        radial: radial_modes,
        params: Some(params),
        certificate,
    })
}

/// Colatitude and longitude of a point on the unit sphere.
fn sphere_angles(y: &ChartPoint) -> Option<(f64, f64)> {
    match *y {
        ChartPoint::Ambient { p } => {
            let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            if n == 0.0 {
                return None;
            }
            Some(((p[2] / n).clamp(-1.0, 1.0).acos(), p[1].atan2(p[0])))
        }
        ChartPoint::Polar { r, theta } => Some((r, theta)),
        _ => None,
    }
}

impl SpectrumTable {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn surface_hash(&self) -> String {
        crate::content_hash(&self.surface)
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.lambda).collect()
    }

    /// Number of modes with `λ_j ≤ lambda`.
    pub fn count_below(&self, lambda: f64) -> usize {
        self.modes.partition_point(|m| m.lambda <= lambda)
    }

    /// Index range of the modes with `lo ≤ λ_j ≤ hi`.
    pub fn range(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        self.modes.partition_point(|m| m.lambda < lo)..self.modes.partition_point(|m| m.lambda <= hi)
    }

    /// `e_j(y)` for the modes in `range`, in table order.
    pub fn values_in(&self, y: &ChartPoint, range: std::ops::Range<usize>) -> Result<Vec<f64>> {
        let modes = &self.modes[range];
        match (&self.surface, y) {
            (SurfaceModel::FlatTorus { l1, l2 }, ChartPoint::Planar { x, y }) => Ok(modes
                .iter()
                .map(|m| match m.kind {
                    ModeKind::Torus { p, q, trig } => {
                        m.norm * trig.apply(TAU * (p as f64 * x / l1 + q as f64 * y / l2))
                    }
                    _ => unreachable!("torus table"),
                })
                .collect()),
            (SurfaceModel::RoundSphere { .. }, _) => {
                let (theta, phi) = sphere_angles(y).ok_or(SpectralError::UnsupportedPoint(*y))?;
                let lmax = modes
                    .iter()
                    .map(|m| match m.kind {
                        ModeKind::Sphere { l, .. } => l as usize,
                        _ => 0,
                    })
                    .max()
                    .unwrap_or(0);
                let tab = normalized_table(lmax, theta.cos(), theta.sin());
                Ok(modes
                    .iter()
                    .map(|md| match md.kind {
                        ModeKind::Sphere { l, m } => {
                            let base = tab[l as usize][m.unsigned_abs() as usize];
                            let ang = match m.cmp(&0) {
                                std::cmp::Ordering::Equal => 1.0,
                                std::cmp::Ordering::Greater => (m as f64 * phi).cos(),
                                std::cmp::Ordering::Less => (-m as f64 * phi).sin(),
                            };
                            md.norm * base * ang
                        }
                        _ => unreachable!("sphere table"),
                    })
                    .collect())
            }
            (SurfaceModel::Revolution { .. }, ChartPoint::Polar { r, theta }) => {
                let mut cache: Vec<Option<f64>> = vec![None; self.radial.len()];
                Ok(modes
                    .iter()
                    .map(|md| match md.kind {
                        ModeKind::Revolution { m, trig, radial, .. } => {
                            let v = *cache[radial as usize].get_or_insert_with(|| self.radial[radial as usize].eval(*r));
                            md.norm * v * trig.apply(m as f64 * theta)
                        }
                        _ => unreachable!("revolution table"),
                    })
                    .collect())
            }
            _ => Err(SpectralError::UnsupportedPoint(*y)),
        }
    }

    /// `e_j(y)` for every mode.
    pub fn values_at(&self, y: &ChartPoint) -> Result<Vec<f64>> {
        self.values_in(y, 0..self.modes.len())
    }

    /// Single-mode evaluation.
    pub fn eval(&self, j: usize, y: &ChartPoint) -> Result<f64> {
        Ok(self.values_in(y, j..j + 1)?[0])
    }

    /// Discrete radial residual of a revolution mode.
    pub fn radial_residual(&self, radial: usize) -> Option<f64> {
        let (SurfaceModel::Revolution { profile }, Some(params)) = (&self.surface, &self.params) else {
            return None;
        };
        let rm = self.radial.get(radial)?;
        Some(RadialProblem::new(profile, rm.m, params.radial).residual(rm))
    }
}
