//! Unit-speed geodesic flow, Jacobi fields along it, and conjugate point counts.
//!
//! The integrator works on an augmented state of ten reals:
//!
//! | slots | torus | sphere / ellipsoid | revolution |
//! |-------|-------|--------------------|------------|
//! | 0..3  | `(x, y, 0)` | ambient position | pole chart `(w1, w2, ±1)` |
//! | 3..6  | `(vx, vy, 0)` | ambient unit velocity | chart covector `(p1, p2, 0)` |
//! | 6..10 | `y1, y1', y2, y2'` | same | same |
//!
//! The Jacobi pair solves `y'' + K y = 0` with `(y1, y1') = (1, 0)` and
//! `(y2, y2') = (0, 1)` at the start. Revolution surfaces are integrated in
//! Cartesian charts `w = s (cos θ, sin θ)` centred at the north (`+1`) or
//! south (`-1`) pole, with `s` the distance to that pole.

use crate::numerics::rk::dopri5_step;
use crate::numerics::roots::{bisect, golden_min};
use crate::surfaces::{tangent_basis, ChartPoint, Profile, SurfaceError, SurfaceModel};
use serde::{Deserialize, Serialize};
use std::io::Write;
use thiserror::Error;

pub type FlowState = [f64; 10];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("integration failure at t = {t}: {location}")]
    IntegrationFailure { t: f64, location: String },
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("invalid start: {0}")]
    InvalidStart(String),
    #[error("ambiguous zero of the Jacobi field near t = {t}; integrate with a finer step")]
    AmbiguousZero { t: f64 },
    #[error("conjugate count depends on direction: {0:?}")]
    DirectionDependent(Vec<(f64, usize)>),
}

pub type Result<T> = std::result::Result<T, FlowError>;

/// Fixed-step policy: step length in arc length and the per-step unit-norm
/// drift above which a result is flagged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepPolicy {
    pub h: f64,
    pub drift_tol: f64,
}

impl Default for StepPolicy {
    fn default() -> Self {
        StepPolicy {
            h: 1e-3,
            drift_tol: 1e-7,
        }
    }
}

impl StepPolicy {
    pub fn with_step(h: f64) -> Self {
        StepPolicy {
            h,
            ..Default::default()
        }
    }
}

/// A point of the unit cosphere bundle.
///
/// `xi` is `(ξx, ξy, 0)` on the torus, the ambient unit tangent vector on
/// the sphere and ellipsoid, and the polar covector `(ξ_r, ξ_θ, 0)` on a
/// surface of revolution. At a pole the polar form uses `ξ_θ = 0` and the
/// meridian angle `θ` carries the direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub position: ChartPoint,
    pub xi: [f64; 3],
}

impl PhasePoint {
    pub fn new(position: ChartPoint, xi: [f64; 3]) -> Self {
        PhasePoint { position, xi }
    }

    /// Same base point, opposite covector.
    pub fn reversed(&self) -> Self {
        PhasePoint {
            position: self.position,
            xi: [-self.xi[0], -self.xi[1], -self.xi[2]],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub point: PhasePoint,
    pub j: f64,
    pub dj: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    pub end: PhasePoint,
    pub trajectory: Option<Vec<TrajectorySample>>,
    /// Largest per-step deviation of `|ξ|_g` from 1 before renormalization.
    pub drift: f64,
    pub flagged: bool,
}

/// The geodesic vector field of a surface together with its chart logic.
#[derive(Debug, Clone, Copy)]
pub struct GeodesicSystem {
    surface: SurfaceModel,
    policy: StepPolicy,
}

#[inline]
fn dot3(a: &[f64], b: &[f64]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl GeodesicSystem {
    pub fn new(surface: SurfaceModel, policy: StepPolicy) -> Self {
        GeodesicSystem { surface, policy }
    }

    pub fn surface(&self) -> &SurfaceModel {
        &self.surface
    }

    pub fn policy(&self) -> StepPolicy {
        self.policy
    }

    fn profile(&self) -> Option<&Profile> {
        match &self.surface {
            SurfaceModel::Revolution { profile } => Some(profile),
            _ => None,
        }
    }

    /// Right-hand side of the augmented system.
    #[inline]
    pub fn rhs(&self, s: &FlowState) -> FlowState {
        let mut out = [0.0; 10];
        let k = match self.surface {
            SurfaceModel::FlatTorus { .. } => {
                out[0] = s[3];
                out[1] = s[4];
                0.0
            }
            SurfaceModel::RoundSphere { .. } | SurfaceModel::TriaxialEllipsoid { .. } => {
                let a = self.surface.axes_squared().expect("ambient");
                let vv = s[3] * s[3] / a[0] + s[4] * s[4] / a[1] + s[5] * s[5] / a[2];
                let xx = s[0] * s[0] / (a[0] * a[0]) + s[1] * s[1] / (a[1] * a[1]) + s[2] * s[2] / (a[2] * a[2]);
                let lam = vv / xx;
                for i in 0..3 {
                    out[i] = s[3 + i];
                    out[3 + i] = -lam * s[i] / a[i];
                }
                1.0 / (a[0] * a[1] * a[2] * xx * xx)
            }
            SurfaceModel::Revolution { profile } => {
                let (w1, w2, p1, p2) = (s[0], s[1], s[3], s[4]);
                let rho = w1 * w1 + w2 * w2;
                let (a, b, da, db) = profile.pole_chart_coefficients(rho);
                let wp = w1 * p1 + w2 * p2;
                let pp = p1 * p1 + p2 * p2;
                out[0] = a * p1 - b * wp * w1;
                out[1] = a * p2 - b * wp * w2;
                let radial = da * pp - db * wp * wp;
                out[3] = -(w1 * radial - b * wp * p1);
                out[4] = -(w2 * radial - b * wp * p2);
                profile.curvature(rho.sqrt())
            }
        };
        out[6] = s[7];
        out[7] = -k * s[6];
        out[8] = s[9];
        out[9] = -k * s[8];
        out
    }

    /// `|ξ|_g` at a state.
    pub fn speed(&self, s: &FlowState) -> f64 {
        match self.surface {
            SurfaceModel::Revolution { profile } => {
                let rho = s[0] * s[0] + s[1] * s[1];
                let (a, b, _, _) = profile.pole_chart_coefficients(rho);
                let wp = s[0] * s[3] + s[1] * s[4];
                (a * (s[3] * s[3] + s[4] * s[4]) - b * wp * wp).sqrt()
            }
            _ => dot3(&s[3..6], &s[3..6]).sqrt(),
        }
    }

    /// Restores the cosphere constraint (and the surface equation for
    /// ambient surfaces). Returns the speed deviation that was removed.
    pub fn renormalize(&self, s: &mut FlowState) -> f64 {
        if let Some(a) = self.surface.axes_squared() {
            let scale = (s[0] * s[0] / a[0] + s[1] * s[1] / a[1] + s[2] * s[2] / a[2]).sqrt();
            for v in s.iter_mut().take(3) {
                *v /= scale;
            }
            let n = self.surface.normal(&[s[0], s[1], s[2]]).expect("ambient");
            let vn = dot3(&s[3..6], &n);
            for i in 0..3 {
                s[3 + i] -= vn * n[i];
            }
        }
        let speed = self.speed(s);
        for v in s.iter_mut().skip(3).take(3) {
            *v /= speed;
        }
        (speed - 1.0).abs()
    }

    /// Moves a revolution state to the other pole chart when it strays more
    /// than `0.6 L` from its chart centre.
    fn maybe_switch_chart(&self, s: &mut FlowState) {
        if let Some(profile) = self.profile() {
            let l = profile.length();
            let rho = (s[0] * s[0] + s[1] * s[1]).sqrt();
            if rho > 0.6 * l {
                *s = switch_chart(s, l);
            }
        }
    }

    /// One renormalized step of signed length `h`.
    #[inline]
    pub fn step(&self, s: &FlowState, h: f64) -> (FlowState, f64) {
        let mut next = dopri5_step(&|y: &FlowState| self.rhs(y), s, h);
        let drift = self.renormalize(&mut next);
        self.maybe_switch_chart(&mut next);
        (next, drift)
    }

    fn check(&self, s: &FlowState, t: f64) -> Result<()> {
        if s.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(FlowError::IntegrationFailure {
                t,
                location: format!("non-finite state {:?}", &s[..6]),
            })
        }
    }

    /// Augmented state for a phase point, with the Jacobi pair initialized.
    pub fn initial_state(&self, p: &PhasePoint) -> Result<FlowState> {
        self.surface.validate(&p.position)?;
        let mut s = [0.0; 10];
        match (self.surface, p.position) {
            (SurfaceModel::FlatTorus { .. }, ChartPoint::Planar { x, y }) => {
                s[..6].copy_from_slice(&[x, y, 0.0, p.xi[0], p.xi[1], 0.0]);
            }
            (_, ChartPoint::Ambient { p: x }) => {
                let n = self.surface.normal(&x)?;
                if dot3(&p.xi, &n).abs() > 1e-9 {
                    return Err(FlowError::InvalidStart("velocity not tangent".into()));
                }
                s[..3].copy_from_slice(&x);
                s[3..6].copy_from_slice(&p.xi);
            }
            (SurfaceModel::Revolution { profile }, ChartPoint::Polar { r, theta }) => {
                let l = profile.length();
                let north = r <= 0.5 * l;
                let rho = if north { r } else { l - r };
                let (sn, cs) = theta.sin_cos();
                let p_rho = if north { p.xi[0] } else { -p.xi[0] };
                let (p1, p2) = if rho > 0.0 {
                    let ang = p.xi[1] / rho;
                    (p_rho * cs - ang * sn, p_rho * sn + ang * cs)
                } else {
                    if p.xi[1] != 0.0 {
                        return Err(FlowError::InvalidStart("angular covector at a pole".into()));
                    }
                    (p_rho * cs, p_rho * sn)
                };
                let chart = if north { 1.0 } else { -1.0 };
                s[..6].copy_from_slice(&[rho * cs, rho * sn, chart, p1, p2, 0.0]);
            }
            _ => unreachable!("validated"),
        }
        if (self.speed(&s) - 1.0).abs() > 1e-9 {
            return Err(FlowError::InvalidStart(format!(
                "|ξ|_g = {} is not 1",
                self.speed(&s)
            )));
        }
        s[6] = 1.0;
        s[9] = 1.0;
        Ok(s)
    }

    /// Phase point represented by a state.
    pub fn phase_point(&self, s: &FlowState) -> PhasePoint {
        match self.surface {
            SurfaceModel::FlatTorus { l1, l2 } => PhasePoint::new(
                ChartPoint::planar(s[0].rem_euclid(l1), s[1].rem_euclid(l2)),
                [s[3], s[4], 0.0],
            ),
            SurfaceModel::RoundSphere { .. } | SurfaceModel::TriaxialEllipsoid { .. } => {
                PhasePoint::new(ChartPoint::ambient([s[0], s[1], s[2]]), [s[3], s[4], s[5]])
            }
            SurfaceModel::Revolution { profile } => {
                let l = profile.length();
                let north = s[2] > 0.0;
                let rho = s[0].hypot(s[1]);
                let (theta, p_rho, p_theta) = if rho > 0.0 {
                    let theta = s[1].atan2(s[0]);
                    let p_rho = (s[0] * s[3] + s[1] * s[4]) / rho;
                    let p_theta = -s[1] * s[3] + s[0] * s[4];
                    (theta, p_rho, p_theta)
                } else {
                    (s[4].atan2(s[3]), s[3].hypot(s[4]), 0.0)
                };
                let theta = theta.rem_euclid(std::f64::consts::TAU);
                let (r, xi_r) = if north { (rho, p_rho) } else { (l - rho, -p_rho) };
                PhasePoint::new(ChartPoint::polar(r.clamp(0.0, l), theta), [xi_r, p_theta, 0.0])
            }
        }
    }

    /// Integrates from `s` for signed time `t`, calling `visit(t_k, state)`
    /// after every step.
    pub fn integrate<V: FnMut(f64, &FlowState)>(&self, s: &FlowState, t: f64, mut visit: V) -> Result<(FlowState, f64)> {
        let n = ((t.abs() / self.policy.h).ceil() as usize).max(1);
        let h = t / n as f64;
        let mut state = *s;
        let mut drift: f64 = 0.0;
        for k in 1..=n {
            let (next, d) = self.step(&state, h);
            let tk = h * k as f64;
            self.check(&next, tk)?;
            drift = drift.max(d);
            state = next;
            visit(tk, &state);
        }
        Ok((state, drift))
    }
}

/// Re-expresses a revolution state in the opposite pole chart.
pub fn switch_chart(s: &FlowState, l: f64) -> FlowState {
    let rho = s[0].hypot(s[1]);
    let (c, sn) = (s[0] / rho, s[1] / rho);
    let p_rho = c * s[3] + sn * s[4];
    let p_theta = -s[1] * s[3] + s[0] * s[4];
    let rho2 = l - rho;
    let p_rho2 = -p_rho;
    let ang = p_theta / rho2;
    let mut out = *s;
    out[0] = rho2 * c;
    out[1] = rho2 * sn;
    out[2] = -s[2];
    out[3] = p_rho2 * c - ang * sn;
    out[4] = p_rho2 * sn + ang * c;
    out
}

/// Transverse linearization `[[y1, y2], [y1', y2']]` stored in a state.
pub fn linearization(s: &FlowState) -> [[f64; 2]; 2] {
    [[s[6], s[8]], [s[7], s[9]]]
}

/// Fixed orthonormal frame of the tangent plane at a base point, used to
/// label unit directions by an angle `ω ∈ [0, 2π)`.
#[derive(Debug, Clone, Copy)]
pub struct DirectionFrame {
    system: GeodesicSystem,
    base: ChartPoint,
    kind: FrameKind,
}

#[derive(Debug, Clone, Copy)]
enum FrameKind {
    Planar,
    Ambient { e1: [f64; 3], e2: [f64; 3] },
    Polar { north: bool, rho: f64, r: f64, e1: [f64; 2], e2: [f64; 2] },
}

impl DirectionFrame {
    pub fn new(surface: &SurfaceModel, base: ChartPoint, policy: StepPolicy) -> Result<Self> {
        surface.validate(&base)?;
        let system = GeodesicSystem::new(*surface, policy);
        let kind = match (*surface, base) {
            (SurfaceModel::FlatTorus { .. }, _) => FrameKind::Planar,
            (SurfaceModel::Revolution { profile }, ChartPoint::Polar { r, theta }) => {
                let l = profile.length();
                let north = r <= 0.5 * l;
                let rho = if north { r } else { l - r };
                if rho == 0.0 {
                    FrameKind::Polar {
                        north,
                        rho,
                        r,
                        e1: [1.0, 0.0],
                        e2: [0.0, 1.0],
                    }
                } else {
                    let (sn, cs) = theta.sin_cos();
                    let sign = if north { 1.0 } else { -1.0 };
                    let q = rho / profile.f(r);
                    FrameKind::Polar {
                        north,
                        rho,
                        r,
                        e1: [sign * cs, sign * sn],
                        e2: [-q * sn, q * cs],
                    }
                }
            }
            (_, ChartPoint::Ambient { p }) => {
                let n = surface.normal(&p)?;
                let (e1, e2) = tangent_basis(&n);
                FrameKind::Ambient { e1, e2 }
            }
            _ => unreachable!("validated"),
        };
        Ok(DirectionFrame { system, base, kind })
    }

    pub fn system(&self) -> &GeodesicSystem {
        &self.system
    }

    pub fn base(&self) -> ChartPoint {
        self.base
    }

    /// Unit phase point at the base with direction angle `ω`.
    pub fn phase_point(&self, omega: f64) -> PhasePoint {
        let s = self.state(omega);
        let mut p = self.system.phase_point(&s);
        // at a pole the meridian angle of the position carries the direction
        if !matches!(self.kind, FrameKind::Polar { rho, .. } if rho == 0.0) {
            p.position = self.base;
        }
        p
    }

    /// Augmented initial state for direction `ω`.
    pub fn state(&self, omega: f64) -> FlowState {
        let (sn, cs) = omega.sin_cos();
        let mut s = [0.0; 10];
        match (self.kind, self.base) {
            (FrameKind::Planar, ChartPoint::Planar { x, y }) => {
                s[..6].copy_from_slice(&[x, y, 0.0, cs, sn, 0.0]);
            }
            (FrameKind::Ambient { e1, e2 }, ChartPoint::Ambient { p }) => {
                s[..3].copy_from_slice(&p);
                for i in 0..3 {
                    s[3 + i] = cs * e1[i] + sn * e2[i];
                }
            }
            (FrameKind::Polar { north, rho, e1, e2, .. }, ChartPoint::Polar { theta, .. }) => {
                let profile = self.system.profile().expect("revolution");
                let w = [rho * theta.cos(), rho * theta.sin()];
                let u = [cs * e1[0] + sn * e2[0], cs * e1[1] + sn * e2[1]];
                // covector = g u with g = (1/A)(I + B w wᵀ)
                let (a, b, _, _) = profile.pole_chart_coefficients(rho * rho);
                let wu = w[0] * u[0] + w[1] * u[1];
                s[0] = w[0];
                s[1] = w[1];
                s[2] = if north { 1.0 } else { -1.0 };
                s[3] = (u[0] + b * wu * w[0]) / a;
                s[4] = (u[1] + b * wu * w[1]) / a;
            }
            _ => unreachable!("frame matches base"),
        }
        self.system.renormalize(&mut s);
        s[6] = 1.0;
        s[9] = 1.0;
        s
    }

    /// Direction angle of the velocity of a nearby state, measured in this frame.
    pub fn angle(&self, s: &FlowState) -> f64 {
        let ang = match self.kind {
            FrameKind::Planar => s[4].atan2(s[3]),
            FrameKind::Ambient { e1, e2 } => dot3(&s[3..6], &e2).atan2(dot3(&s[3..6], &e1)),
            FrameKind::Polar { north, e1, e2, .. } => {
                let profile = self.system.profile().expect("revolution");
                let s = self.in_base_chart(s, north, profile.length());
                let rho = s[0] * s[0] + s[1] * s[1];
                let (a, b, _, _) = profile.pole_chart_coefficients(rho);
                let wp = s[0] * s[3] + s[1] * s[4];
                let u = [a * s[3] - b * wp * s[0], a * s[4] - b * wp * s[1]];
                let c1 = (u[0] * e1[0] + u[1] * e1[1]) / (e1[0] * e1[0] + e1[1] * e1[1]);
                let c2 = (u[0] * e2[0] + u[1] * e2[1]) / (e2[0] * e2[0] + e2[1] * e2[1]);
                c2.atan2(c1)
            }
        };
        ang.rem_euclid(std::f64::consts::TAU)
    }

    fn in_base_chart(&self, s: &FlowState, north: bool, l: f64) -> FlowState {
        if (s[2] > 0.0) == north {
            *s
        } else {
            switch_chart(s, l)
        }
    }

    /// Distance from the position of `s` to the base point. Accurate for
    /// nearby states; for distant ones it is a positive lower-bound-like
    /// value adequate for loop detection.
    pub fn distance(&self, s: &FlowState) -> f64 {
        match (self.kind, self.base, self.system.surface) {
            (FrameKind::Planar, ChartPoint::Planar { x, y }, SurfaceModel::FlatTorus { l1, l2 }) => {
                let dx = crate::surfaces::wrap_period(s[0] - x, l1);
                let dy = crate::surfaces::wrap_period(s[1] - y, l2);
                dx.hypot(dy)
            }
            (FrameKind::Ambient { .. }, ChartPoint::Ambient { p }, _) => {
                let d = [s[0] - p[0], s[1] - p[1], s[2] - p[2]];
                dot3(&d, &d).sqrt()
            }
            (FrameKind::Polar { north, rho: rho0, r: r0, .. }, ChartPoint::Polar { theta, .. }, SurfaceModel::Revolution { profile }) => {
                let l = profile.length();
                let rho_s = s[0].hypot(s[1]);
                let r_s = if s[2] > 0.0 { rho_s } else { l - rho_s };
                let dr = (r_s - r0).abs();
                if dr > 0.5 || rho0 == 0.0 {
                    return dr;
                }
                let s = self.in_base_chart(s, north, l);
                let w0 = [rho0 * theta.cos(), rho0 * theta.sin()];
                let d = [s[0] - w0[0], s[1] - w0[1]];
                let mid = [0.5 * (s[0] + w0[0]), 0.5 * (s[1] + w0[1])];
                let (a, b, _, _) = profile.pole_chart_coefficients(mid[0] * mid[0] + mid[1] * mid[1]);
                let md = mid[0] * d[0] + mid[1] * d[1];
                (((d[0] * d[0] + d[1] * d[1]) + b * md * md) / a).sqrt().max(dr)
            }
            _ => unreachable!("frame matches base"),
        }
    }
}

fn run_flow(surface: &SurfaceModel, start: &PhasePoint, t: f64, policy: StepPolicy, record: bool) -> Result<(FlowResult, FlowState)> {
    if !t.is_finite() {
        return Err(FlowError::InvalidStart("non-finite time".into()));
    }
    let system = GeodesicSystem::new(*surface, policy);
    let s0 = system.initial_state(start)?;
    let mut samples = record.then(|| {
        vec![TrajectorySample {
            t: 0.0,
            point: *start,
            j: 0.0,
            dj: 1.0,
        }]
    });
    let (end, drift) = if t == 0.0 {
        (s0, 0.0)
    } else {
        system.integrate(&s0, t, |tk, s| {
            if let Some(v) = samples.as_mut() {
                v.push(TrajectorySample {
                    t: tk,
                    point: system.phase_point(s),
                    j: s[8],
                    dj: s[9],
                });
            }
        })?
    };
    let result = FlowResult {
        end: system.phase_point(&end),
        trajectory: samples,
        drift,
        flagged: drift > policy.drift_tol,
    };
    Ok((result, end))
}

/// Time-`t` geodesic flow `Φ_t(start)`; negative `t` flows backwards.
pub fn flow(surface: &SurfaceModel, start: &PhasePoint, t: f64, policy: StepPolicy) -> Result<FlowResult> {
    run_flow(surface, start, t, policy, false).map(|r| r.0)
}

/// As [`flow`], keeping every step as a trajectory sample.
pub fn flow_recorded(surface: &SurfaceModel, start: &PhasePoint, t: f64, policy: StepPolicy) -> Result<FlowResult> {
    run_flow(surface, start, t, policy, true).map(|r| r.0)
}

/// Flow together with the transverse linearization `[[y1, y2], [y1', y2']]`
/// acting on (normal displacement, normal momentum).
pub fn flow_with_linearization(
    surface: &SurfaceModel,
    start: &PhasePoint,
    t: f64,
    policy: StepPolicy,
) -> Result<(FlowResult, [[f64; 2]; 2])> {
    let (res, end) = run_flow(surface, start, t, policy, false)?;
    Ok((res, linearization(&end)))
}

/// Number of zeros in `(0, ℓ]` of the Jacobi field with `J(0) = 0`,
/// `J'(0) = 1` along the geodesic leaving `x` at angle `ω`. Zeros within
/// `1e-7` past `ℓ` count as inside.
pub fn conjugate_count(surface: &SurfaceModel, x: ChartPoint, omega: f64, ell: f64, policy: StepPolicy) -> Result<usize> {
    if !(ell > 0.0) {
        return Err(FlowError::InvalidStart("loop length must be positive".into()));
    }
    let frame = DirectionFrame::new(surface, x, policy)?;
    let system = *frame.system();
    let s0 = frame.state(omega);
    let horizon = ell + 1e-7;
    let n = ((horizon / policy.h).ceil() as usize).max(1);
    let h = horizon / n as f64;
    let amb_tol = 1e-9;

    let mut zeros = Vec::new();
    // last three sampled states, oldest first
    let mut hist: Vec<(f64, FlowState)> = vec![(0.0, s0)];
    let mut cur = s0;
    for k in 1..=n {
        let t_cur = h * (k - 1) as f64;
        let (next, _) = system.step(&cur, h);
        system.check(&next, h * k as f64)?;
        let (y_prev, y_next) = (cur[8], next[8]);
        if k > 1 && y_prev != 0.0 && y_next != 0.0 && y_prev.signum() != y_next.signum() {
            let base = cur;
            let tz = bisect(|tau| system.step(&base, tau).0[8], 0.0, h, 1e-9)
                .map(|tau| t_cur + tau)
                .unwrap_or(t_cur + 0.5 * h);
            zeros.push(tz);
        } else if k > 1 && y_prev == 0.0 {
            zeros.push(t_cur);
        }
        hist.push((h * k as f64, next));
        if hist.len() > 3 {
            hist.remove(0);
        }
        if hist.len() == 3 && hist[0].0 > 0.0 {
            let (a, b, c) = (hist[0].1[8], hist[1].1[8], hist[2].1[8]);
            let same_sign = a.signum() == b.signum() && b.signum() == c.signum() && a != 0.0 && b != 0.0 && c != 0.0;
            if same_sign && b.abs() <= a.abs() && b.abs() <= c.abs() && b.abs() < 10.0 * h {
                let (t0, base) = hist[0];
                let (tau, m) = golden_min(|tau| system.step(&base, tau).0[8].abs(), 0.0, 2.0 * h, 1e-12);
                if m < amb_tol {
                    return Err(FlowError::AmbiguousZero { t: t0 + tau });
                }
            }
        }
        cur = next;
    }
    Ok(zeros.len())
}

/// Conjugate count along `directions` equally spaced loops from `x`.
/// The counts must agree; otherwise the disagreement is reported.
pub fn maslov_index(surface: &SurfaceModel, x: ChartPoint, ell: f64, directions: usize, policy: StepPolicy) -> Result<usize> {
    let counts: Vec<(f64, usize)> = (0..directions.max(1))
        .map(|i| {
            let omega = std::f64::consts::TAU * (i as f64 + 0.5) / directions.max(1) as f64;
            conjugate_count(surface, x, omega, ell, policy).map(|b| (omega, b))
        })
        .collect::<Result<_>>()?;
    let first = counts[0].1;
    if counts.iter().all(|c| c.1 == first) {
        Ok(first)
    } else {
        Err(FlowError::DirectionDependent(counts))
    }
}

/// Writes trajectory samples as CSV with columns
/// `t, c1, c2, c3, xi1, xi2, xi3, J, dJ`.
pub fn write_trajectory_csv<W: Write>(mut out: W, samples: &[TrajectorySample]) -> std::io::Result<()> {
    writeln!(out, "t,c1,c2,c3,xi1,xi2,xi3,J,dJ")?;
    for s in samples {
        let c = match s.point.position {
            ChartPoint::Planar { x, y } => [x, y, 0.0],
            ChartPoint::Ambient { p } => p,
            ChartPoint::Polar { r, theta } => [r, theta, 0.0],
        };
        let row = [s.t, c[0], c[1], c[2], s.point.xi[0], s.point.xi[1], s.point.xi[2], s.j, s.dj];
        let cells: Vec<String> = row.iter().map(|v| crate::fmt_float(*v)).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}
