//! Analytic model surfaces: flat torus, round sphere, surfaces of revolution
//! with built-in profiles, and triaxial ellipsoids.
//!
//! Sphere and ellipsoid points live in ambient 3-space. Torus points use the
//! planar chart and revolution points the geodesic polar chart `(r, θ)`.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("pole chart singularity at r = {0}")]
    PoleChartSingularity(f64),
    #[error("not triaxial: semi-axes must satisfy a > b > c > 0 (got {0}, {1}, {2})")]
    NotTriaxial(f64, f64, f64),
    #[error("invalid surface: {0}")]
    InvalidModel(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("surface is not represented in ambient space")]
    NotEmbedded,
}

pub type Result<T> = std::result::Result<T, SurfaceError>;

/// Built-in meridian profiles `f(r) = sin r + k sin³ r` on `[0, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Sine,
    Peanut,
    Prolate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct ProfileSpec {
    kind: ProfileKind,
    amplitude: f64,
}

const SERIES_TERMS: usize = 14;
const SERIES_RHO: f64 = 0.01;

/// Meridian profile of a surface of revolution.
///
/// All built-ins are symmetric under `r -> π - r`, so the two pole charts
/// share the same metric coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "ProfileSpec", into = "ProfileSpec")]
pub struct Profile {
    kind: ProfileKind,
    amplitude: f64,
    k: f64,
    series: [f64; SERIES_TERMS],
}

impl From<ProfileSpec> for Profile {
    fn from(s: ProfileSpec) -> Self {
        Profile::build(s.kind, s.amplitude)
    }
}

impl From<Profile> for ProfileSpec {
    fn from(p: Profile) -> Self {
        ProfileSpec {
            kind: p.kind,
            amplitude: p.amplitude,
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn series_mul(a: &[f64], b: &[f64]) -> [f64; SERIES_TERMS] {
    let mut out = [0.0; SERIES_TERMS];
    for i in 0..SERIES_TERMS {
        for j in 0..=i {
            out[i] += a[j] * b[i - j];
        }
    }
    out
}

/// Coefficients in `ρ = r²` of `A = (r / f)²`.
fn metric_series(k: f64) -> [f64; SERIES_TERMS] {
    let mut sinc = [0.0; SERIES_TERMS];
    let mut sin2 = [0.0; SERIES_TERMS];
    for n in 0..SERIES_TERMS {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        sinc[n] = sign / factorial(2 * n + 1);
        if n >= 1 {
            sin2[n] = -sign * 2f64.powi(2 * n as i32 - 1) / factorial(2 * n);
        }
    }
    let mut bracket = sin2.map(|c| k * c);
    bracket[0] = 1.0;
    let s = series_mul(&sinc, &bracket);
    let s2 = series_mul(&s, &s);
    let mut inv = [0.0; SERIES_TERMS];
    inv[0] = 1.0 / s2[0];
    for n in 1..SERIES_TERMS {
        let acc: f64 = (1..=n).map(|j| s2[j] * inv[n - j]).sum();
        inv[n] = -acc / s2[0];
    }
    inv
}

impl Profile {
    fn build(kind: ProfileKind, amplitude: f64) -> Self {
        let k = match kind {
            ProfileKind::Sine => 0.0,
            ProfileKind::Peanut => amplitude,
            ProfileKind::Prolate => -amplitude,
        };
        Profile {
            kind,
            amplitude,
            k,
            series: metric_series(k),
        }
    }

    /// `f = sin r`: the unit round sphere.
    pub fn sine() -> Self {
        Self::build(ProfileKind::Sine, 0.0)
    }

    /// `f = sin r (1 + a sin² r)`, bulging at the equator.
    pub fn peanut(a: f64) -> Result<Self> {
        Self::named(ProfileKind::Peanut, a)
    }

    /// `f = sin r (1 - a sin² r)`, pinched at the equator.
    pub fn prolate(a: f64) -> Result<Self> {
        Self::named(ProfileKind::Prolate, a)
    }

    pub fn named(kind: ProfileKind, amplitude: f64) -> Result<Self> {
        let ok = match kind {
            ProfileKind::Sine => amplitude == 0.0,
            ProfileKind::Peanut => amplitude.is_finite() && amplitude > 0.0,
            ProfileKind::Prolate => amplitude > 0.0 && amplitude < 1.0,
        };
        if !ok {
            return Err(SurfaceError::InvalidModel(format!(
                "profile {kind:?} does not accept amplitude {amplitude}"
            )));
        }
        let p = Self::build(kind, amplitude);
        let (d0, dl) = (p.df(0.0), p.df(p.length()));
        if (d0 - 1.0).abs() > 1e-12 || (dl + 1.0).abs() > 1e-12 {
            return Err(SurfaceError::InvalidModel("profile is not pole-regular".into()));
        }
        Ok(p)
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Coefficient `k` in `sin r + k sin³ r`.
    pub fn cubic_coefficient(&self) -> f64 {
        self.k
    }

    /// Meridian length `L`.
    pub fn length(&self) -> f64 {
        PI
    }

    pub fn f(&self, r: f64) -> f64 {
        let s = r.sin();
        s * (1.0 + self.k * s * s)
    }

    pub fn df(&self, r: f64) -> f64 {
        let (s, c) = r.sin_cos();
        c * (1.0 + 3.0 * self.k * s * s)
    }

    pub fn d2f(&self, r: f64) -> f64 {
        let (s, c) = r.sin_cos();
        s * (-1.0 + self.k * (6.0 * c * c - 3.0 * s * s))
    }

    /// Gauss curvature `-f''/f`, with the factor `sin r` cancelled so the
    /// expression stays regular at the poles.
    pub fn curvature(&self, r: f64) -> f64 {
        let (s, c) = r.sin_cos();
        (1.0 - self.k * (6.0 * c * c - 3.0 * s * s)) / (1.0 + self.k * s * s)
    }

    /// Area `2π ∫ f dr`.
    pub fn area(&self) -> f64 {
        TAU * self.integral_f(0.0, self.length())
    }

    /// Exact `∫_a^b f dr`.
    pub fn integral_f(&self, a: f64, b: f64) -> f64 {
        let (ca, cb) = (a.cos(), b.cos());
        let d = 2.0 * (0.5 * (a + b)).sin() * (0.5 * (b - a)).sin();
        d * (1.0 + self.k * (1.0 - (ca * ca + ca * cb + cb * cb) / 3.0))
    }

    /// Exact `∫_a^b dr / f` for `0 < a < b < L`.
    pub fn integral_inv_f(&self, a: f64, b: f64) -> f64 {
        let log_part = ((0.5 * b).tan() / (0.5 * a).tan()).ln();
        let k = self.k;
        let corr = |r: f64| {
            if k > 0.0 {
                let c = (k / (1.0 + k)).sqrt();
                c * (c * r.cos()).atanh()
            } else if k < 0.0 {
                let d = (-k / (1.0 + k)).sqrt();
                -d * (d * r.cos()).atan()
            } else {
                0.0
            }
        };
        log_part + corr(b) - corr(a)
    }

    /// Inverse-metric coefficients of the pole chart `w = r (cos θ, sin θ)`:
    /// `g⁻¹ = A I - B w wᵀ` with `A = (r/f)²`, `B = (A-1)/ρ`, `ρ = |w|²`.
    /// Returns `(A, B, dA/dρ, dB/dρ)`.
    pub fn pole_chart_coefficients(&self, rho: f64) -> (f64, f64, f64, f64) {
        if rho < SERIES_RHO {
            let c = &self.series;
            let mut a = 0.0;
            let mut da = 0.0;
            let mut b = 0.0;
            let mut db = 0.0;
            for n in (0..SERIES_TERMS).rev() {
                a = a * rho + c[n];
                if n >= 1 {
                    da = da * rho + n as f64 * c[n];
                    b = b * rho + c[n];
                }
                if n >= 2 {
                    db = db * rho + (n - 1) as f64 * c[n];
                }
            }
            (a, b, da, db)
        } else {
            let r = rho.sqrt();
            let f = self.f(r);
            let q = r / f;
            let a = q * q;
            let da_dr = 2.0 * q * (f - r * self.df(r)) / (f * f);
            let da = da_dr / (2.0 * r);
            let b = (a - 1.0) / rho;
            let db = (da - b) / rho;
            (a, b, da, db)
        }
    }
}

/// One of the four model geometries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SurfaceModel {
    FlatTorus { l1: f64, l2: f64 },
    RoundSphere { radius: f64 },
    Revolution { profile: Profile },
    TriaxialEllipsoid { a: f64, b: f64, c: f64 },
}

/// A point on a surface in the surface's native chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "chart", rename_all = "snake_case")]
pub enum ChartPoint {
    Planar { x: f64, y: f64 },
    Ambient { p: [f64; 3] },
    Polar { r: f64, theta: f64 },
}

impl ChartPoint {
    pub fn planar(x: f64, y: f64) -> Self {
        ChartPoint::Planar { x, y }
    }
    pub fn ambient(p: [f64; 3]) -> Self {
        ChartPoint::Ambient { p }
    }
    pub fn polar(r: f64, theta: f64) -> Self {
        ChartPoint::Polar { r, theta }
    }
}

/// Metric tensor, inverse, Christoffel symbols `gamma[k][i][j] = Γ^k_ij`,
/// and Gauss curvature at a chart point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricData {
    pub g: [[f64; 2]; 2],
    pub g_inv: [[f64; 2]; 2],
    pub gamma: [[[f64; 2]; 2]; 2],
    pub curvature: f64,
}

impl MetricData {
    pub fn det(&self) -> f64 {
        self.g[0][0] * self.g[1][1] - self.g[0][1] * self.g[1][0]
    }
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn inverse2(g: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    [[g[1][1] / det, -g[0][1] / det], [-g[1][0] / det, g[0][0] / det]]
}

impl SurfaceModel {
    pub fn torus(l1: f64, l2: f64) -> Result<Self> {
        if !(l1 > 0.0 && l2 > 0.0 && l1.is_finite() && l2.is_finite()) {
            return Err(SurfaceError::InvalidModel("torus sides must be positive".into()));
        }
        Ok(SurfaceModel::FlatTorus { l1, l2 })
    }

    pub fn sphere(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(SurfaceError::InvalidModel("sphere radius must be positive".into()));
        }
        Ok(SurfaceModel::RoundSphere { radius })
    }

    pub fn revolution(profile: Profile) -> Self {
        SurfaceModel::Revolution { profile }
    }

    pub fn ellipsoid(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a > b && b > c && c > 0.0 && a.is_finite()) {
            return Err(SurfaceError::NotTriaxial(a, b, c));
        }
        Ok(SurfaceModel::TriaxialEllipsoid { a, b, c })
    }

    /// Squared semi-axes of an ambient surface.
    pub fn axes_squared(&self) -> Option<[f64; 3]> {
        match *self {
            SurfaceModel::RoundSphere { radius } => Some([radius * radius; 3]),
            SurfaceModel::TriaxialEllipsoid { a, b, c } => Some([a * a, b * b, c * c]),
            _ => None,
        }
    }

    pub fn is_ambient(&self) -> bool {
        self.axes_squared().is_some()
    }

    pub fn area(&self) -> f64 {
        match *self {
            SurfaceModel::FlatTorus { l1, l2 } => l1 * l2,
            SurfaceModel::RoundSphere { radius } => 4.0 * PI * radius * radius,
            SurfaceModel::Revolution { profile } => profile.area(),
            SurfaceModel::TriaxialEllipsoid { a, b, c } => ellipsoid_area(a, b, c),
        }
    }

    /// Checks that `p` uses this surface's chart and lies on the surface.
    pub fn validate(&self, p: &ChartPoint) -> Result<()> {
        match (self, p) {
            (SurfaceModel::FlatTorus { .. }, ChartPoint::Planar { x, y }) => {
                if x.is_finite() && y.is_finite() {
                    Ok(())
                } else {
                    Err(SurfaceError::InvalidPoint("non-finite torus coordinates".into()))
                }
            }
            (SurfaceModel::RoundSphere { .. } | SurfaceModel::TriaxialEllipsoid { .. }, ChartPoint::Ambient { p }) => {
                let resid = self.surface_equation(p);
                if resid.abs() <= 1e-10 {
                    Ok(())
                } else {
                    Err(SurfaceError::InvalidPoint(format!(
                        "point off surface (equation residual {resid:e})"
                    )))
                }
            }
            (SurfaceModel::Revolution { profile }, ChartPoint::Polar { r, theta }) => {
                if (0.0..=profile.length()).contains(r) && theta.is_finite() {
                    Ok(())
                } else {
                    Err(SurfaceError::InvalidPoint(format!("r = {r} outside [0, L]")))
                }
            }
            _ => Err(SurfaceError::InvalidPoint(format!(
                "chart of {p:?} does not match surface"
            ))),
        }
    }

    /// `Σ x_i²/a_i² - 1` for ambient surfaces, 0 otherwise.
    pub fn surface_equation(&self, p: &[f64; 3]) -> f64 {
        match self.axes_squared() {
            Some(a) => p[0] * p[0] / a[0] + p[1] * p[1] / a[1] + p[2] * p[2] / a[2] - 1.0,
            None => 0.0,
        }
    }

    /// Radial projection of an ambient point onto the surface.
    pub fn project(&self, p: [f64; 3]) -> [f64; 3] {
        match self.axes_squared() {
            Some(a) => {
                let s = (p[0] * p[0] / a[0] + p[1] * p[1] / a[1] + p[2] * p[2] / a[2]).sqrt();
                [p[0] / s, p[1] / s, p[2] / s]
            }
            None => p,
        }
    }

    /// Point with ellipsoidal coordinates `(u, v)`: `(a sin u cos v, b sin u sin v, c cos u)`.
    pub fn ambient_point(&self, u: f64, v: f64) -> Result<ChartPoint> {
        let a = self.axes_squared().ok_or(SurfaceError::NotEmbedded)?;
        let (su, cu) = u.sin_cos();
        let (sv, cv) = v.sin_cos();
        Ok(ChartPoint::ambient([
            a[0].sqrt() * su * cv,
            a[1].sqrt() * su * sv,
            a[2].sqrt() * cu,
        ]))
    }

    /// Unit outward normal of an ambient surface.
    pub fn normal(&self, p: &[f64; 3]) -> Result<[f64; 3]> {
        let a = self.axes_squared().ok_or(SurfaceError::NotEmbedded)?;
        let n = [p[0] / a[0], p[1] / a[1], p[2] / a[2]];
        let len = dot3(&n, &n).sqrt();
        Ok([n[0] / len, n[1] / len, n[2] / len])
    }

    /// Gauss curvature at a valid point. Regular everywhere, including poles.
    pub fn gauss_curvature(&self, p: &ChartPoint) -> Result<f64> {
        self.validate(p)?;
        Ok(match (*self, *p) {
            (SurfaceModel::FlatTorus { .. }, _) => 0.0,
            (SurfaceModel::RoundSphere { radius }, _) => 1.0 / (radius * radius),
            (SurfaceModel::Revolution { profile }, ChartPoint::Polar { r, .. }) => profile.curvature(r),
            (SurfaceModel::TriaxialEllipsoid { .. }, ChartPoint::Ambient { p }) => self.ambient_curvature(&p),
            _ => unreachable!("validated"),
        })
    }

    /// Gauss curvature of an ambient surface at `p`, without validation.
    #[inline]
    pub fn ambient_curvature(&self, p: &[f64; 3]) -> f64 {
        let a = self.axes_squared().expect("ambient surface");
        let s = p[0] * p[0] / (a[0] * a[0]) + p[1] * p[1] / (a[1] * a[1]) + p[2] * p[2] / (a[2] * a[2]);
        1.0 / (a[0] * a[1] * a[2] * s * s)
    }

    /// Metric data in the surface's coordinate chart. Ambient surfaces use
    /// the ellipsoidal coordinates `(u, v)` of [`SurfaceModel::ambient_point`].
    pub fn metric_at(&self, p: &ChartPoint) -> Result<MetricData> {
        self.validate(p)?;
        let curvature = self.gauss_curvature(p)?;
        match (*self, *p) {
            (SurfaceModel::FlatTorus { .. }, _) => Ok(MetricData {
                g: [[1.0, 0.0], [0.0, 1.0]],
                g_inv: [[1.0, 0.0], [0.0, 1.0]],
                gamma: [[[0.0; 2]; 2]; 2],
                curvature,
            }),
            (SurfaceModel::Revolution { profile }, ChartPoint::Polar { r, .. }) => {
                let l = profile.length();
                let edge = r.min(l - r);
                if edge == 0.0 {
                    return Err(SurfaceError::PoleChartSingularity(r));
                }
                let (f, df, log_der) = if edge < 1e-6 {
                    let c3 = profile.k - 1.0 / 6.0;
                    let sign = if r < 0.5 * l { 1.0 } else { -1.0 };
                    let f = edge * (1.0 + c3 * edge * edge);
                    let df = sign * (1.0 + 3.0 * c3 * edge * edge);
                    (f, df, sign * (1.0 + 2.0 * c3 * edge * edge) / edge)
                } else {
                    let f = profile.f(r);
                    let df = profile.df(r);
                    (f, df, df / f)
                };
                let mut gamma = [[[0.0; 2]; 2]; 2];
                gamma[0][1][1] = -f * df;
                gamma[1][0][1] = log_der;
                gamma[1][1][0] = log_der;
                Ok(MetricData {
                    g: [[1.0, 0.0], [0.0, f * f]],
                    g_inv: [[1.0, 0.0], [0.0, 1.0 / (f * f)]],
                    gamma,
                    curvature,
                })
            }
            (_, ChartPoint::Ambient { p }) => {
                let a = self.axes_squared().expect("ambient");
                let (ax, by, cz) = (a[0].sqrt(), a[1].sqrt(), a[2].sqrt());
                let cu = (p[2] / cz).clamp(-1.0, 1.0);
                let su = (1.0 - cu * cu).sqrt();
                if su < 1e-12 {
                    return Err(SurfaceError::PoleChartSingularity(p[2]));
                }
                let v = (p[1] / by).atan2(p[0] / ax);
                let (sv, cv) = v.sin_cos();
                let xu = [ax * cu * cv, by * cu * sv, -cz * su];
                let xv = [-ax * su * sv, by * su * cv, 0.0];
                let xuu = [-ax * su * cv, -by * su * sv, -cz * cu];
                let xuv = [-ax * cu * sv, by * cu * cv, 0.0];
                let xvv = [-ax * su * cv, -by * su * sv, 0.0];
                let g = [[dot3(&xu, &xu), dot3(&xu, &xv)], [dot3(&xv, &xu), dot3(&xv, &xv)]];
                let g_inv = inverse2(&g);
                let tangents = [xu, xv];
                let second = [[xuu, xuv], [xuv, xvv]];
                let mut gamma = [[[0.0; 2]; 2]; 2];
                for (i, row) in second.iter().enumerate() {
                    for (j, xij) in row.iter().enumerate() {
                        let proj = [dot3(xij, &tangents[0]), dot3(xij, &tangents[1])];
                        for k in 0..2 {
                            gamma[k][i][j] = g_inv[k][0] * proj[0] + g_inv[k][1] * proj[1];
                        }
                    }
                }
                Ok(MetricData {
                    g,
                    g_inv,
                    gamma,
                    curvature,
                })
            }
            _ => unreachable!("validated"),
        }
    }

    /// Gauss curvature at each point of `path`, in order.
    pub fn gauss_curvature_along(&self, path: &[ChartPoint]) -> Result<Vec<f64>> {
        path.iter().map(|p| self.gauss_curvature(p)).collect()
    }

    /// Principal curvatures `(κ1, κ2)`, `κ1 ≥ κ2`, of an ambient surface.
    pub fn principal_curvatures(&self, p: &ChartPoint) -> Result<(f64, f64)> {
        self.validate(p)?;
        let (a, x) = match (self.axes_squared(), p) {
            (Some(a), ChartPoint::Ambient { p }) => (a, *p),
            _ => return Err(SurfaceError::NotEmbedded),
        };
        let n = self.normal(&x)?;
        let (e1, e2) = tangent_basis(&n);
        let grad = (x[0] * x[0] / (a[0] * a[0]) + x[1] * x[1] / (a[1] * a[1]) + x[2] * x[2] / (a[2] * a[2])).sqrt();
        let form = |u: &[f64; 3], w: &[f64; 3]| (u[0] * w[0] / a[0] + u[1] * w[1] / a[1] + u[2] * w[2] / a[2]) / grad;
        let (s11, s12, s22) = (form(&e1, &e1), form(&e1, &e2), form(&e2, &e2));
        let mean = 0.5 * (s11 + s22);
        let disc = (0.25 * (s11 - s22).powi(2) + s12 * s12).sqrt();
        Ok((mean + disc, mean - disc))
    }

    /// The four umbilic points of a triaxial ellipsoid.
    pub fn umbilic_points(&self) -> Result<[ChartPoint; 4]> {
        match *self {
            SurfaceModel::TriaxialEllipsoid { a, b, c } => {
                if !(a > b && b > c) {
                    return Err(SurfaceError::NotTriaxial(a, b, c));
                }
                let (a2, b2, c2) = (a * a, b * b, c * c);
                let x = a * ((a2 - b2) / (a2 - c2)).sqrt();
                let z = c * ((b2 - c2) / (a2 - c2)).sqrt();
                Ok([
                    ChartPoint::ambient([x, 0.0, z]),
                    ChartPoint::ambient([x, 0.0, -z]),
                    ChartPoint::ambient([-x, 0.0, z]),
                    ChartPoint::ambient([-x, 0.0, -z]),
                ])
            }
            SurfaceModel::RoundSphere { radius } => Err(SurfaceError::NotTriaxial(radius, radius, radius)),
            _ => Err(SurfaceError::NotEmbedded),
        }
    }

    /// The rotation-axis points `r = 0` and `r = L`.
    pub fn poles_of_revolution(&self) -> Result<(ChartPoint, ChartPoint)> {
        match *self {
            SurfaceModel::Revolution { profile } => Ok((
                ChartPoint::polar(0.0, 0.0),
                ChartPoint::polar(profile.length(), 0.0),
            )),
            _ => Err(SurfaceError::InvalidModel("not a surface of revolution".into())),
        }
    }

    /// Riemannian distance between two points.
    ///
    /// Exact on the torus and sphere, on the sine profile, and for revolution
    /// pairs involving a pole. Ellipsoid pairs use the chord and other
    /// revolution pairs a midpoint-metric estimate in a pole chart; both agree
    /// with the geodesic distance to third order for nearby points and are
    /// what loop detection needs.
    pub fn geodesic_distance(&self, p: &ChartPoint, q: &ChartPoint) -> Result<f64> {
        self.validate(p)?;
        self.validate(q)?;
        Ok(match (*self, *p, *q) {
            (SurfaceModel::FlatTorus { l1, l2 }, ChartPoint::Planar { x: x1, y: y1 }, ChartPoint::Planar { x: x2, y: y2 }) => {
                let dx = wrap_period(x1 - x2, l1);
                let dy = wrap_period(y1 - y2, l2);
                dx.hypot(dy)
            }
            (SurfaceModel::RoundSphere { radius }, ChartPoint::Ambient { p }, ChartPoint::Ambient { p: q }) => {
                radius * great_circle_angle(&p, &q)
            }
            (SurfaceModel::TriaxialEllipsoid { .. }, ChartPoint::Ambient { p }, ChartPoint::Ambient { p: q }) => {
                let d = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
                dot3(&d, &d).sqrt()
            }
            (SurfaceModel::Revolution { profile }, ChartPoint::Polar { r: r1, theta: t1 }, ChartPoint::Polar { r: r2, theta: t2 }) => {
                revolution_distance(&profile, r1, t1, r2, t2)
            }
            _ => unreachable!("validated"),
        })
    }
}

/// Orthonormal tangent basis `(e1, e2)` with `e2 = n × e1`. `e1` is the
/// normalized projection of the first of ŷ, x̂, ẑ not nearly normal.
pub fn tangent_basis(n: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    let axes = [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
    let axis = axes
        .iter()
        .find(|e| dot3(e, n).abs() < 0.9)
        .copied()
        .unwrap_or(axes[0]);
    let d = dot3(&axis, n);
    let mut e1 = [axis[0] - d * n[0], axis[1] - d * n[1], axis[2] - d * n[2]];
    let len = dot3(&e1, &e1).sqrt();
    e1.iter_mut().for_each(|v| *v /= len);
    let e2 = [
        n[1] * e1[2] - n[2] * e1[1],
        n[2] * e1[0] - n[0] * e1[2],
        n[0] * e1[1] - n[1] * e1[0],
    ];
    (e1, e2)
}

fn great_circle_angle(p: &[f64; 3], q: &[f64; 3]) -> f64 {
    let cross = [
        p[1] * q[2] - p[2] * q[1],
        p[2] * q[0] - p[0] * q[2],
        p[0] * q[1] - p[1] * q[0],
    ];
    dot3(&cross, &cross).sqrt().atan2(dot3(p, q))
}

/// Representative of `d` modulo `period` in `[-period/2, period/2]`.
pub fn wrap_period(d: f64, period: f64) -> f64 {
    d - period * (d / period).round()
}

fn revolution_distance(profile: &Profile, r1: f64, t1: f64, r2: f64, t2: f64) -> f64 {
    let l = profile.length();
    if r1 == 0.0 || r2 == 0.0 {
        return (r1 - r2).abs();
    }
    if r1 == l || r2 == l {
        return (r1 - r2).abs();
    }
    if profile.kind == ProfileKind::Sine {
        let p = [r1.sin() * t1.cos(), r1.sin() * t1.sin(), r1.cos()];
        let q = [r2.sin() * t2.cos(), r2.sin() * t2.sin(), r2.cos()];
        return great_circle_angle(&p, &q);
    }
    let dr = (r1 - r2).abs();
    if dr > 0.5 {
        return dr;
    }
    let north = 0.5 * (r1 + r2) <= 0.5 * l;
    let chart = |r: f64, t: f64| {
        let s = if north { r } else { l - r };
        [s * t.cos(), s * t.sin()]
    };
    let w1 = chart(r1, t1);
    let w2 = chart(r2, t2);
    let mid = [0.5 * (w1[0] + w2[0]), 0.5 * (w1[1] + w2[1])];
    let d = [w1[0] - w2[0], w1[1] - w2[1]];
    let rho = mid[0] * mid[0] + mid[1] * mid[1];
    let (a, b, _, _) = profile.pole_chart_coefficients(rho);
    let wd = mid[0] * d[0] + mid[1] * d[1];
    let sq = ((d[0] * d[0] + d[1] * d[1]) + b * wd * wd) / a;
    sq.sqrt().max(dr)
}

/// Ellipsoid area by midpoint quadrature in the ellipsoidal coordinates.
fn ellipsoid_area(a: f64, b: f64, c: f64) -> f64 {
    let n = 400;
    let mut total = 0.0;
    for i in 0..n {
        let u = PI * (i as f64 + 0.5) / n as f64;
        for j in 0..2 * n {
            let v = TAU * (j as f64 + 0.5) / (2 * n) as f64;
            let (su, cu) = u.sin_cos();
            let (sv, cv) = v.sin_cos();
            let nx = b * c * su * su * cv;
            let ny = a * c * su * su * sv;
            let nz = a * b * su * cu;
            total += (nx * nx + ny * ny + nz * nz).sqrt();
        }
    }
    total * (PI / n as f64) * (TAU / (2 * n) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn peanut() -> SurfaceModel {
        SurfaceModel::revolution(Profile::peanut(0.3).unwrap())
    }

    #[test]
    fn constant_curvature_models() {
        let t = SurfaceModel::torus(TAU, TAU).unwrap();
        let m = t.metric_at(&ChartPoint::planar(1.0, 2.0)).unwrap();
        assert_eq!(m.g, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(m.curvature, 0.0);
        let s = SurfaceModel::sphere(1.0).unwrap();
        let p = s.ambient_point(0.7, 2.0).unwrap();
        assert_eq!(s.gauss_curvature(&p).unwrap(), 1.0);
        let sine = SurfaceModel::revolution(Profile::sine());
        let k = sine.gauss_curvature(&ChartPoint::polar(PI / 2.0, 0.0)).unwrap();
        assert!((k - 1.0).abs() < 1e-15);
    }

    #[test]
    fn revolution_curvature_is_minus_f2_over_f() {
        let prof = Profile::peanut(0.3).unwrap();
        for &r in &[0.1, 0.7, 1.5, 2.9] {
            assert!((prof.curvature(r) + prof.d2f(r) / prof.f(r)).abs() < 1e-12);
        }
        let pm = Profile::prolate(0.3).unwrap();
        assert!((pm.curvature(1.0) + pm.d2f(1.0) / pm.f(1.0)).abs() < 1e-12);
    }

    #[test]
    fn metric_inverse_and_pole_error() {
        let e = SurfaceModel::ellipsoid(2.0, 2f64.sqrt(), 1.0).unwrap();
        let p = e.ambient_point(1.1, 0.4).unwrap();
        let m = e.metric_at(&p).unwrap();
        assert!(m.det() > 0.0);
        let id = [
            m.g_inv[0][0] * m.g[0][0] + m.g_inv[0][1] * m.g[1][0],
            m.g_inv[0][0] * m.g[0][1] + m.g_inv[0][1] * m.g[1][1],
        ];
        assert!((id[0] - 1.0).abs() < 1e-12 && id[1].abs() < 1e-12);
        let s = peanut();
        assert!(matches!(
            s.metric_at(&ChartPoint::polar(0.0, 0.0)),
            Err(SurfaceError::PoleChartSingularity(_))
        ));
        assert!(s.metric_at(&ChartPoint::polar(1e-8, 0.0)).is_ok());
    }

    #[test]
    fn umbilics_and_degenerate_axes() {
        assert!(matches!(
            SurfaceModel::ellipsoid(2.0, 2.0, 1.0),
            Err(SurfaceError::NotTriaxial(..))
        ));
        let e = SurfaceModel::ellipsoid(2.0, 2f64.sqrt(), 1.0).unwrap();
        let u = e.umbilic_points().unwrap();
        if let ChartPoint::Ambient { p } = u[0] {
            assert!((p[0] - 1.632993161855452).abs() < 1e-12);
            assert!((p[2] - 0.5773502691896258).abs() < 1e-12);
        }
        for p in &u {
            let (k1, k2) = e.principal_curvatures(p).unwrap();
            assert!((k1 - k2).abs() < 1e-8);
        }
    }

    #[test]
    fn series_matches_direct_coefficients() {
        let prof = Profile::peanut(0.3).unwrap();
        let rho = 0.0099;
        let s = prof.pole_chart_coefficients(rho);
        let r = rho.sqrt();
        let f = prof.f(r);
        let a = (r / f).powi(2);
        assert!((s.0 - a).abs() < 1e-14);
        assert!((s.1 - (a - 1.0) / rho).abs() < 1e-9);
        let h = 1e-5;
        let d = (prof.pole_chart_coefficients(0.5 + h).0 - prof.pole_chart_coefficients(0.5 - h).0) / (2.0 * h);
        assert!((prof.pole_chart_coefficients(0.5).2 - d).abs() < 1e-8);
    }

    #[test]
    fn exact_integrals() {
        let prof = Profile::peanut(0.3).unwrap();
        let quad = |g: &dyn Fn(f64) -> f64, a: f64, b: f64| {
            let n = 2000;
            let h = (b - a) / n as f64;
            (0..n).map(|i| g(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
        };
        let (a, b) = (0.2, 1.3);
        assert!((prof.integral_f(a, b) - quad(&|r| prof.f(r), a, b)).abs() < 1e-7);
        assert!((prof.integral_inv_f(a, b) - quad(&|r| 1.0 / prof.f(r), a, b)).abs() < 1e-6);
        let pm = Profile::prolate(0.4).unwrap();
        assert!((pm.integral_inv_f(a, b) - quad(&|r| 1.0 / pm.f(r), a, b)).abs() < 1e-6);
        assert!((Profile::sine().area() - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn sphere_models_agree() {
        let sph = SurfaceModel::sphere(1.0).unwrap();
        let rev = SurfaceModel::revolution(Profile::sine());
        let pairs = [((0.3, 0.2), (1.7, 2.5)), ((2.0, 4.0), (2.1, 4.05))];
        for ((r1, t1), (r2, t2)) in pairs {
            let p = sph.ambient_point(r1, t1).unwrap();
            let q = sph.ambient_point(r2, t2).unwrap();
            let ds = sph.geodesic_distance(&p, &q).unwrap();
            let dr = rev
                .geodesic_distance(&ChartPoint::polar(r1, t1), &ChartPoint::polar(r2, t2))
                .unwrap();
            assert!((ds - dr).abs() < 1e-12);
        }
    }

    #[test]
    fn revolution_local_distance_close_to_polar_metric() {
        let s = peanut();
        let prof = Profile::peanut(0.3).unwrap();
        let (r, t) = (1.0, 0.5);
        let (dr, dt) = (3e-4, -2e-4);
        let d = s
            .geodesic_distance(&ChartPoint::polar(r, t), &ChartPoint::polar(r + dr, t + dt))
            .unwrap();
        let f = prof.f(r + 0.5 * dr);
        let expected = (dr * dr + f * f * dt * dt).sqrt();
        assert!((d - expected).abs() < 1e-6 * expected);
    }
}
