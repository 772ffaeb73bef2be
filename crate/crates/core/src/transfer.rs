//! Weighted composition operator `U f = (f ∘ η) √J` of a circle return map,
//! its iterates, Cesàro averages, fixed points, and the dissipativity
//! verdict for the constant function.
//!
//! All integrals use the probability measure `dω / 2π` and the trapezoid
//! rule on the map's uniform grid. Correlations `c_ν = ⟨U^ν 1, 1⟩` are
//! evaluated as `⟨U^{ν-a} 1, U^{-a} 1⟩` with `a = ⌈ν/2⌉`, which is the same
//! number for a unitary `U` but keeps both integrands smooth on the grid.

use crate::focal::{FocalError, ReturnMap};
use crate::numerics::roots::bisect;
use crate::numerics::spline::PeriodicSpline;
use crate::numerics::{circle_dist, wrap_tau};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransferError {
    #[error("iterate unreliable at ν = {nu}: orbit error estimate {estimate:e} rad")]
    IterateUnreliable { nu: i64, estimate: f64 },
    #[error("identity map: all points fixed")]
    IdentityMap,
    #[error(transparent)]
    Map(#[from] FocalError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, TransferError>;

/// Orbit position error allowed before an iterate is declared unreliable.
pub const ORBIT_ERROR_BUDGET: f64 = 1e-2;

/// Interpolated circle map: periodic cubic splines of the lifted
/// displacement `D = η̃ - ω` and of `ln J`.
#[derive(Debug, Clone)]
pub struct CircleMap {
    omega: Vec<f64>,
    lift: Vec<f64>,
    log_j: Vec<f64>,
    disp: PeriodicSpline,
    log_j_spline: PeriodicSpline,
    disp_range: (f64, f64),
    disp_error: f64,
}

fn half_grid_error(origin: f64, values: &[f64]) -> f64 {
    let n = values.len();
    if n < 16 || n % 2 == 1 {
        return 0.0;
    }
    let even: Vec<f64> = values.iter().step_by(2).copied().collect();
    let coarse = PeriodicSpline::on_circle(origin, even);
    let h = TAU / n as f64;
    (1..n)
        .step_by(2)
        .map(|i| (coarse.eval(origin + i as f64 * h) - values[i]).abs())
        .fold(0.0, f64::max)
        / 16.0
}

impl CircleMap {
    pub fn new(map: &ReturnMap) -> Result<Self> {
        map.validate()?;
        let lift = map.lift();
        let disp_values: Vec<f64> = lift.iter().zip(&map.omega).map(|(l, w)| l - w).collect();
        let log_j: Vec<f64> = map.jacobian.iter().map(|j| j.ln()).collect();
        let origin = map.omega[0];
        let lo = disp_values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = disp_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(CircleMap {
            omega: map.omega.clone(),
            disp_error: half_grid_error(origin, &disp_values),
            disp: PeriodicSpline::on_circle(origin, disp_values),
            log_j_spline: PeriodicSpline::on_circle(origin, log_j.clone()),
            log_j,
            lift,
            disp_range: (lo, hi),
        })
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    /// Lifted image of a real argument.
    #[inline]
    pub fn eta(&self, x: f64) -> f64 {
        x + self.disp.eval(x)
    }

    #[inline]
    pub fn jacobian(&self, x: f64) -> f64 {
        self.log_j_spline.eval(x).exp()
    }

    #[inline]
    pub fn log_jacobian(&self, x: f64) -> f64 {
        self.log_j_spline.eval(x)
    }

    /// Lifted preimage: the `x` with `η̃(x) = y`, by bisection on the
    /// increasing lift.
    pub fn eta_inv(&self, y: f64) -> f64 {
        let margin = 0.05 + 0.1 * (self.disp_range.1 - self.disp_range.0);
        let lo = y - self.disp_range.1 - margin;
        let hi = y - self.disp_range.0 + margin;
        bisect(|x| self.eta(x) - y, lo, hi, 1e-15).unwrap_or(0.5 * (lo + hi))
    }

    /// Spline error estimate for `D`, from a half-grid comparison.
    pub fn interpolation_error(&self) -> f64 {
        self.disp_error
    }

    /// Roots of `η(ω) = ω` with their multipliers `J(ω*)`.
    fn displacement_roots(&self) -> Vec<f64> {
        let n = self.omega.len();
        let h = TAU / n as f64;
        let d: Vec<f64> = self.lift.iter().zip(&self.omega).map(|(l, w)| l - w).collect();
        let mut roots = Vec::new();
        let lo = (self.disp_range.0 / TAU).floor() as i64;
        let hi = (self.disp_range.1 / TAU).ceil() as i64;
        for m in lo..=hi {
            let target = TAU * m as f64;
            for i in 0..n {
                let (a, b) = (d[i] - target, d[(i + 1) % n] - target);
                if a == 0.0 {
                    roots.push(self.omega[i]);
                } else if a.signum() != b.signum() && b != 0.0 {
                    let x0 = self.omega[i];
                    if let Some(r) = bisect(|x| self.disp.eval(x) - target, x0, x0 + h, 1e-14) {
                        roots.push(wrap_tau(r));
                    }
                }
            }
        }
        roots.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        roots
    }
}

/// Forward and backward orbits of every grid node, with accumulated
/// `ln J^{±m}` and linearized orbit-error estimates.
#[derive(Debug, Clone)]
struct OrbitTable {
    /// `fwd[m][i] = ln J^m(ω_i)`, `bwd[m][i] = ln J^{-m}(ω_i)`.
    fwd: Vec<Vec<f64>>,
    bwd: Vec<Vec<f64>>,
    fwd_pos: Vec<Vec<f64>>,
    bwd_pos: Vec<Vec<f64>>,
    fwd_err: Vec<f64>,
    bwd_err: Vec<f64>,
}

impl OrbitTable {
    fn build(map: &CircleMap, depth: usize) -> Self {
        let n = map.len();
        let eps = map.interpolation_error();
        let per_node: Vec<_> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut f_log = vec![0.0; depth + 1];
                let mut f_pos = vec![map.omega[i]; depth + 1];
                let mut f_err = vec![0.0; depth + 1];
                let mut b_log = vec![0.0; depth + 1];
                let mut b_pos = vec![map.omega[i]; depth + 1];
                let mut b_err = vec![0.0; depth + 1];
                if depth >= 1 {
                    f_log[1] = map.log_j[i];
                    f_pos[1] = map.lift[i];
                }
                for m in 2..=depth {
                    let x = f_pos[m - 1];
                    let lj = map.log_jacobian(x);
                    f_log[m] = f_log[m - 1] + lj;
                    f_pos[m] = map.eta(x);
                    f_err[m] = lj.exp() * f_err[m - 1] + eps;
                }
                for m in 1..=depth {
                    let y = map.eta_inv(b_pos[m - 1]);
                    let lj = map.log_jacobian(y);
                    b_log[m] = b_log[m - 1] - lj;
                    b_pos[m] = y;
                    b_err[m] = (b_err[m - 1] + eps) * (-lj).exp();
                }
                (f_log, b_log, f_pos, b_pos, f_err, b_err)
            })
            .collect();
        let mut t = OrbitTable {
            fwd: vec![vec![0.0; n]; depth + 1],
            bwd: vec![vec![0.0; n]; depth + 1],
            fwd_pos: vec![vec![0.0; n]; depth + 1],
            bwd_pos: vec![vec![0.0; n]; depth + 1],
            fwd_err: vec![0.0; depth + 1],
            bwd_err: vec![0.0; depth + 1],
        };
        for (i, (fl, bl, fp, bp, fe, be)) in per_node.into_iter().enumerate() {
            for m in 0..=depth {
                t.fwd[m][i] = fl[m];
                t.bwd[m][i] = bl[m];
                t.fwd_pos[m][i] = fp[m];
                t.bwd_pos[m][i] = bp[m];
                t.fwd_err[m] = t.fwd_err[m].max(fe[m]);
                t.bwd_err[m] = t.bwd_err[m].max(be[m]);
            }
        }
        t
    }

    fn depth(&self) -> usize {
        self.fwd.len() - 1
    }

    fn check(&self, nu: i64) -> Result<()> {
        let m = nu.unsigned_abs() as usize;
        let est = if nu >= 0 { self.fwd_err[m] } else { self.bwd_err[m] };
        if est > ORBIT_ERROR_BUDGET {
            Err(TransferError::IterateUnreliable { nu, estimate: est })
        } else {
            Ok(())
        }
    }

    fn log_jacobian(&self, nu: i64) -> &[f64] {
        let m = nu.unsigned_abs() as usize;
        if nu >= 0 {
            &self.fwd[m]
        } else {
            &self.bwd[m]
        }
    }

    fn positions(&self, nu: i64) -> &[f64] {
        let m = nu.unsigned_abs() as usize;
        if nu >= 0 {
            &self.fwd_pos[m]
        } else {
            &self.bwd_pos[m]
        }
    }
}

/// Discretized Perron–Frobenius operator of a return map.
#[derive(Debug, Clone)]
pub struct TransferOperator {
    map: CircleMap,
    source: ReturnMap,
    orbits: OrbitTable,
}

impl TransferOperator {
    /// Builds the operator with orbits precomputed to `depth` iterates in
    /// each direction.
    pub fn new(map: &ReturnMap, depth: usize) -> Result<Self> {
        let circle = CircleMap::new(map)?;
        let orbits = OrbitTable::build(&circle, depth.max(1));
        Ok(TransferOperator {
            map: circle,
            source: map.clone(),
            orbits,
        })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn circle_map(&self) -> &CircleMap {
        &self.map
    }

    pub fn source(&self) -> &ReturnMap {
        &self.source
    }

    pub fn depth(&self) -> usize {
        self.orbits.depth()
    }

    fn spline_of(&self, f: &[f64]) -> Result<PeriodicSpline> {
        if f.len() != self.len() {
            return Err(TransferError::InvalidParameter(format!(
                "grid function of length {} on a grid of {}",
                f.len(),
                self.len()
            )));
        }
        Ok(PeriodicSpline::on_circle(self.map.omega[0], f.to_vec()))
    }

    /// `(U f)(ω_i) = f(η(ω_i)) √J(ω_i)` with `f` interpolated.
    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        let s = self.spline_of(f)?;
        Ok((0..self.len())
            .map(|i| s.eval(self.map.lift[i]) * (0.5 * self.map.log_j[i]).exp())
            .collect())
    }

    /// `U^ν f` through orbit following, for `|ν|` up to the table depth.
    pub fn power_apply(&self, f: &[f64], nu: i64) -> Result<Vec<f64>> {
        self.ensure_depth(nu)?;
        self.orbits.check(nu)?;
        let s = self.spline_of(f)?;
        let pos = self.orbits.positions(nu);
        let lj = self.orbits.log_jacobian(nu);
        Ok((0..self.len()).map(|i| s.eval(pos[i]) * (0.5 * lj[i]).exp()).collect())
    }

    fn ensure_depth(&self, nu: i64) -> Result<()> {
        if nu.unsigned_abs() as usize > self.depth() {
            Err(TransferError::InvalidParameter(format!(
                "|ν| = {} exceeds orbit depth {}",
                nu.abs(),
                self.depth()
            )))
        } else {
            Ok(())
        }
    }

    /// `J^ν` on the grid: `∏_{k<ν} J(η^k ω)` for `ν > 0`, the inverse-branch
    /// product for `ν < 0`, and 1 for `ν = 0`.
    pub fn iterated_jacobian(&self, nu: i64) -> Result<Vec<f64>> {
        self.ensure_depth(nu)?;
        self.orbits.check(nu)?;
        Ok(self.orbits.log_jacobian(nu).iter().map(|v| v.exp()).collect())
    }

    /// `c_ν = ⟨U^ν 1, 1⟩`.
    pub fn correlation(&self, nu: i64) -> Result<f64> {
        let nu = nu.abs();
        let a = (nu + 1) / 2;
        let b = nu - a;
        self.ensure_depth(a)?;
        self.orbits.check(b)?;
        self.orbits.check(-a)?;
        let fwd = self.orbits.log_jacobian(b);
        let bwd = self.orbits.log_jacobian(-a);
        Ok(fwd.iter().zip(bwd).map(|(x, y)| (0.5 * (x + y)).exp()).sum::<f64>() / self.len() as f64)
    }

    /// `⟨U^ν f, g⟩` evaluated as `⟨U^{ν-a} f, U^{-a} g⟩`, `a = ⌈ν/2⌉`.
    pub fn inner_power(&self, f: &[f64], g: &[f64], nu: i64) -> Result<f64> {
        let (f, g, nu) = if nu < 0 { (g, f, -nu) } else { (f, g, nu) };
        let a = (nu + 1) / 2;
        let uf = self.power_apply(f, nu - a)?;
        let ug = self.power_apply(g, -a)?;
        Ok(inner(&uf, &ug))
    }

    /// Ergodic average `B(T) = (2T+1)^{-1} Σ_{|ν|≤T} ∫ √J^ν dμ̄`.
    pub fn ergodic_average_b(&self, t: usize) -> Result<f64> {
        let mut sum = 1.0;
        for nu in 1..=t as i64 {
            sum += 2.0 * self.correlation(nu)?;
        }
        Ok(sum / (2 * t + 1) as f64)
    }

    /// Cesàro average `S_T f` on the grid together with `‖S_T f‖₂`
    /// computed from the correlations `⟨U^k f, f⟩`.
    pub fn mean_ergodic(&self, f: &[f64], t: usize) -> Result<ErgodicAverage> {
        let mut values = vec![0.0; self.len()];
        for nu in -(t as i64)..=(t as i64) {
            let u = self.power_apply(f, nu)?;
            values.iter_mut().zip(&u).for_each(|(v, x)| *v += x);
        }
        let w = 1.0 / (2 * t + 1) as f64;
        values.iter_mut().for_each(|v| *v *= w);
        let mut sq = (2 * t + 1) as f64 * inner(f, f);
        for k in 1..=(2 * t) as i64 {
            sq += 2.0 * ((2 * t + 1) as f64 - k as f64) * self.inner_power(f, f, k)?;
        }
        let norm = (sq.max(0.0)).sqrt() * w;
        let mean_with_one = {
            let one = vec![1.0; self.len()];
            let mut acc = 0.0;
            for nu in -(t as i64)..=(t as i64) {
                acc += self.inner_power(f, &one, nu)?;
            }
            acc * w
        };
        Ok(ErgodicAverage {
            values,
            norm,
            inner_with_one: mean_with_one,
        })
    }

    /// Hopf-type estimate: fraction of grid orbits that enter the
    /// `radius`-neighbourhood of a sink within `steps` forward iterates.
    pub fn dissipative_mass(&self, sinks: &[f64], steps: usize, radius: f64) -> f64 {
        if sinks.is_empty() {
            return 0.0;
        }
        let hits = (0..self.len())
            .into_par_iter()
            .filter(|&i| {
                let mut x = self.map.omega[i];
                for _ in 0..=steps {
                    if sinks.iter().any(|s| circle_dist(x, *s) < radius) {
                        return true;
                    }
                    x = self.map.eta(x);
                }
                false
            })
            .count();
        hits as f64 / self.len() as f64
    }
}

/// `∫ f g dμ̄` by the trapezoid rule.
pub fn inner(f: &[f64], g: &[f64]) -> f64 {
    f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>() / f.len() as f64
}

pub fn norm(f: &[f64]) -> f64 {
    inner(f, f).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicAverage {
    pub values: Vec<f64>,
    pub norm: f64,
    pub inner_with_one: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FixedPointType {
    Source,
    Sink,
    Neutral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub angle: f64,
    pub multiplier: f64,
    pub kind: FixedPointType,
}

/// Fixed points of the map by sign changes of the displacement and
/// bisection; the multiplier is `J` at the root.
pub fn fixed_points(map: &ReturnMap, tol: f64) -> Result<Vec<FixedPoint>> {
    if map.sup_deviation() < 1e-6 {
        return Err(TransferError::IdentityMap);
    }
    let circle = CircleMap::new(map)?;
    Ok(circle
        .displacement_roots()
        .into_iter()
        .map(|angle| {
            let multiplier = circle.jacobian(angle);
            let kind = if multiplier < 1.0 - tol {
                FixedPointType::Sink
            } else if multiplier > 1.0 + tol {
                FixedPointType::Source
            } else {
                FixedPointType::Neutral
            };
            FixedPoint { angle, multiplier, kind }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErgodicVerdict {
    DissipativeFor1,
    InvariantMassPresent,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictThresholds {
    pub decay: f64,
    pub presence: f64,
    pub fixed_point_tol: f64,
}

impl Default for VerdictThresholds {
    fn default() -> Self {
        VerdictThresholds {
            decay: 0.05,
            presence: 0.5,
            fixed_point_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErgodicReport {
    pub t: Vec<usize>,
    pub b: Vec<f64>,
    pub s_norm: Vec<f64>,
    pub identity: bool,
    pub fixed_points: Vec<FixedPoint>,
    pub dissipative_mass: f64,
    /// Least-squares slope of `B` over the upper half of the `T` range.
    pub trend: f64,
    pub verdict: ErgodicVerdict,
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Computes `B(T)` and `‖S_T 1‖₂` for `T = 0..=t_max` and classifies.
///
/// `DissipativeFor1` requires `B(T_max)` and `‖S_T 1‖₂²` below the decay
/// threshold with a negative trend; both quantities converge to `⟨Π1, 1⟩`.
/// `InvariantMassPresent` requires `B` above the presence threshold over
/// the upper half of the range.
pub fn dissipativity_verdict(map: &ReturnMap, t_max: usize, th: &VerdictThresholds) -> Result<ErgodicReport> {
    if t_max == 0 {
        return Err(TransferError::InvalidParameter("T_max must be positive".into()));
    }
    let op = TransferOperator::new(map, t_max)?;
    let corr: Vec<f64> = (0..=(2 * t_max) as i64).map(|k| op.correlation(k)).collect::<Result<_>>()?;
    let mut b = Vec::with_capacity(t_max + 1);
    let mut s_norm = Vec::with_capacity(t_max + 1);
    for t in 0..=t_max {
        let m = (2 * t + 1) as f64;
        b.push((corr[0] + 2.0 * corr[1..=t].iter().sum::<f64>()) / m);
        let mut sq = m * corr[0];
        for (k, c) in corr.iter().enumerate().take(2 * t + 1).skip(1) {
            sq += 2.0 * (m - k as f64) * c;
        }
        s_norm.push(sq.max(0.0).sqrt() / m);
    }
    let (identity, fps) = match fixed_points(map, th.fixed_point_tol) {
        Ok(f) => (false, f),
        Err(TransferError::IdentityMap) => (true, Vec::new()),
        Err(e) => return Err(e),
    };
    let sinks: Vec<f64> = fps.iter().filter(|f| f.kind == FixedPointType::Sink).map(|f| f.angle).collect();
    let dissipative_mass = op.dissipative_mass(&sinks, t_max, 1e-3);
    let half = t_max / 2;
    let ts: Vec<f64> = (half..=t_max).map(|t| t as f64).collect();
    let trend = slope(&ts, &b[half..]);
    let last_b = b[t_max];
    let last_s = s_norm[t_max];
    let verdict = if last_b < th.decay && last_s * last_s < th.decay && trend < 0.0 {
        ErgodicVerdict::DissipativeFor1
    } else if b[half..].iter().all(|v| *v > th.presence) {
        ErgodicVerdict::InvariantMassPresent
    } else {
        ErgodicVerdict::Inconclusive
    };
    Ok(ErgodicReport {
        t: (0..=t_max).collect(),
        b,
        s_norm,
        identity,
        fixed_points: fps,
        dissipative_mass,
        trend,
        verdict,
    })
}

impl ErgodicReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// CSV with columns `T,B,S_norm`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "T,B,S_norm")?;
        for i in 0..self.t.len() {
            writeln!(
                out,
                "{},{},{}",
                self.t[i],
                crate::fmt_float(self.b[i]),
                crate::fmt_float(self.s_norm[i])
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_fn(n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
        crate::focal::direction_grid(n).into_iter().map(f).collect()
    }

    #[test]
    fn identity_and_rotation_are_trivial() {
        let id = ReturnMap::identity(128);
        let op = TransferOperator::new(&id, 5).unwrap();
        let f = grid_fn(128, |w| w.cos() + 0.3);
        let uf = op.apply(&f).unwrap();
        assert!(uf.iter().zip(&f).all(|(a, b)| (a - b).abs() < 1e-12));
        assert!((op.ergodic_average_b(5).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(fixed_points(&id, 1e-6), Err(TransferError::IdentityMap)));
        let rot = ReturnMap::rotation(128, 1.0);
        let op = TransferOperator::new(&rot, 5).unwrap();
        let one = vec![1.0; 128];
        assert!(op.apply(&one).unwrap().iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(fixed_points(&rot, 1e-6).unwrap().is_empty());
    }

    #[test]
    fn sine_map_basics() {
        let n = 512;
        let m = ReturnMap::sine_map(n, 0.5);
        let op = TransferOperator::new(&m, 4).unwrap();
        let one = vec![1.0; n];
        let u1 = op.apply(&one).unwrap();
        for (u, w) in u1.iter().zip(crate::focal::direction_grid(n)) {
            assert!((u - (1.0 + 0.5 * w.cos()).sqrt()).abs() < 1e-12);
        }
        let j2 = op.iterated_jacobian(2).unwrap();
        for (j, w) in j2.iter().zip(crate::focal::direction_grid(n)) {
            let e = w + 0.5 * w.sin();
            let exact = (1.0 + 0.5 * w.cos()) * (1.0 + 0.5 * e.cos());
            assert!((j - exact).abs() < 1e-6);
        }
        let fps = fixed_points(&m, 1e-6).unwrap();
        assert_eq!(fps.len(), 2);
        let source = fps.iter().find(|f| f.kind == FixedPointType::Source).unwrap();
        let sink = fps.iter().find(|f| f.kind == FixedPointType::Sink).unwrap();
        assert!(circle_dist(source.angle, 0.0) < 1e-9);
        assert!((source.multiplier - 1.5).abs() < 1e-6);
        assert!(circle_dist(sink.angle, std::f64::consts::PI) < 1e-9);
        assert!((sink.multiplier - 0.5).abs() < 1e-6);
    }

    #[test]
    fn consistency_of_b_and_cesaro_mean() {
        let n = 256;
        let m = ReturnMap::sine_map(n, 0.5);
        let op = TransferOperator::new(&m, 10).unwrap();
        let one = vec![1.0; n];
        for t in [0usize, 1, 3, 5] {
            let b = op.ergodic_average_b(t).unwrap();
            let avg = op.mean_ergodic(&one, t).unwrap();
            assert!((b - avg.inner_with_one).abs() < 1e-6);
            assert!((0.0..=1.0).contains(&b));
        }
    }
}
