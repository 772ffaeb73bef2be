//! Geodesic loops through a point, first return maps at self-focal points,
//! and the non-focal / pole / twisted classification.

use crate::geoflow::{DirectionFrame, FlowError, FlowState, StepPolicy};
use crate::numerics::roots::golden_min;
use crate::numerics::{circle_dist, unwrap, wrap_tau};
use crate::surfaces::{ChartPoint, SurfaceError, SurfaceModel};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

/// Offset of the direction grid `ω_i = GRID_PHASE + 2πi/N`. Irrational in
/// units of `2π/N` for every `N`, so no node sits on a symmetry axis, while
/// the `N` grid stays a subset of the `2N` grid.
pub const GRID_PHASE: f64 = 0.004_142_135_623_730_951;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FocalError {
    #[error("direction {index}: {source}")]
    Flow { index: usize, source: FlowError },
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("not self-focal at this horizon: loop fraction {0}")]
    NotSelfFocal(f64),
    #[error("no common return time: dispersion {dispersion:e} vs ℓ = {ell}")]
    NoCommonReturnTime { dispersion: f64, ell: f64 },
    #[error("return map not a homeomorphism at this resolution (node {0})")]
    NotHomeomorphism(usize),
}

pub type Result<T> = std::result::Result<T, FocalError>;

pub fn direction_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| GRID_PHASE + TAU * i as f64 / n as f64).collect()
}

/// A detected return to the base point.
#[derive(Debug, Clone, Copy)]
pub struct LoopEvent {
    pub t: f64,
    pub distance: f64,
    pub state: FlowState,
}

/// Follows the geodesic in direction `ω` up to `horizon` and reports every
/// return within `tol` of the base point. Sampled distances are watched for
/// local minima below a capture radius, which are then refined by
/// golden-section search over single integrator sub-steps.
pub fn trace_loops(frame: &DirectionFrame, omega: f64, horizon: f64, tol: f64, first_only: bool) -> std::result::Result<Vec<LoopEvent>, FlowError> {
    let sys = *frame.system();
    let h = sys.policy().h;
    let capture = 3.0 * h + 10.0 * tol;
    let n = (horizon / h).ceil() as usize;
    let mut events = Vec::new();
    let mut armed = false;
    let mut s = frame.state(omega);
    // (t, state, distance) at the two previous samples
    let mut older: Option<(f64, FlowState, f64)> = None;
    let mut prev = (0.0, s, 0.0);
    for k in 1..=n {
        let (next, _) = sys.step(&s, h);
        let t = h * k as f64;
        if !next.iter().all(|v| v.is_finite()) {
            return Err(FlowError::IntegrationFailure {
                t,
                location: format!("direction {omega}"),
            });
        }
        let d = frame.distance(&next);
        if !armed && d > 2.0 * capture {
            armed = true;
        }
        if let Some((t0, s0, d0)) = older {
            if armed && prev.2 <= d0 && prev.2 <= d && prev.2 < capture {
                let (tau, m) = golden_min(|tau| frame.distance(&sys.step(&s0, tau).0), 0.0, 2.0 * h, 1e-13);
                if m < tol {
                    events.push(LoopEvent {
                        t: t0 + tau,
                        distance: m,
                        state: sys.step(&s0, tau).0,
                    });
                    if first_only {
                        return Ok(events);
                    }
                }
                armed = false;
            }
        }
        older = Some(prev);
        prev = (t, next, d);
        s = next;
    }
    Ok(events)
}

/// Loop statistics of a direction sweep at a base point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopScan {
    pub base: ChartPoint,
    pub n: usize,
    pub horizon: f64,
    pub tol: f64,
    pub omega: Vec<f64>,
    /// First loop time per direction, `None` if no loop within the horizon.
    pub first_loop: Vec<Option<f64>>,
    pub loop_fraction: f64,
}

fn check_scan_params(horizon: f64, n: usize, tol: f64) -> Result<()> {
    if !(horizon > 0.0) || n < 64 || !(tol > 0.0) {
        return Err(FocalError::InvalidParameter(format!(
            "need T_max > 0, N >= 64, tol > 0 (got {horizon}, {n}, {tol})"
        )));
    }
    Ok(())
}

/// Sweeps `n` directions at `x` and records the first loop of each.
pub fn scan_loops(surface: &SurfaceModel, x: ChartPoint, horizon: f64, n: usize, tol: f64, policy: StepPolicy) -> Result<LoopScan> {
    check_scan_params(horizon, n, tol)?;
    let frame = DirectionFrame::new(surface, x, policy).map_err(|e| FocalError::Flow { index: 0, source: e })?;
    let omega = direction_grid(n);
    let first_loop: Vec<Option<f64>> = omega
        .par_iter()
        .enumerate()
        .map(|(i, &w)| {
            trace_loops(&frame, w, horizon, tol, true)
                .map(|ev| ev.first().map(|e| e.t))
                .map_err(|e| FocalError::Flow { index: i, source: e })
        })
        .collect::<Result<_>>()?;
    let count = first_loop.iter().filter(|t| t.is_some()).count();
    Ok(LoopScan {
        base: x,
        n,
        horizon,
        tol,
        omega,
        loop_fraction: count as f64 / n as f64,
        first_loop,
    })
}

/// Tabulated first return map on a uniform direction grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnMap {
    pub surface_hash: String,
    pub base: Option<ChartPoint>,
    pub ell: f64,
    pub n: usize,
    pub omega: Vec<f64>,
    pub eta: Vec<f64>,
    pub jacobian: Vec<f64>,
    pub tol: f64,
    /// Standard deviation of the per-direction return times.
    pub dispersion: f64,
    /// Nodes whose first loop came strictly before `ℓ`.
    pub sub_focal: Vec<usize>,
    /// Largest relative gap between `J` and centred differences of `η`.
    pub fd_max_rel_diff: f64,
}

/// Options of [`extract_return_map`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractOptions {
    pub n: usize,
    pub tol: f64,
    pub horizon: f64,
    pub dispersion: f64,
    pub self_focal: f64,
    pub policy: StepPolicy,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            n: 256,
            tol: 1e-4,
            horizon: 30.0,
            dispersion: 1e-3,
            self_focal: 0.99,
            policy: StepPolicy::default(),
        }
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Extracts `η`, `J` and the common return time `ℓ` at a self-focal point.
pub fn extract_return_map(surface: &SurfaceModel, x: ChartPoint, opts: &ExtractOptions) -> Result<ReturnMap> {
    check_scan_params(opts.horizon, opts.n, opts.tol)?;
    let frame = DirectionFrame::new(surface, x, opts.policy).map_err(|e| FocalError::Flow { index: 0, source: e })?;
    let omega = direction_grid(opts.n);
    let loops: Vec<Vec<LoopEvent>> = omega
        .par_iter()
        .enumerate()
        .map(|(i, &w)| trace_loops(&frame, w, opts.horizon, opts.tol, false).map_err(|e| FocalError::Flow { index: i, source: e }))
        .collect::<Result<_>>()?;
    let mut firsts: Vec<f64> = loops.iter().filter_map(|ev| ev.first().map(|e| e.t)).collect();
    let fraction = firsts.len() as f64 / opts.n as f64;
    if fraction < opts.self_focal {
        return Err(FocalError::NotSelfFocal(fraction));
    }
    let ell = median(&mut firsts);
    let mut chosen = Vec::with_capacity(opts.n);
    let mut sub_focal = Vec::new();
    for (i, ev) in loops.iter().enumerate() {
        let best = ev
            .iter()
            .min_by(|a, b| (a.t - ell).abs().partial_cmp(&(b.t - ell).abs()).expect("finite"))
            .ok_or(FocalError::NotSelfFocal(fraction))?;
        if ev[0].t < ell * (1.0 - opts.dispersion) {
            sub_focal.push(i);
        }
        chosen.push(*best);
    }
    let mean = chosen.iter().map(|e| e.t).sum::<f64>() / opts.n as f64;
    let dispersion = (chosen.iter().map(|e| (e.t - mean).powi(2)).sum::<f64>() / opts.n as f64).sqrt();
    if dispersion >= opts.dispersion * ell {
        return Err(FocalError::NoCommonReturnTime { dispersion, ell });
    }
    let eta: Vec<f64> = chosen.iter().map(|e| frame.angle(&e.state)).collect();
    let jacobian: Vec<f64> = chosen.iter().map(|e| e.state[9].abs()).collect();
    let mut map = ReturnMap {
        surface_hash: crate::content_hash(surface),
        base: Some(x),
        ell,
        n: opts.n,
        omega,
        eta,
        jacobian,
        tol: opts.tol,
        dispersion,
        sub_focal,
        fd_max_rel_diff: 0.0,
    };
    map.validate()?;
    map.fd_max_rel_diff = map.finite_difference_gap();
    Ok(map)
}

impl ReturnMap {
    /// Map sampled from closed forms `η(ω)` and `η'(ω)` on the standard grid.
    pub fn analytic<E: Fn(f64) -> f64, D: Fn(f64) -> f64>(n: usize, eta: E, deriv: D) -> Self {
        let omega = direction_grid(n);
        ReturnMap {
            surface_hash: String::new(),
            base: None,
            ell: 1.0,
            n,
            eta: omega.iter().map(|&w| wrap_tau(eta(w))).collect(),
            jacobian: omega.iter().map(|&w| deriv(w).abs()).collect(),
            omega,
            tol: 0.0,
            dispersion: 0.0,
            sub_focal: Vec::new(),
            fd_max_rel_diff: 0.0,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::analytic(n, |w| w, |_| 1.0)
    }

    pub fn rotation(n: usize, alpha: f64) -> Self {
        Self::analytic(n, move |w| w + alpha, |_| 1.0)
    }

    /// `η(ω) = ω + ε sin ω`, a circle diffeomorphism for `|ε| < 1`.
    pub fn sine_map(n: usize, eps: f64) -> Self {
        Self::analytic(n, move |w| w + eps * w.sin(), move |w| 1.0 + eps * w.cos())
    }

    /// Grid spacing `2π/N`.
    pub fn spacing(&self) -> f64 {
        TAU / self.n as f64
    }

    /// Lift of `η` with `lift[i] - ω_i` continuous in `i`.
    pub fn lift(&self) -> Vec<f64> {
        let first = self.omega[0] + crate::numerics::wrap_pi(self.eta[0] - self.omega[0]);
        let mut raw = unwrap(&self.eta);
        let shift = first - raw[0];
        raw.iter_mut().for_each(|v| *v += shift);
        raw
    }

    /// Checks positivity of `J`, strict monotonicity of the lift and a total
    /// winding of one turn.
    pub fn validate(&self) -> Result<()> {
        if self.eta.len() != self.n || self.jacobian.len() != self.n || self.omega.len() != self.n {
            return Err(FocalError::InvalidParameter("array lengths differ from N".into()));
        }
        if let Some(i) = self.jacobian.iter().position(|j| !(*j > 0.0)) {
            return Err(FocalError::NotHomeomorphism(i));
        }
        let lift = self.lift();
        for i in 0..self.n {
            let next = if i + 1 < self.n { lift[i + 1] } else { lift[0] + TAU };
            if !(next > lift[i]) {
                return Err(FocalError::NotHomeomorphism(i));
            }
        }
        let winding = lift[self.n - 1] - lift[0] + crate::numerics::wrap_pi(lift[0] + TAU - lift[self.n - 1]);
        if (winding - TAU).abs() > 1e-9 {
            return Err(FocalError::NotHomeomorphism(self.n - 1));
        }
        Ok(())
    }

    /// Largest relative gap between `J` and centred differences of the lift.
    pub fn finite_difference_gap(&self) -> f64 {
        let lift = self.lift();
        let n = self.n;
        let h = self.spacing();
        (0..n)
            .map(|i| {
                let up = if i + 1 < n { lift[i + 1] } else { lift[0] + TAU };
                let down = if i > 0 { lift[i - 1] } else { lift[n - 1] - TAU };
                let fd = (up - down) / (2.0 * h);
                (fd - self.jacobian[i]).abs() / self.jacobian[i]
            })
            .fold(0.0, f64::max)
    }

    /// `sup_i |η(ω_i) - ω_i|` in the circle metric.
    pub fn sup_deviation(&self) -> f64 {
        self.omega
            .iter()
            .zip(&self.eta)
            .map(|(w, e)| circle_dist(*w, *e))
            .fold(0.0, f64::max)
    }

    /// `|mean_i h(η_i) J_i - mean_i h(ω_i)|`, the pushforward defect for a
    /// test function `h` under the normalized measure.
    pub fn pushforward_defect<H: Fn(f64) -> f64>(&self, h: H) -> f64 {
        let lhs: f64 = self.eta.iter().zip(&self.jacobian).map(|(e, j)| h(*e) * j).sum::<f64>() / self.n as f64;
        let rhs: f64 = self.omega.iter().map(|w| h(*w)).sum::<f64>() / self.n as f64;
        (lhs - rhs).abs()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    NonFocal,
    Pole,
    Twisted,
    Ambiguous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub non_focal: f64,
    pub self_focal: f64,
    pub pole: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            non_focal: 0.05,
            self_focal: 0.99,
            pole: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocalClass {
    pub verdict: Verdict,
    pub loop_fraction: f64,
    pub sup_deviation: Option<f64>,
}

/// Applies the loop-fraction and identity-distance thresholds. A
/// self-focal scan without a map is reported as ambiguous.
pub fn classify_point(scan: &LoopScan, map: Option<&ReturnMap>, th: &Thresholds) -> FocalClass {
    let f = scan.loop_fraction;
    let sup = map.map(|m| m.sup_deviation());
    let verdict = if f < th.non_focal {
        Verdict::NonFocal
    } else if f >= th.self_focal {
        match sup {
            Some(s) if s < th.pole => Verdict::Pole,
            Some(_) => Verdict::Twisted,
            None => Verdict::Ambiguous,
        }
    } else {
        Verdict::Ambiguous
    };
    FocalClass {
        verdict,
        loop_fraction: f,
        sup_deviation: sup,
    }
}
