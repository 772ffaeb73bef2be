//! Window function `ρ(s) = sinc⁴(s/4)` and coherent states
//! `ψ(x) = λ^{-1/2} Σ ρ(T(λ - λ_j)) e_j(x) e_j(x₀)`.
//!
//! Convention: `ρ(s) = ∫ ρ̂(t) e^{ist} dt`, so `ρ̂` is the fourfold
//! self-convolution of `2·1_{|t| ≤ 1/4}`, a cubic B-spline supported in
//! `[-1, 1]` with `ρ̂(0) = 4/3`.

use crate::numerics::roots::bisect;
use crate::spectral::{local_weyl_constant, Mesh, Result, SpectralError, SpectrumTable};
use crate::surfaces::ChartPoint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowFunction {
    /// Positive root of `ρ(s) = 1/2`.
    pub delta_rho: f64,
    /// `ρ̂` vanishes outside `[-support, support]`.
    pub support: f64,
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

impl WindowFunction {
    pub fn rho(&self, s: f64) -> f64 {
        sinc(0.25 * s).powi(4)
    }

    pub fn rho_hat(&self, t: f64) -> f64 {
        let x = (2.0 * t).abs();
        let b = if x <= 1.0 {
            (4.0 - 6.0 * x * x + 3.0 * x * x * x) / 6.0
        } else if x <= 2.0 {
            (2.0 - x).powi(3) / 6.0
        } else {
            0.0
        };
        2.0 * b
    }

    /// Monotone majorant `min(1, 256/s⁴)` of `ρ`.
    pub fn envelope(&self, s: f64) -> f64 {
        let s4 = s.powi(4);
        if s4 <= 256.0 {
            1.0
        } else {
            256.0 / s4
        }
    }
}

pub fn make_rho() -> WindowFunction {
    let probe = WindowFunction {
        delta_rho: 0.0,
        support: 1.0,
    };
    let delta_rho = bisect(|s| probe.rho(s) - 0.5, 0.0, 4.0 * PI - 1e-9, 1e-13).expect("bracketed root");
    WindowFunction {
        delta_rho,
        support: 1.0,
    }
}

/// Windows of unit length above the table's top frequency:
/// `Σ_{i ≥ 0} C (1 + μ_i) g(μ_i)` with `μ_i = start + i`, where `g` is
/// nonincreasing on `[start, ∞)` and `μ g(μ)` decays at least like `μ^{-3}`.
pub fn weyl_tail<G: Fn(f64) -> f64>(c: f64, start: f64, g: G) -> f64 {
    const WINDOWS: usize = 100_000;
    let mut sum = 0.0;
    let mut last = 0.0;
    for i in 0..WINDOWS {
        let mu = start + i as f64;
        last = c * (1.0 + mu) * g(mu);
        sum += last;
    }
    sum + last * (start + WINDOWS as f64) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBounds {
    pub weyl_constant: f64,
    pub l2_sq: f64,
    pub residual_sq: f64,
    pub peak: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherentState {
    pub base: ChartPoint,
    pub lambda: f64,
    pub t: f64,
    pub frequencies: Vec<f64>,
    /// `e_j(x₀)` per table mode.
    pub base_values: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub tails: TailBounds,
}

/// Frequency offset beyond which coefficients must be negligible.
pub const DECAY_CUTOFF: f64 = 400.0;

/// Tail certificates must stay below this fraction of the computed value.
pub const TAIL_FRACTION: f64 = 0.05;

pub fn coherent_state(table: &SpectrumTable, rho: &WindowFunction, x0: &ChartPoint, lambda: f64, t: f64) -> Result<CoherentState> {
    if !(lambda > 0.0 && lambda <= 0.8 * table.lambda_max) {
        return Err(SpectralError::InvalidParameter(format!(
            "λ = {lambda} must lie in (0, 0.8 λ_max]"
        )));
    }
    if !(t >= 1.0) {
        return Err(SpectralError::InvalidParameter(format!("T = {t} must be ≥ 1")));
    }
    let base_values = table.values_at(x0)?;
    let frequencies = table.frequencies();
    let scale = lambda.powf(-0.5);
    let coefficients: Vec<f64> = frequencies
        .iter()
        .zip(&base_values)
        .map(|(lj, e)| scale * rho.rho(t * (lambda - lj)) * e)
        .collect();
    let c = local_weyl_constant(table, x0)?;
    let start = table.lambda_max;
    let env = |mu: f64| rho.envelope(t * (mu - lambda));
    let tails = TailBounds {
        weyl_constant: c,
        l2_sq: weyl_tail(c, start, |mu| env(mu).powi(2)) / lambda,
        residual_sq: weyl_tail(c, start, |mu| ((mu + 1.0).powi(2) - lambda * lambda).powi(2) * env(mu).powi(2)) / lambda,
        peak: weyl_tail(c, start, env) * scale,
    };
    let state = CoherentState {
        base: *x0,
        lambda,
        t,
        frequencies,
        base_values,
        coefficients,
        tails,
    };
    let l2 = state.l2_norm();
    if tails.l2_sq.sqrt() > TAIL_FRACTION * l2 {
        return Err(SpectralError::InsufficientRange {
            tail: tails.l2_sq.sqrt(),
            main: l2,
        });
    }
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormAndResidual {
    pub l2_norm: f64,
    pub residual: f64,
    /// Upper bounds on the truncated-spectrum contributions to each norm.
    pub l2_tail: f64,
    pub residual_tail: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub value: f64,
    pub tail: f64,
}

impl CoherentState {
    pub fn l2_norm(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// All coefficients with `|λ - λ_j| > 400/T` are below `1e-8 max|c_j|`.
    pub fn decay_sane(&self) -> bool {
        let max = self.coefficients.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        self.coefficients.iter().all(|c| c.is_finite())
            && self
                .frequencies
                .iter()
                .zip(&self.coefficients)
                .filter(|(l, _)| (self.lambda - **l).abs() > DECAY_CUTOFF / self.t)
                .all(|(_, c)| c.abs() <= 1e-8 * max)
    }

    /// Value of `ψ` at each mesh point.
    pub fn synthesize(&self, table: &SpectrumTable, mesh: &Mesh) -> Result<Vec<f64>> {
        let nz: Vec<usize> = (0..self.coefficients.len())
            .filter(|&j| self.coefficients[j] != 0.0)
            .collect();
        let lo = nz.first().copied().unwrap_or(0);
        let hi = nz.last().map(|j| j + 1).unwrap_or(0);
        mesh.points
            .par_iter()
            .map(|p| {
                let v = table.values_in(p, lo..hi)?;
                Ok(v.iter().zip(&self.coefficients[lo..hi]).map(|(a, b)| a * b).sum())
            })
            .collect()
    }

    /// `{λ, T, l2, residual, peak, tails}` as JSON.
    pub fn summary_json(&self) -> String {
        let nr = l2_and_residual(self);
        let pk = peak_value(self);
        serde_json::to_string_pretty(&serde_json::json!({
            "lambda": self.lambda,
            "t": self.t,
            "base": self.base,
            "l2": nr.l2_norm,
            "residual": nr.residual,
            "peak": pk.value,
            "tails": {
                "l2": nr.l2_tail,
                "residual": nr.residual_tail,
                "peak": pk.tail,
                "weyl_constant": self.tails.weyl_constant,
            },
        }))
        .expect("serializable")
    }
}

pub fn l2_and_residual(state: &CoherentState) -> NormAndResidual {
    let l2 = state.lambda * state.lambda;
    let res_sq: f64 = state
        .frequencies
        .iter()
        .zip(&state.coefficients)
        .map(|(lj, c)| ((l2 - lj * lj) * c).powi(2))
        .sum();
    NormAndResidual {
        l2_norm: state.l2_norm(),
        residual: res_sq.sqrt(),
        l2_tail: state.tails.l2_sq.sqrt(),
        residual_tail: state.tails.residual_sq.sqrt(),
    }
}

/// `ψ(x₀) = λ^{-1/2} Σ ρ(T(λ - λ_j)) e_j(x₀)²`.
pub fn peak_value(state: &CoherentState) -> Peak {
    Peak {
        value: state.coefficients.iter().zip(&state.base_values).map(|(c, e)| c * e).sum(),
        tail: state.tails.peak,
    }
}

/// CSV of `ψ` over a mesh with columns `chart,c1,c2,c3,psi`.
pub fn write_synthesis_csv<W: Write>(mesh: &Mesh, values: &[f64], mut out: W) -> std::io::Result<()> {
    writeln!(out, "chart,c1,c2,c3,psi")?;
    for (p, v) in mesh.points.iter().zip(values) {
        let (chart, c) = match *p {
            ChartPoint::Planar { x, y } => ("planar", [x, y, 0.0]),
            ChartPoint::Polar { r, theta } => ("polar", [r, theta, 0.0]),
            ChartPoint::Ambient { p } => ("ambient", p),
        };
        writeln!(
            out,
            "{chart},{},{},{},{}",
            crate::fmt_float(c[0]),
            crate::fmt_float(c[1]),
            crate::fmt_float(c[2]),
            crate::fmt_float(*v)
        )?;
    }
    Ok(())
}
