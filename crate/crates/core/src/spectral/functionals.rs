//! Pointwise spectral sums: window masses, projector norms, smoothed sums,
//! local Weyl ratios, scaled sup norms and the cluster-center sequence.

use super::{Mesh, Result, SpectralError, SpectrumTable};
use crate::quasimode::{weyl_tail, WindowFunction};
use crate::surfaces::ChartPoint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::io::Write;

fn check_window(table: &SpectrumTable, lo: f64, hi: f64) -> Result<()> {
    if hi > table.lambda_max {
        return Err(SpectralError::WindowExceedsTable {
            lo,
            hi,
            lambda_max: table.lambda_max,
        });
    }
    Ok(())
}

fn squares_in(table: &SpectrumTable, y: &ChartPoint, lo: f64, hi: f64) -> Result<f64> {
    let r = table.range(lo, hi);
    Ok(table.values_in(y, r)?.iter().map(|v| v * v).sum())
}

/// `Σ_{|λ_j - λ| ≤ δ} e_j(y)²`.
pub fn window_mass(table: &SpectrumTable, y: &ChartPoint, lambda: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(SpectralError::InvalidParameter(format!("δ = {delta} must be positive")));
    }
    check_window(table, lambda - delta, lambda + delta)?;
    squares_in(table, y, lambda - delta, lambda + delta)
}

/// `Σ_{λ_j ∈ [λ, λ + δ]} e_j(y)²`.
pub fn window_mass_one_sided(table: &SpectrumTable, y: &ChartPoint, lambda: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(SpectralError::InvalidParameter(format!("δ = {delta} must be positive")));
    }
    check_window(table, lambda, lambda + delta)?;
    squares_in(table, y, lambda, lambda + delta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectorNorm {
    pub value: f64,
    pub argmax: ChartPoint,
}

/// Max over the mesh of the one-sided window mass on `[λ, λ + δ]`.
pub fn projector_norm(table: &SpectrumTable, lambda: f64, delta: f64, mesh: &Mesh) -> Result<ProjectorNorm> {
    if !(delta > 0.0) {
        return Err(SpectralError::InvalidParameter(format!("δ = {delta} must be positive")));
    }
    check_window(table, lambda, lambda + delta)?;
    if mesh.is_empty() {
        return Err(SpectralError::InvalidParameter("empty mesh".into()));
    }
    let masses: Vec<f64> = mesh
        .points
        .par_iter()
        .map(|p| squares_in(table, p, lambda, lambda + delta))
        .collect::<Result<_>>()?;
    let (i, value) = masses
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, v)| if *v > bv { (i, *v) } else { (bi, bv) });
    Ok(ProjectorNorm {
        value,
        argmax: mesh.points[i],
    })
}

/// Constant `C` in `Σ_{λ_j ∈ [μ, μ+1)} e_j(y)² ≤ C (1 + μ)`, calibrated on
/// every unit window the table covers.
pub fn local_weyl_constant(table: &SpectrumTable, y: &ChartPoint) -> Result<f64> {
    let values = table.values_at(y)?;
    let windows = table.lambda_max.floor().max(1.0) as usize;
    let mut sums = vec![0.0; windows];
    for (m, v) in table.modes.iter().zip(&values) {
        let w = m.lambda.floor() as usize;
        if w < windows {
            sums[w] += v * v;
        }
    }
    Ok(sums
        .iter()
        .enumerate()
        .map(|(mu, s)| s / (1.0 + mu as f64))
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothedSum {
    pub main: f64,
    /// Upper bound for frequencies above the table.
    pub tail: f64,
}

/// Allowed tail bound relative to the main smoothed sum.
pub const SMOOTHED_TAIL_FRACTION: f64 = 0.1;

/// `Σ_j ρ(T(λ - λ_j)) e_j(y)²` with a Weyl-law bound for the modes above
/// `λ_max`.
pub fn smoothed_sum(table: &SpectrumTable, rho: &WindowFunction, t: f64, lambda: f64, y: &ChartPoint) -> Result<SmoothedSum> {
    if !(t > 0.0) {
        return Err(SpectralError::InvalidParameter(format!("T = {t} must be positive")));
    }
    if !(lambda >= 0.0 && lambda <= 0.8 * table.lambda_max) {
        return Err(SpectralError::InvalidParameter(format!(
            "λ = {lambda} must lie in [0, 0.8 λ_max]"
        )));
    }
    let values = table.values_at(y)?;
    let main: f64 = table
        .modes
        .iter()
        .zip(&values)
        .map(|(m, v)| rho.rho(t * (lambda - m.lambda)) * v * v)
        .sum();
    let c = local_weyl_constant(table, y)?;
    let tail = weyl_tail(c, table.lambda_max, |mu| rho.envelope(t * (mu - lambda)));
    if tail > SMOOTHED_TAIL_FRACTION * main {
        return Err(SpectralError::InsufficientRange { tail, main });
    }
    Ok(SmoothedSum { main, tail })
}

/// `Σ_{λ_j ≤ λ} e_j(y)² / (λ²/4π)`.
pub fn local_weyl_check(table: &SpectrumTable, y: &ChartPoint, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda <= 0.9 * table.lambda_max) {
        return Err(SpectralError::InvalidParameter(format!(
            "λ = {lambda} must lie in (0, 0.9 λ_max]"
        )));
    }
    let n = table.count_below(lambda);
    let sum: f64 = table.values_in(y, 0..n)?.iter().map(|v| v * v).sum();
    Ok(sum / (lambda * lambda / (4.0 * PI)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupRecord {
    pub index: usize,
    pub lambda: f64,
    /// `λ_j^{-1/2} max |e_j|` over the mesh.
    pub scaled: f64,
    pub argmax: ChartPoint,
}

/// Scaled sup norms of the selected modes over a mesh.
pub fn sup_norm_scaling<F>(table: &SpectrumTable, mesh: &Mesh, select: F) -> Result<Vec<SupRecord>>
where
    F: Fn(usize, &super::EigenMode) -> bool,
{
    let chosen: Vec<usize> = table
        .modes
        .iter()
        .enumerate()
        .filter(|(j, m)| m.lambda > 0.0 && select(*j, m))
        .map(|(j, _)| j)
        .collect();
    if chosen.is_empty() || mesh.is_empty() {
        return Ok(Vec::new());
    }
    let lo = chosen[0];
    let hi = chosen[chosen.len() - 1] + 1;
    let init = || (vec![0.0f64; hi - lo], vec![0usize; hi - lo]);
    let (best, arg) = mesh
        .points
        .par_iter()
        .enumerate()
        .try_fold(init, |(mut best, mut arg), (i, p)| {
            let v = table.values_in(p, lo..hi)?;
            for (k, x) in v.iter().enumerate() {
                if x.abs() > best[k] {
                    best[k] = x.abs();
                    arg[k] = i;
                }
            }
            Ok::<_, SpectralError>((best, arg))
        })
        .try_reduce(init, |(mut b1, mut a1), (b2, a2)| {
            for k in 0..b1.len() {
                if b2[k] > b1[k] || (b2[k] == b1[k] && a2[k] < a1[k]) {
                    b1[k] = b2[k];
                    a1[k] = a2[k];
                }
            }
            Ok((b1, a1))
        })?;
    Ok(chosen
        .into_iter()
        .map(|j| SupRecord {
            index: j,
            lambda: table.modes[j].lambda,
            scaled: best[j - lo] / table.modes[j].lambda.sqrt(),
            argmax: mesh.points[arg[j - lo]],
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaRow {
    pub k: u32,
    pub mu: f64,
    pub mass: f64,
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaCheck {
    pub ell: f64,
    pub beta: u32,
    pub delta: f64,
    pub rows: Vec<OmegaRow>,
    /// Minimum scaled mass over the range.
    pub liminf: f64,
}

/// Cluster centers `μ_k = (2π/ℓ)(k + β/4)` and the symmetric window mass at
/// each, scaled by `μ_k^{-1}`.
pub fn omega_bound_check(
    table: &SpectrumTable,
    x: &ChartPoint,
    ell: f64,
    beta: u32,
    delta: f64,
    k_range: std::ops::RangeInclusive<u32>,
) -> Result<OmegaCheck> {
    if !(ell > 0.0) {
        return Err(SpectralError::InvalidParameter(format!("ℓ = {ell} must be positive")));
    }
    let rows: Vec<OmegaRow> = k_range
        .map(|k| {
            let mu = TAU / ell * (k as f64 + beta as f64 / 4.0);
            let mass = window_mass(table, x, mu, delta)?;
            Ok(OmegaRow {
                k,
                mu,
                mass,
                scaled: mass / mu,
            })
        })
        .collect::<Result<_>>()?;
    let liminf = rows.iter().map(|r| r.scaled).fold(f64::INFINITY, f64::min);
    Ok(OmegaCheck {
        ell,
        beta,
        delta,
        rows,
        liminf,
    })
}

impl OmegaCheck {
    /// CSV with columns `k,mu,mass,scaled`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "k,mu,mass,scaled")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{}",
                r.k,
                crate::fmt_float(r.mu),
                crate::fmt_float(r.mass),
                crate::fmt_float(r.scaled)
            )?;
        }
        Ok(())
    }
}
