//! Finite-volume radial solver for `-(f v')'/f + m² v/f² = λ² v` on `(0, L)`.
//!
//! Vertices `r_i = i h`. Cell `i` spans `[r_i - h/2, r_i + h/2]` clipped to
//! `[0, L]`; mass and potential use exact cell integrals of `f` and `1/f`.
//! For `m = 0` the pole vertices are unknowns, for `m ≥ 1` they carry the
//! Dirichlet value that regularity forces.

use crate::numerics::tridiag::SymTridiagonal;
use crate::surfaces::Profile;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadialParams {
    pub cells: usize,
}

impl Default for RadialParams {
    fn default() -> Self {
        RadialParams { cells: 4000 }
    }
}

#[derive(Debug, Clone)]
pub struct RadialProblem {
    m: u32,
    h: f64,
    cells: usize,
    first: usize,
    weights: Vec<f64>,
    k_diag: Vec<f64>,
    k_off: Vec<f64>,
    sym: SymTridiagonal,
}

/// Radial eigenfunction sampled on all vertices, `Σ W_i v_i² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialMode {
    pub m: u32,
    pub k: u32,
    pub lambda: f64,
    pub h: f64,
    pub values: Vec<f64>,
}

impl RadialProblem {
    pub fn new(profile: &Profile, m: u32, params: RadialParams) -> Self {
        let n = params.cells.max(8);
        let l = profile.length();
        let h = l / n as f64;
        let r = |i: usize| i as f64 * h;
        let first = if m == 0 { 0 } else { 1 };
        let last = if m == 0 { n } else { n - 1 };
        let mm = (m as f64).powi(2);
        let mut weights = Vec::with_capacity(last - first + 1);
        let mut k_diag = Vec::with_capacity(last - first + 1);
        let mut k_off = Vec::with_capacity(last - first);
        let flux = |i: usize| profile.f(r(i) + 0.5 * h) / h;
        for i in first..=last {
            let a = (r(i) - 0.5 * h).max(0.0);
            let b = (r(i) + 0.5 * h).min(l);
            weights.push(profile.integral_f(a, b));
            let mut d = 0.0;
            if i > 0 {
                d += flux(i - 1);
            }
            if i < n {
                d += flux(i);
            }
            if m > 0 {
                d += mm * profile.integral_inv_f(a, b);
            }
            k_diag.push(d);
            if i < last {
                k_off.push(-flux(i));
            }
        }
        let s: Vec<f64> = weights.iter().map(|w| 1.0 / w.sqrt()).collect();
        let diag = k_diag.iter().zip(&s).map(|(d, si)| d * si * si).collect();
        let off = k_off.iter().enumerate().map(|(i, o)| o * s[i] * s[i + 1]).collect();
        RadialProblem {
            m,
            h,
            cells: n,
            first,
            weights,
            k_diag,
            k_off,
            sym: SymTridiagonal::new(diag, off),
        }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Eigenvalues `λ ≤ lambda_max`, ascending.
    pub fn frequencies_below(&self, lambda_max: f64) -> Vec<f64> {
        let limit = lambda_max * lambda_max * (1.0 + 1e-12);
        let mut ev = self.sym.eigenvalues_below(limit);
        // constants span the exact kernel of the m = 0 operator
        if self.m == 0 && !ev.is_empty() {
            ev[0] = 0.0;
        }
        ev.into_iter()
            .map(|e| e.max(0.0).sqrt())
            .filter(|l| *l <= lambda_max)
            .collect()
    }

    /// Eigenvector for a known eigenvalue `lambda`, scattered onto the full
    /// vertex grid.
    pub fn mode(&self, k: u32, lambda: f64) -> RadialMode {
        let u = self.sym.eigenvector(lambda * lambda);
        let mut values = vec![0.0; self.cells + 1];
        for (j, uj) in u.iter().enumerate() {
            values[self.first + j] = uj / self.weights[j].sqrt();
        }
        RadialMode {
            m: self.m,
            k,
            lambda,
            h: self.h,
            values,
        }
    }

    /// `‖(K - λ² W) v‖_{W⁻¹} / λ²` on the solver grid (unit `W`-norm `v`).
    pub fn residual(&self, mode: &RadialMode) -> f64 {
        let v = &mode.values[self.first..self.first + self.weights.len()];
        let l2 = mode.lambda * mode.lambda;
        let n = v.len();
        let mut acc = 0.0;
        for i in 0..n {
            let mut kv = self.k_diag[i] * v[i];
            if i > 0 {
                kv += self.k_off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                kv += self.k_off[i] * v[i + 1];
            }
            let r = kv - l2 * self.weights[i] * v[i];
            acc += r * r / self.weights[i];
        }
        acc.sqrt() / l2.max(1.0)
    }

    /// `Σ W_i a_i b_i` over the unknowns.
    pub fn inner(&self, a: &RadialMode, b: &RadialMode) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(j, w)| w * a.values[self.first + j] * b.values[self.first + j])
            .sum()
    }
}

impl RadialMode {
    /// Four-point Lagrange interpolation of the vertex values.
    pub fn eval(&self, r: f64) -> f64 {
        let n = self.values.len() - 1;
        let x = (r / self.h).clamp(0.0, n as f64);
        let i = (x.floor() as usize).clamp(1, n - 2);
        let t = x - i as f64;
        let (p0, p1, p2, p3) = (
            self.values[i - 1],
            self.values[i],
            self.values[i + 1],
            self.values[i + 2],
        );
        let (a, b, c, d) = (t + 1.0, t, t - 1.0, t - 2.0);
        -p0 * b * c * d / 6.0 + p1 * a * c * d / 2.0 - p2 * a * b * d / 2.0 + p3 * a * b * c / 6.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_profile_reproduces_sphere_eigenvalues() {
        let p = Profile::sine();
        for m in [0u32, 1, 3] {
            let prob = RadialProblem::new(&p, m, RadialParams::default());
            let f = prob.frequencies_below(20.5);
            for (k, lam) in f.iter().enumerate() {
                let l = (m as usize + k) as f64;
                let exact = (l * (l + 1.0)).sqrt();
                assert!((lam - exact).abs() < 1e-3, "m {m} k {k}: {lam} vs {exact}");
            }
        }
    }

    #[test]
    fn modes_are_normalized_and_small_residual() {
        let p = Profile::peanut(0.3).unwrap();
        let prob = RadialProblem::new(&p, 2, RadialParams { cells: 1000 });
        let f = prob.frequencies_below(15.0);
        let a = prob.mode(0, f[0]);
        let b = prob.mode(1, f[1]);
        assert!((prob.inner(&a, &a) - 1.0).abs() < 1e-10);
        assert!(prob.inner(&a, &b).abs() < 1e-8);
        assert!(prob.residual(&a) < 1e-6);
        let r = 0.37;
        let i = (r / a.h).round() as usize;
        assert!((a.eval(i as f64 * a.h) - a.values[i]).abs() < 1e-12);
    }
}
