//! Small numerical kernels shared by the geometric and spectral modules.

pub mod legendre;
pub mod rk;
pub mod roots;
pub mod spline;
pub mod tridiag;

use std::f64::consts::{PI, TAU};

/// Wraps an angle into `(-π, π]`.
#[inline]
pub fn wrap_pi(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(TAU) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

/// Wraps an angle into `[0, 2π)`.
#[inline]
pub fn wrap_tau(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Distance between two angles on the unit circle.
#[inline]
pub fn circle_dist(a: f64, b: f64) -> f64 {
    wrap_pi(a - b).abs()
}

/// Unwraps angles so consecutive differences lie in `(-π, π]`.
pub fn unwrap(angles: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(angles.len());
    for (i, &a) in angles.iter().enumerate() {
        if i == 0 {
            out.push(a);
        } else {
            let prev: f64 = out[i - 1];
            out.push(prev + wrap_pi(a - prev));
        }
    }
    out
}

/// Periodic trapezoid rule on `n` equally spaced samples of one turn,
/// normalized to the probability measure `dω / 2π`.
#[inline]
pub fn circle_mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}
