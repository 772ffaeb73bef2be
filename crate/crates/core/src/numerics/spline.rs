//! Periodic cubic splines on uniform grids.

use std::f64::consts::TAU;

/// C² periodic cubic interpolant through `values[i]` at `origin + i * period / n`.
#[derive(Debug, Clone)]
pub struct PeriodicSpline {
    origin: f64,
    spacing: f64,
    values: Vec<f64>,
    second: Vec<f64>,
}

fn solve_tridiagonal(a: f64, diag: &[f64], c: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = c / diag[0];
    dp[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - a * cp[i - 1];
        cp[i] = c / m;
        dp[i] = (rhs[i] - a * dp[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}

/// Solves the circulant system `m[i-1] + 4 m[i] + m[i+1] = rhs[i]`.
fn solve_cyclic(rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let (alpha, beta) = (1.0, 1.0);
    let gamma = -4.0;
    let mut diag = vec![4.0; n];
    diag[0] -= gamma;
    diag[n - 1] -= alpha * beta / gamma;
    let x = solve_tridiagonal(1.0, &diag, 1.0, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = solve_tridiagonal(1.0, &diag, 1.0, &u);
    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

impl PeriodicSpline {
    /// Spline of period `period` through equally spaced samples starting at `origin`.
    pub fn new(origin: f64, period: f64, values: Vec<f64>) -> Self {
        let n = values.len();
        assert!(n >= 4, "periodic spline needs at least 4 samples");
        let spacing = period / n as f64;
        let rhs: Vec<f64> = (0..n)
            .map(|i| {
                let prev = values[(i + n - 1) % n];
                let next = values[(i + 1) % n];
                6.0 * (next - 2.0 * values[i] + prev) / (spacing * spacing)
            })
            .collect();
        let second = solve_cyclic(&rhs);
        Self {
            origin,
            spacing,
            values,
            second,
        }
    }

    /// Spline over one turn of the circle.
    pub fn on_circle(origin: f64, values: Vec<f64>) -> Self {
        Self::new(origin, TAU, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn period(&self) -> f64 {
        self.spacing * self.values.len() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    fn locate(&self, x: f64) -> (usize, usize, f64) {
        let n = self.values.len();
        let s = ((x - self.origin) / self.spacing).rem_euclid(n as f64);
        let mut i = s.floor() as usize;
        let mut t = s - i as f64;
        if i >= n {
            i = n - 1;
            t = 1.0;
        }
        (i, (i + 1) % n, t)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let (i, j, t) = self.locate(x);
        let u = 1.0 - t;
        let h2 = self.spacing * self.spacing / 6.0;
        u * self.values[i]
            + t * self.values[j]
            + h2 * ((u * u * u - u) * self.second[i] + (t * t * t - t) * self.second[j])
    }

    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        let (i, j, t) = self.locate(x);
        let u = 1.0 - t;
        (self.values[j] - self.values[i]) / self.spacing
            + self.spacing / 6.0
                * (-(3.0 * u * u - 1.0) * self.second[i] + (3.0 * t * t - 1.0) * self.second[j])
    }
}
