//! Symmetric tridiagonal eigenproblems: Sturm-sequence bisection for the
//! eigenvalues and shifted inverse iteration for the eigenvectors.

/// Symmetric tridiagonal matrix with diagonal `diag` and off-diagonal `off`.
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1));
        Self { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        let tiny = f64::MIN_POSITIVE.sqrt();
        for i in 0..self.diag.len() {
            let coupling = if i == 0 {
                0.0
            } else {
                self.off[i - 1] * self.off[i - 1] / q
            };
            q = self.diag[i] - x - coupling;
            if q == 0.0 {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `index`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, index: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let span = (hi - lo).abs().max(1.0);
        lo -= 1e-12 * span;
        hi += 1e-12 * span;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// All eigenvalues strictly below `limit`, ascending.
    pub fn eigenvalues_below(&self, limit: f64) -> Vec<f64> {
        let k = self.count_below(limit);
        (0..k).map(|j| self.eigenvalue(j)).collect()
    }

    /// Unit eigenvector for the (accurately known) eigenvalue `lambda`.
    ///
    /// The sign is fixed so that the first component above 1e-8 of the
    /// maximum is positive.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.dim();
        let scale = self.gershgorin().1.abs().max(1.0);
        let shift = lambda + 4.0 * f64::EPSILON * scale;
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.25 * ((i as f64) * 0.618_033_988_75).sin())
            .collect();
        normalize(&mut x);
        for _ in 0..3 {
            x = self.shifted_solve(shift, &x);
            normalize(&mut x);
        }
        let max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if let Some(first) = x.iter().find(|v| v.abs() > 1e-8 * max) {
            if *first < 0.0 {
                x.iter_mut().for_each(|v| *v = -*v);
            }
        }
        x
    }

    /// Solves `(T - shift I) y = b` with partial pivoting.
    pub fn shifted_solve(&self, shift: f64, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut d: Vec<f64> = self.diag.iter().map(|v| v - shift).collect();
        let mut b = b.to_vec();
        if n == 1 {
            return vec![b[0] / nonzero(d[0])];
        }
        let mut dl = self.off.clone();
        let mut du = self.off.clone();
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                let fact = dl[i] / nonzero(d[i]);
                d[i + 1] -= fact * du[i];
                b[i + 1] -= fact * b[i];
                dl[i] = 0.0;
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                let temp = d[i + 1];
                d[i + 1] = du[i] - fact * temp;
                if i + 2 < n {
                    dl[i] = du[i + 1];
                    du[i + 1] = -fact * dl[i];
                } else {
                    dl[i] = 0.0;
                }
                du[i] = temp;
                let tb = b[i];
                b[i] = b[i + 1];
                b[i + 1] = tb - fact * b[i + 1];
            }
        }
        b[n - 1] /= nonzero(d[n - 1]);
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / nonzero(d[n - 2]);
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - du[i] * b[i + 1] - dl[i] * b[i + 2]) / nonzero(d[i]);
        }
        b
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * x[i + 1];
                }
                s
            })
            .collect()
    }
}

#[inline]
fn nonzero(v: f64) -> f64 {
    if v == 0.0 {
        f64::EPSILON * f64::EPSILON
    } else {
        v
    }
}

fn normalize(x: &mut [f64]) {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= n);
}
