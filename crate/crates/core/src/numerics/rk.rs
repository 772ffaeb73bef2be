//! Fixed-step explicit Runge–Kutta stepping.
//!
//! The stepper uses the fifth-order Dormand–Prince weights without the
//! embedded error estimate: all callers in this crate run at a fixed step and
//! study convergence by halving it.

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

/// Formal order of [`dopri5_step`].
pub const ORDER: u32 = 5;

#[inline]
fn axpy<const D: usize>(y: &[f64; D], terms: &[(f64, &[f64; D])], h: f64) -> [f64; D] {
    let mut out = *y;
    for (c, k) in terms {
        let s = c * h;
        for i in 0..D {
            out[i] += s * k[i];
        }
    }
    out
}

/// One autonomous fifth-order step `y(t) -> y(t + h)` of `y' = f(y)`.
pub fn dopri5_step<const D: usize, F>(f: &F, y: &[f64; D], h: f64) -> [f64; D]
where
    F: Fn(&[f64; D]) -> [f64; D],
{
    let k1 = f(y);
    let k2 = f(&axpy(y, &[(A21, &k1)], h));
    let k3 = f(&axpy(y, &[(A31, &k1), (A32, &k2)], h));
    let k4 = f(&axpy(y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h));
    let k5 = f(&axpy(y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h));
    let k6 = f(&axpy(
        y,
        &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        h,
    ));
    axpy(y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic(y: &[f64; 2]) -> [f64; 2] {
        [y[1], -y[0]]
    }

    fn run(h: f64, t: f64) -> [f64; 2] {
        let n = (t / h).round() as usize;
        let mut y = [1.0, 0.0];
        for _ in 0..n {
            y = dopri5_step(&harmonic, &y, h);
        }
        y
    }

    #[test]
    fn fifth_order_on_harmonic_oscillator() {
        let t = 2.0f64;
        let err = |y: [f64; 2]| (y[0] - t.cos()).hypot(y[1] + t.sin());
        let e1 = err(run(0.2, t));
        let e2 = err(run(0.1, t));
        let p = (e1 / e2).log2();
        assert!(p > 4.5, "observed order {p}");
    }

    #[test]
    fn exact_for_linear_motion() {
        let f = |y: &[f64; 2]| [1.0, 0.0 * y[1]];
        let y = dopri5_step(&f, &[0.5, 0.0], 0.37);
        assert!((y[0] - 0.87).abs() < 1e-15);
    }
}
