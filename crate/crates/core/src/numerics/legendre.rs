//! Orthonormal associated Legendre functions.
//!
//! `table[l][m]` holds `N_lm P_l^m(cos θ)` normalized so that
//! `∫ |table[l][m]|² sin θ dθ dφ = 1` over the unit sphere with a factor
//! `e^{imφ}`. Real harmonics use `√2 · table[l][m] · {cos, sin}(mφ)` for m > 0.

use std::f64::consts::PI;

/// Normalized Legendre values up to degree `lmax` at `(cos θ, sin θ)`.
pub fn normalized_table(lmax: usize, cos_t: f64, sin_t: f64) -> Vec<Vec<f64>> {
    let mut table: Vec<Vec<f64>> = (0..=lmax).map(|l| vec![0.0; l + 1]).collect();
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            pmm *= ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * sin_t;
        }
        table[m][m] = pmm;
        if m < lmax {
            table[m + 1][m] = cos_t * ((2 * m + 3) as f64).sqrt() * pmm;
        }
        for l in (m + 2)..=lmax {
            let lf = l as f64;
            let mf = m as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            table[l][m] = a * (cos_t * table[l - 1][m] - b * table[l - 2][m]);
        }
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_degree_closed_forms() {
        let t = 0.7f64;
        let tab = normalized_table(2, t.cos(), t.sin());
        let c00 = (1.0 / (4.0 * PI)).sqrt();
        assert!((tab[0][0] - c00).abs() < 1e-15);
        assert!((tab[1][0] - (3.0 / (4.0 * PI)).sqrt() * t.cos()).abs() < 1e-14);
        let p20 = (5.0 / (4.0 * PI)).sqrt() * 0.5 * (3.0 * t.cos().powi(2) - 1.0);
        assert!((tab[2][0] - p20).abs() < 1e-14);
        // |Y_11|² summed over the complex pair equals 3 sin²/(8π) each.
        assert!((tab[1][1].powi(2) - 3.0 / (8.0 * PI) * t.sin().powi(2)).abs() < 1e-14);
    }

    #[test]
    fn unsold_sum_rule() {
        for &t in &[0.0, 0.3, 1.2, 2.9] {
            let tab = normalized_table(60, f64::cos(t), f64::sin(t));
            for (l, row) in tab.iter().enumerate() {
                let s: f64 = row[0] * row[0] + 2.0 * row[1..].iter().map(|v| v * v).sum::<f64>();
                let expected = (2 * l + 1) as f64 / (4.0 * PI);
                assert!((s - expected).abs() < 1e-11 * expected, "l={l} t={t}");
            }
        }
    }
}
