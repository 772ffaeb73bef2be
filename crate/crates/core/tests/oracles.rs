//! Independent reference computations checked against the library.

use focal_lab::focal::{extract_return_map, ExtractOptions, ReturnMap};
use focal_lab::geoflow::{flow, PhasePoint, StepPolicy};
use focal_lab::numerics::legendre::normalized_table;
use focal_lab::quasimode::{coherent_state, make_rho};
use focal_lab::spectral::radial::RadialParams;
use focal_lab::spectral::{revolution_spectrum, sphere_spectrum, torus_spectrum, window_mass, Mesh, ModeKind};
use focal_lab::surfaces::{ChartPoint, Profile, SurfaceModel};
use focal_lab::transfer::{dissipativity_verdict, TransferOperator, VerdictThresholds};
use std::f64::consts::{PI, TAU};

fn lattice_norms(l1: f64, l2: f64, lambda_max: f64) -> Vec<f64> {
    let r1 = (lambda_max * l1 / TAU).ceil() as i64;
    let r2 = (lambda_max * l2 / TAU).ceil() as i64;
    let mut v = Vec::new();
    for p in -r1..=r1 {
        for q in -r2..=r2 {
            let n = TAU * ((p as f64 / l1).powi(2) + (q as f64 / l2).powi(2)).sqrt();
            if n <= lambda_max {
                v.push(n);
            }
        }
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

#[test]
fn torus_frequencies_match_lattice_enumeration() {
    for (l1, l2, lmax) in [(TAU, TAU, 5.0), (TAU, 1.7 * TAU, 12.0), (2.0, 3.0, 20.0)] {
        let t = torus_spectrum(l1, l2, lmax).unwrap();
        let oracle = lattice_norms(l1, l2, lmax);
        let f = t.frequencies();
        assert_eq!(f.len(), oracle.len());
        for (a, b) in f.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12);
        }
    }
    let small = torus_spectrum(TAU, TAU, 2.5).unwrap().frequencies();
    let expect = [0.0, 1.0, 1.0, 1.0, 1.0, 2f64.sqrt(), 2f64.sqrt(), 2f64.sqrt(), 2f64.sqrt(), 2.0, 2.0, 2.0, 2.0];
    for (a, b) in small.iter().zip(expect) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn torus_window_mass_is_lattice_count() {
    let t = torus_spectrum(TAU, TAU, 32.0).unwrap();
    let count = lattice_norms(TAU, TAU, 32.0).iter().filter(|n| (*n - 30.0).abs() <= 0.5).count();
    for y in [ChartPoint::planar(0.1, 0.2), ChartPoint::planar(4.0, 5.5)] {
        let m = window_mass(&t, &y, 30.0, 0.5).unwrap();
        assert!((m - count as f64 / (4.0 * PI * PI)).abs() < 1e-11, "{m}");
    }
}

#[test]
fn addition_theorem_for_spherical_harmonics() {
    let t = sphere_spectrum(11.0).unwrap();
    let s = SurfaceModel::sphere(1.0).unwrap();
    for (u, v) in [(0.2, 0.1), (1.3, 2.0), (2.9, -1.0)] {
        let y = s.ambient_point(u, v).unwrap();
        let vals = t.values_at(&y).unwrap();
        let sum: f64 = t
            .modes
            .iter()
            .zip(&vals)
            .filter(|(m, _)| matches!(m.kind, ModeKind::Sphere { l: 10, .. }))
            .map(|(_, v)| v * v)
            .sum();
        assert!((sum - 21.0 / (4.0 * PI)).abs() < 1e-12, "{sum}");
    }
    let x = 0.3f64;
    let tab = normalized_table(10, x, (1.0 - x * x).sqrt());
    let mut direct = 0.0;
    for (m, t) in tab[10].iter().enumerate().take(11) {
        let v = legendre_p(10, m, x) * legendre_norm(10, m);
        assert!((v.abs() - t.abs()).abs() < 1e-12);
        direct += if m == 0 { v * v } else { 2.0 * v * v };
    }
    assert!((direct - 21.0 / (4.0 * PI)).abs() < 1e-12);
}

/// `P_l^m(x)` by the textbook upward recurrence in `l`.
fn legendre_p(l: usize, m: usize, x: f64) -> f64 {
    let mut pmm = 1.0;
    let s = (1.0 - x * x).sqrt();
    for i in 0..m {
        pmm *= (2 * i + 1) as f64 * s;
    }
    if l == m {
        return pmm;
    }
    let mut prev = pmm;
    let mut cur = x * (2 * m + 1) as f64 * pmm;
    for k in (m + 2)..=l {
        let next = ((2 * k - 1) as f64 * x * cur - (k + m - 1) as f64 * prev) / (k - m) as f64;
        prev = cur;
        cur = next;
    }
    cur
}

/// `√((2l+1)/(4π) (l-m)!/(l+m)!)`.
fn legendre_norm(l: usize, m: usize) -> f64 {
    let ratio: f64 = ((l - m + 1)..=(l + m)).map(|k| 1.0 / k as f64).product();
    ((2 * l + 1) as f64 / (4.0 * PI) * ratio).sqrt()
}

/// Perimeter of the ellipse with semi-axes `a`, `b` by composite Simpson.
fn ellipse_perimeter(a: f64, b: f64) -> f64 {
    let n = 20_000;
    let h = TAU / n as f64;
    let speed = |t: f64| (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).sqrt();
    let mut s = speed(0.0) + speed(TAU);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * speed(i as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn ellipsoid_principal_section_closes_after_its_perimeter() {
    let e = SurfaceModel::ellipsoid(2.0, 2f64.sqrt(), 1.0).unwrap();
    let p = StepPolicy::default();
    for (start, axes) in [(([2.0, 0.0, 0.0], [0.0, 1.0, 0.0]), (2.0, 2f64.sqrt())), (([2.0, 0.0, 0.0], [0.0, 0.0, 1.0]), (2.0, 1.0))] {
        let len = ellipse_perimeter(axes.0, axes.1);
        let r = flow(&e, &PhasePoint::new(ChartPoint::ambient(start.0), start.1), len, p).unwrap();
        if let ChartPoint::Ambient { p } = r.end.position {
            let gap = ((p[0] - 2.0).powi(2) + p[1] * p[1] + p[2] * p[2]).sqrt();
            assert!(gap < 1e-8, "{gap}");
        }
    }
}

#[test]
fn peanut_pole_loop_is_twice_the_meridian() {
    let prof = Profile::peanut(0.3).unwrap();
    let s = SurfaceModel::revolution(prof);
    let m = extract_return_map(&s, ChartPoint::polar(0.0, 0.0), &ExtractOptions { n: 64, ..Default::default() }).unwrap();
    assert!((m.ell - 2.0 * prof.length()).abs() < 1e-5);
    assert!(m.sup_deviation() < 1e-6);
}

/// `B(T)` for `η(ω) = ω + ε sin ω` by direct orbit quadrature.
fn b_oracle(eps: f64, t: usize, n: usize) -> f64 {
    let mut c = vec![0.0; t + 1];
    for i in 0..n {
        let mut w = TAU * (i as f64 + 0.5) / n as f64;
        let mut log_j = 0.0;
        for cv in c.iter_mut().skip(1) {
            log_j += (1.0 + eps * w.cos()).ln();
            w += eps * w.sin();
            *cv += (0.5 * log_j).exp();
        }
    }
    (1.0 + 2.0 * c[1..].iter().sum::<f64>() / n as f64) / (2 * t + 1) as f64
}

#[test]
fn ergodic_average_matches_direct_quadrature() {
    let r = dissipativity_verdict(&ReturnMap::sine_map(2048, 0.5), 20, &VerdictThresholds::default()).unwrap();
    let oracle = b_oracle(0.5, 20, 1 << 16);
    assert!((r.b[20] - oracle).abs() < 1e-3, "{} vs {oracle}", r.b[20]);
    assert!(r.b[20] < 0.5);
}

#[test]
fn iterated_jacobian_matches_composition() {
    let eps = 0.5;
    let op = TransferOperator::new(&ReturnMap::sine_map(1024, eps), 2).unwrap();
    let j2 = op.iterated_jacobian(2).unwrap();
    for (i, w) in op.circle_map().omega().iter().enumerate() {
        let direct = (1.0 + eps * w.cos()) * (1.0 + eps * (w + eps * w.sin()).cos());
        assert!((j2[i] - direct).abs() < 1e-6);
    }
}

#[test]
fn test_map_cesaro_norm_decreases() {
    let r = dissipativity_verdict(&ReturnMap::sine_map(2048, 0.5), 40, &VerdictThresholds::default()).unwrap();
    let s: Vec<f64> = [5, 10, 20, 40].iter().map(|t| r.s_norm[*t]).collect();
    assert!(s.windows(2).all(|w| w[1] < w[0]), "{s:?}");
}

#[test]
fn rho_hat_matches_discrete_fourier_transform() {
    let rho = make_rho();
    // ρ(s) = ∫ ρ̂(t) e^{ist} dt on [-8, 8] with 2^16 samples
    let n = 1 << 16;
    let h = 16.0 / n as f64;
    for s in [0.0, 0.7, 2.5, 6.0, 13.0] {
        let v: f64 = (0..n).map(|k| -8.0 + (k as f64 + 0.5) * h).map(|t| rho.rho_hat(t) * (s * t).cos()).sum::<f64>() * h;
        assert!((v - rho.rho(s)).abs() < 1e-8, "s = {s}: {v} vs {}", rho.rho(s));
    }
    // forward transform ρ̂(t) = (2π)^{-1} ∫ ρ(s) e^{-ist} ds
    let (a, m) = (2000.0, 2_000_000);
    let hs = 2.0 * a / m as f64;
    for t in [0.0, 0.2, 0.45, 0.9, 1.3] {
        let v: f64 = (0..m).map(|k| -a + (k as f64 + 0.5) * hs).map(|s| rho.rho(s) * (s * t).cos()).sum::<f64>() * hs / TAU;
        assert!((v - rho.rho_hat(t)).abs() < 1e-6, "t = {t}: {v} vs {}", rho.rho_hat(t));
    }
    assert!((rho.rho_hat(0.0) - 4.0 / 3.0).abs() < 1e-15);
}

#[test]
fn delta_rho_by_independent_bisection() {
    let f = |s: f64| (s / 4.0).sin() / (s / 4.0);
    let (mut lo, mut hi) = (1.0, 8.0);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if f(mid).powi(4) > 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((make_rho().delta_rho - 0.5 * (lo + hi)).abs() < 1e-10);
}

#[test]
fn torus_coherent_norm_matches_lattice_sum() {
    let (l1, l2) = (TAU, TAU);
    let t = torus_spectrum(l1, l2, 50.0).unwrap();
    let rho = make_rho();
    let x0 = ChartPoint::planar(0.4, 1.9);
    let st = coherent_state(&t, &rho, &x0, 30.0, 4.0).unwrap();
    // |e_ξ(x0)|² summed over the ±ξ pair is 2/area, i.e. 1/area per vector
    let oracle: f64 = lattice_norms(l1, l2, 50.0).iter().map(|n| rho.rho(4.0 * (30.0 - n)).powi(2) / (l1 * l2)).sum::<f64>() / 30.0;
    let norm_sq = st.l2_norm().powi(2);
    assert!((norm_sq - oracle).abs() < 1e-8 * oracle.max(1.0), "{norm_sq} vs {oracle}");
}

#[test]
fn revolution_modes_are_orthonormal_under_quadrature() {
    let prof = Profile::peanut(0.3).unwrap();
    let s = SurfaceModel::revolution(prof);
    let t = revolution_spectrum(&prof, 10.0, None, RadialParams::default()).unwrap();
    let mesh = Mesh::quadrature(&s, 4000, 64).unwrap();
    let pick = [0usize, 3, 7, 12, 20, 33, t.len() - 1];
    let cols: Vec<Vec<f64>> = pick
        .iter()
        .map(|j| mesh.points.iter().map(|p| t.eval(*j, p).unwrap()).collect())
        .collect();
    for a in 0..pick.len() {
        for b in a..pick.len() {
            let prod: Vec<f64> = cols[a].iter().zip(&cols[b]).map(|(x, y)| x * y).collect();
            let v = mesh.integrate(&prod).unwrap();
            let expect = if a == b { 1.0 } else { 0.0 };
            assert!((v - expect).abs() < 1e-5, "⟨e{}, e{}⟩ = {v}", pick[a], pick[b]);
        }
    }
}

#[test]
fn coherent_state_parseval() {
    let prof = Profile::peanut(0.3).unwrap();
    let s = SurfaceModel::revolution(prof);
    let t = revolution_spectrum(&prof, 30.0, None, RadialParams::default()).unwrap();
    let st = coherent_state(&t, &make_rho(), &ChartPoint::polar(1.1, 0.7), 15.0, 4.0).unwrap();
    let mesh = Mesh::quadrature(&s, 600, 256).unwrap();
    let psi = st.synthesize(&t, &mesh).unwrap();
    let sq: Vec<f64> = psi.iter().map(|v| v * v).collect();
    let quad = mesh.integrate(&sq).unwrap();
    let coef = st.l2_norm().powi(2);
    assert!((quad / coef - 1.0).abs() < 0.01, "{quad} vs {coef}");
}

#[test]
fn radial_grid_refinement_is_stable() {
    let prof = Profile::peanut(0.3).unwrap();
    let a = revolution_spectrum(&prof, 40.0, Some(120), RadialParams { cells: 4000 }).unwrap();
    let b = revolution_spectrum(&prof, 40.0, Some(120), RadialParams { cells: 8000 }).unwrap();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.frequencies().iter().zip(b.frequencies()) {
        assert!((x - y).abs() <= 1e-4 * x.max(1.0), "{x} vs {y}");
    }
}
