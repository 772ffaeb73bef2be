use focal_lab::focal::ReturnMap;
use focal_lab::geoflow::{flow, flow_with_linearization, DirectionFrame, StepPolicy};
use focal_lab::quasimode::make_rho;
use focal_lab::spectral::{sphere_spectrum, torus_spectrum, window_mass, SpectrumTable};
use focal_lab::surfaces::{ChartPoint, Profile, SurfaceModel};
use focal_lab::transfer::{dissipativity_verdict, inner, TransferOperator, VerdictThresholds};
use proptest::prelude::*;
use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

fn surfaces() -> [SurfaceModel; 4] {
    [
        SurfaceModel::torus(TAU, 2f64.sqrt() * TAU).unwrap(),
        SurfaceModel::sphere(1.0).unwrap(),
        SurfaceModel::revolution(Profile::peanut(0.3).unwrap()),
        SurfaceModel::ellipsoid(2.0, 2f64.sqrt(), 1.0).unwrap(),
    ]
}

/// A point away from poles: `u` is a colatitude-like coordinate in (0.3, 2.8).
fn point(s: &SurfaceModel, u: f64, v: f64) -> ChartPoint {
    match s {
        SurfaceModel::FlatTorus { l1, l2 } => ChartPoint::planar(u / PI * l1, v / TAU * l2),
        SurfaceModel::Revolution { profile } => ChartPoint::polar(u / PI * profile.length(), v),
        _ => s.ambient_point(u, v).unwrap(),
    }
}

fn position_gap(a: &ChartPoint, b: &ChartPoint) -> f64 {
    match (a, b) {
        (ChartPoint::Planar { x, y }, ChartPoint::Planar { x: x2, y: y2 }) => (x - x2).abs().max((y - y2).abs()),
        (ChartPoint::Polar { r, theta }, ChartPoint::Polar { r: r2, theta: t2 }) => {
            let dt = (theta - t2 + PI).rem_euclid(TAU) - PI;
            (r - r2).abs().max(dt.abs())
        }
        (ChartPoint::Ambient { p }, ChartPoint::Ambient { p: q }) => (0..3).map(|i| (p[i] - q[i]).abs()).fold(0.0, f64::max),
        _ => f64::INFINITY,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn metric_inverse_is_inverse(k in 0usize..4, u in 0.3f64..2.8, v in 0.0f64..TAU) {
        let s = surfaces()[k];
        let m = s.metric_at(&point(&s, u, v)).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let e: f64 = (0..2).map(|l| m.g_inv[i][l] * m.g[l][j]).sum();
                let delta = if i == j { 1.0 } else { 0.0 };
                prop_assert!((e - delta).abs() < 1e-12, "entry {} {}: {}", i, j, e);
            }
        }
    }

    #[test]
    fn umbilics_closed_under_reflections(a in 1.6f64..3.0, b in 1.1f64..1.5) {
        let e = SurfaceModel::ellipsoid(a, b, 1.0).unwrap();
        let us: Vec<[f64; 3]> = e.umbilic_points().unwrap().iter().map(|p| match p {
            ChartPoint::Ambient { p } => *p,
            _ => unreachable!(),
        }).collect();
        for p in &us {
            for (sx, sz) in [(1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let q = [sx * p[0], p[1], sz * p[2]];
                prop_assert!(us.iter().any(|u| (0..3).all(|i| (u[i] - q[i]).abs() < 1e-14)));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn flow_is_reversible_and_unit_speed(k in 0usize..4, u in 0.3f64..2.8, v in 0.0f64..TAU, w in 0.0f64..TAU, t in 1.0f64..50.0) {
        let s = surfaces()[k];
        let p = StepPolicy::default();
        let start = DirectionFrame::new(&s, point(&s, u, v), p).unwrap().phase_point(w);
        let fwd = flow(&s, &start, t, p).unwrap();
        prop_assert!(fwd.drift < 1e-7 && !fwd.flagged);
        let back = flow(&s, &fwd.end, -t, p).unwrap();
        let gap = position_gap(&back.end.position, &start.position);
        let mut tol = 10.0 * fwd.drift.max(1e-10);
        if let SurfaceModel::FlatTorus { l1, l2 } = s {
            tol = tol.max(1e-12 * (l1 + l2 + t));
        }
        prop_assert!(gap <= tol, "gap {gap:e} vs {tol:e}");
    }

    #[test]
    fn linearization_is_symplectic(k in 0usize..4, u in 0.3f64..2.8, v in 0.0f64..TAU, w in 0.0f64..TAU, t in 0.5f64..50.0) {
        let s = surfaces()[k];
        let p = StepPolicy::default();
        let start = DirectionFrame::new(&s, point(&s, u, v), p).unwrap().phase_point(w);
        let (_, lin) = flow_with_linearization(&s, &start, t, p).unwrap();
        let det = lin[0][0] * lin[1][1] - lin[0][1] * lin[1][0];
        prop_assert!((det - 1.0).abs() < 1e-6, "det {det}");
    }

    #[test]
    fn speed_drift_below_budget_to_t100(k in 0usize..4, w in 0.0f64..TAU) {
        let s = surfaces()[k];
        let p = StepPolicy::default();
        let start = DirectionFrame::new(&s, point(&s, 1.1, 0.7), p).unwrap().phase_point(w);
        let r = flow(&s, &start, 100.0, p).unwrap();
        prop_assert!(r.drift < 1e-7);
    }
}

fn test_functions(omega: &[f64]) -> Vec<Vec<f64>> {
    vec![
        vec![1.0; omega.len()],
        omega.iter().map(|w| w.cos()).collect(),
        omega.iter().map(|w| (3.0 * w).sin() + 0.5).collect(),
        omega.iter().map(|w| (-(w - PI).powi(2)).exp()).collect(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn transfer_operator_is_unitary_and_positive(eps in 0.05f64..0.7) {
        let map = ReturnMap::sine_map(1024, eps);
        let op = TransferOperator::new(&map, 2).unwrap();
        let fs = test_functions(op.circle_map().omega());
        let us: Vec<Vec<f64>> = fs.iter().map(|f| op.apply(f).unwrap()).collect();
        for i in 0..fs.len() {
            let nf = inner(&fs[i], &fs[i]).sqrt();
            let nu = inner(&us[i], &us[i]).sqrt();
            prop_assert!((nu - nf).abs() < 1e-4 * nf);
            for j in 0..fs.len() {
                prop_assert!((inner(&us[i], &us[j]) - inner(&fs[i], &fs[j])).abs() < 1e-4);
            }
        }
        for (f, u) in fs.iter().zip(&us) {
            if f.iter().all(|v| *v >= 0.0) {
                prop_assert!(u.iter().all(|v| *v >= 0.0));
            }
        }
    }

    #[test]
    fn ergodic_average_in_unit_interval(eps in 0.05f64..0.7, alpha in 0.0f64..TAU) {
        for map in [ReturnMap::sine_map(512, eps), ReturnMap::rotation(512, alpha)] {
            let r = dissipativity_verdict(&map, 20, &VerdictThresholds::default()).unwrap();
            prop_assert!((r.b[0] - 1.0).abs() < 1e-12);
            prop_assert!(r.b.iter().all(|b| *b >= 0.0 && *b <= 1.0 + 1e-12));
            prop_assert!(r.s_norm.iter().all(|s| *s >= 0.0 && *s <= 1.0 + 1e-9));
        }
    }

    #[test]
    fn rho_contract(s in -200.0f64..200.0) {
        let rho = make_rho();
        prop_assert!(rho.rho(s) >= 0.0);
        prop_assert!((rho.rho(s) - rho.rho(-s)).abs() < 1e-15);
        prop_assert!(rho.rho(s) <= rho.envelope(s) + 1e-15);
        let t = s / 100.0;
        prop_assert!(rho.rho_hat(t) >= 0.0);
        if t.abs() > rho.support {
            prop_assert_eq!(rho.rho_hat(t), 0.0);
        }
    }
}

fn tables() -> &'static (SpectrumTable, SpectrumTable) {
    static T: OnceLock<(SpectrumTable, SpectrumTable)> = OnceLock::new();
    T.get_or_init(|| (torus_spectrum(TAU, 1.3 * TAU, 30.0).unwrap(), sphere_spectrum(30.0).unwrap()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn window_mass_nondecreasing_in_delta(lambda in 5.0f64..25.0, d1 in 0.01f64..2.0, d2 in 0.01f64..2.0, v in 0.0f64..TAU) {
        let (lo, hi) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
        let (torus, sphere) = tables();
        let y = ChartPoint::planar(1.0 + v, 0.5 * v);
        prop_assert!(window_mass(torus, &y, lambda, lo).unwrap() <= window_mass(torus, &y, lambda, hi).unwrap());
        let z = SurfaceModel::sphere(1.0).unwrap().ambient_point(0.3 + 0.3 * v, v).unwrap();
        prop_assert!(window_mass(sphere, &z, lambda, lo).unwrap() <= window_mass(sphere, &z, lambda, hi).unwrap());
    }
}
