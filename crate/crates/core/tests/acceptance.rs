//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use focal_lab::focal::{classify_point, extract_return_map, scan_loops, ExtractOptions, ReturnMap, Thresholds, Verdict};
use focal_lab::geoflow::{flow, flow_recorded, flow_with_linearization, maslov_index, DirectionFrame, PhasePoint, StepPolicy};
use focal_lab::harness::config::ExperimentConfig;
use focal_lab::harness::{execute_config, Artifacts, RunOptions};
use focal_lab::quasimode::{coherent_state, l2_and_residual, make_rho, peak_value};
use focal_lab::spectral::radial::RadialParams;
use focal_lab::spectral::{
    local_weyl_check, omega_bound_check, revolution_spectrum, smoothed_sum, sphere_spectrum, torus_spectrum, window_mass, SpectrumTable,
};
use focal_lab::surfaces::{ChartPoint, Profile, SurfaceModel};
use focal_lab::transfer::{dissipativity_verdict, fixed_points, inner, ErgodicVerdict, FixedPointType, TransferOperator, VerdictThresholds};
use std::f64::consts::{PI, TAU};
use std::path::PathBuf;
use std::time::Instant;

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;

/// Regression floor for the peanut pole's scaled window masses.
const PEANUT_OMEGA_FLOOR: f64 = 0.15;

fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn ellipsoid() -> SurfaceModel {
    SurfaceModel::ellipsoid(2.0, 2f64.sqrt(), 1.0).unwrap()
}

fn peanut() -> Profile {
    Profile::peanut(0.3).unwrap()
}

fn criterion_1() -> Outcome {
    let p = StepPolicy::default();
    let s = SurfaceModel::sphere(1.0)?;
    let (mut ret, mut lin_err) = (0.0f64, 0.0f64);
    for (u, v, w) in [(1.0, 0.3, 0.8), (0.4, 2.0, 2.9), (2.5, -1.0, 5.1)] {
        let x = s.ambient_point(u, v)?;
        let start = DirectionFrame::new(&s, x, p)?.phase_point(w);
        let (res, lin) = flow_with_linearization(&s, &start, TAU, p)?;
        if let (ChartPoint::Ambient { p: a }, ChartPoint::Ambient { p: b }) = (res.end.position, start.position) {
            ret = ret.max(dist3(a, b));
        }
        let id = [[1.0, 0.0], [0.0, 1.0]];
        for i in 0..2 {
            for j in 0..2 {
                lin_err = lin_err.max((lin[i][j] - id[i][j]).abs());
            }
        }
    }
    let t = SurfaceModel::torus(TAU, 2f64.sqrt() * TAU)?;
    let mut torus_err = 0.0f64;
    for (x0, y0, a) in [(0.3, 1.2, 0.4), (5.0, 0.1, 2.2), (1.0, 7.0, 4.0)] {
        let (c, sn) = (f64::cos(a), f64::sin(a));
        let r = flow(&t, &PhasePoint::new(ChartPoint::planar(x0, y0), [c, sn, 0.0]), 37.3, p)?;
        if let ChartPoint::Planar { x, y } = r.end.position {
            let wrap = |d: f64, l: f64| (d - l * (d / l).round()).abs();
            torus_err = torus_err
                .max(wrap(x - (x0 + 37.3 * c), TAU))
                .max(wrap(y - (y0 + 37.3 * sn), 2f64.sqrt() * TAU));
        }
    }
    let e = ellipsoid();
    let ax = e.axes_squared().unwrap();
    let x = e.ambient_point(1.1, 0.7)?;
    let start = DirectionFrame::new(&e, x, p)?.phase_point(0.4);
    let traj = flow_recorded(&e, &start, 100.0, p)?.trajectory.unwrap_or_default();
    let inv: Vec<f64> = traj
        .iter()
        .filter_map(|s| match s.point.position {
            ChartPoint::Ambient { p } => {
                let v = s.point.xi;
                Some((0..3).map(|i| p[i] * p[i] / (ax[i] * ax[i])).sum::<f64>() * (0..3).map(|i| v[i] * v[i] / ax[i]).sum::<f64>())
            }
            _ => None,
        })
        .collect();
    let drift = inv.iter().map(|v| (v - inv[0]).abs()).fold(0.0, f64::max);
    let ok = ret < 1e-7 && lin_err < 1e-6 && torus_err < 1e-10 && drift < 1e-7 && inv.len() > 1000;
    Ok((
        ok,
        format!("sphere return {ret:.2e}, linearization {lin_err:.2e}, torus {torus_err:.2e}, Joachimsthal drift {drift:.2e}"),
    ))
}

fn criterion_2() -> Outcome {
    let p = StepPolicy::default();
    let s = SurfaceModel::sphere(1.0)?;
    let x = s.ambient_point(0.9, 0.1)?;
    let b2 = maslov_index(&s, x, TAU, 16, p)?;
    let b1 = maslov_index(&s, x, PI, 16, p)?;
    let t = SurfaceModel::torus(TAU, 3.0)?;
    let tb: Vec<usize> = [1.0, 7.5, 40.0]
        .iter()
        .map(|l| maslov_index(&t, ChartPoint::planar(0.1, 0.2), *l, 16, p))
        .collect::<Result<_, _>>()?;
    let ok = b2 == 2 && b1 == 1 && tb.iter().all(|b| *b == 0);
    Ok((ok, format!("β(sphere, 2π) = {b2}, β(sphere, π) = {b1}, β(torus) = {tb:?}")))
}

fn umbilic_map() -> Result<ReturnMap, Box<dyn std::error::Error>> {
    let e = ellipsoid();
    let x = e.umbilic_points()?[0];
    Ok(extract_return_map(&e, x, &ExtractOptions { n: 512, ..Default::default() })?)
}

fn criterion_3(umbilic: &ReturnMap) -> Outcome {
    let p = StepPolicy::default();
    let th = Thresholds::default();
    let s = SurfaceModel::sphere(1.0)?;
    let x = s.ambient_point(1.1, 0.7)?;
    let scan = scan_loops(&s, x, 20.0, 256, 1e-4, p)?;
    let map = extract_return_map(&s, x, &ExtractOptions { n: 256, ..Default::default() })?;
    let sc = classify_point(&scan, Some(&map), &th);
    let sphere_ok = sc.verdict == Verdict::Pole && (map.ell - TAU).abs() < 1e-4 && map.sup_deviation() < 1e-6;

    let t = SurfaceModel::torus(TAU, 2f64.sqrt() * TAU)?;
    let tscan = scan_loops(&t, ChartPoint::planar(1.234, 2.345), 20.0, 256, 1e-4, p)?;
    let tc = classify_point(&tscan, None, &th);
    let torus_ok = tc.verdict == Verdict::NonFocal && tscan.loop_fraction < 0.05;

    let e = ellipsoid();
    let escan = scan_loops(&e, e.umbilic_points()?[0], 20.0, 256, 1e-4, p)?;
    let ec = classify_point(&escan, Some(umbilic), &th);
    let fps = fixed_points(umbilic, 1e-6)?;
    let src: Vec<f64> = fps.iter().filter(|f| f.kind == FixedPointType::Source).map(|f| f.multiplier).collect();
    let snk: Vec<f64> = fps.iter().filter(|f| f.kind == FixedPointType::Sink).map(|f| f.multiplier).collect();
    let product = if src.len() == 1 && snk.len() == 1 { src[0] * snk[0] } else { f64::NAN };
    let umb_ok = ec.verdict == Verdict::Twisted && fps.len() == 2 && (product - 1.0).abs() < 1e-3;
    Ok((
        sphere_ok && torus_ok && umb_ok,
        format!(
            "sphere {:?} ℓ = {:.8} dev {:.1e}; torus {:?} loops {:.3}; umbilic {:?} with {} fixed points, m_src·m_sink = {:.6}",
            sc.verdict,
            map.ell,
            map.sup_deviation(),
            tc.verdict,
            tscan.loop_fraction,
            ec.verdict,
            fps.len(),
            product
        ),
    ))
}

/// `c_ν` for the test map by direct orbit quadrature on a midpoint grid.
fn b_oracle(eps: f64, t: usize, n: usize) -> f64 {
    let mut sum = vec![0.0; t + 1];
    for i in 0..n {
        let mut w = TAU * (i as f64 + 0.5) / n as f64;
        let mut log_j = 0.0;
        for s in sum.iter_mut().skip(1) {
            log_j += (1.0 + eps * w.cos()).ln();
            w += eps * w.sin();
            *s += (0.5 * log_j).exp();
        }
    }
    let c: Vec<f64> = sum.iter().map(|s| s / n as f64).collect();
    (1.0 + 2.0 * c[1..].iter().sum::<f64>()) / (2 * t + 1) as f64
}

fn unitarity_defect(map: &ReturnMap) -> Result<(f64, f64), Box<dyn std::error::Error>> {
    let op = TransferOperator::new(map, 2)?;
    let om = op.circle_map().omega().to_vec();
    let fs: Vec<Vec<f64>> = vec![
        vec![1.0; om.len()],
        om.iter().map(|w| 1.2 + w.cos()).collect(),
        om.iter().map(|w| (2.0 * w).sin() + 0.3).collect(),
    ];
    let mut unit = 0.0f64;
    let mut positivity = f64::INFINITY;
    let images: Vec<Vec<f64>> = fs.iter().map(|f| op.apply(f)).collect::<Result<_, _>>()?;
    for i in 0..fs.len() {
        for j in 0..fs.len() {
            unit = unit.max((inner(&images[i], &images[j]) - inner(&fs[i], &fs[j])).abs());
        }
    }
    for image in &images[..2] {
        positivity = positivity.min(image.iter().copied().fold(f64::INFINITY, f64::min));
    }
    Ok((unit, positivity))
}

fn criterion_4(umbilic: &ReturnMap, sphere_map: &ReturnMap, peanut_map: &ReturnMap) -> Outcome {
    let th = VerdictThresholds::default();
    let test = ReturnMap::sine_map(2048, 0.5);
    let mut invariants = Vec::new();
    for (name, m) in [("umbilic", umbilic), ("sphere", sphere_map), ("peanut", peanut_map), ("test", &test)] {
        let (u, pos) = unitarity_defect(m)?;
        invariants.push((name, u, pos));
    }
    let inv_ok = invariants.iter().all(|(_, u, pos)| *u < 1e-4 && *pos > 0.0);
    let id = dissipativity_verdict(&ReturnMap::identity(256), 40, &th)?;
    let id_ok = id.b.iter().all(|b| (b - 1.0).abs() < 1e-12);
    let tr = dissipativity_verdict(&test, 40, &th)?;
    let ur = dissipativity_verdict(umbilic, 40, &th)?;
    let range_ok = tr.b.iter().chain(&ur.b).all(|b| (0.0..=1.0 + 1e-12).contains(b));
    let verdict_ok = [&tr, &ur]
        .iter()
        .all(|r| r.b[40] < 0.05 && r.trend < 0.0 && r.verdict == ErgodicVerdict::DissipativeFor1);
    let oracle = b_oracle(0.5, 20, 1 << 16);
    let b20 = tr.b[20];
    let oracle_ok = (b20 - oracle).abs() < 1e-3 && b20 < 0.5;
    let ok = inv_ok && id_ok && range_ok && verdict_ok && oracle_ok;
    let inv_text: Vec<String> = invariants.iter().map(|(n, u, _)| format!("{n} {u:.1e}")).collect();
    Ok((
        ok,
        format!(
            "unitarity [{}]; B≡1 for Id: {id_ok}; B ∈ [0,1]: {range_ok}; test B(40) = {:.5} trend {:.1e} {:?}; umbilic B(40) = {:.5} trend {:.1e} {:?}; B(20) = {:.6} vs oracle {:.6}",
            inv_text.join(", "),
            tr.b[40],
            tr.trend,
            tr.verdict,
            ur.b[40],
            ur.trend,
            ur.verdict,
            b20,
            oracle
        ),
    ))
}

struct Tables {
    sphere: SpectrumTable,
    torus: SpectrumTable,
    peanut: SpectrumTable,
}

fn criterion_5(tables: &Tables) -> Outcome {
    let round = revolution_spectrum(&Profile::sine(), 21.0, None, RadialParams::default())?;
    let freqs = round.frequencies();
    let mut idx = 0;
    let mut worst = 0.0f64;
    let mut mult_ok = true;
    for l in 0..=20usize {
        let exact = ((l * (l + 1)) as f64).sqrt();
        let block = &freqs[idx..(idx + 2 * l + 1).min(freqs.len())];
        mult_ok &= block.len() == 2 * l + 1;
        worst = block.iter().map(|f| (f - exact).abs()).fold(worst, f64::max);
        idx += 2 * l + 1;
    }
    mult_ok &= freqs.get(idx).is_none_or(|f| *f > 420f64.sqrt() + 1e-3);
    let rt = local_weyl_check(&tables.torus, &ChartPoint::planar(0.7, 2.1), 40.0)?;
    let rs = local_weyl_check(&tables.sphere, &ChartPoint::ambient([0.48, 0.6, 0.64]), 40.0)?;
    let rp_pole = local_weyl_check(&tables.peanut, &ChartPoint::polar(0.0, 0.0), 40.0)?;
    let rp_gen = local_weyl_check(&tables.peanut, &ChartPoint::polar(1.1, 0.7), 40.0)?;
    let ok = worst < 1e-3
        && mult_ok
        && (rt - 1.0).abs() < 0.05
        && (rs - 1.0).abs() < 0.05
        && (rp_pole - 1.0).abs() < 0.10
        && (rp_gen - 1.0).abs() < 0.10;
    Ok((
        ok,
        format!(
            "round profile max |λ - √(l(l+1))| = {worst:.2e}, multiplicities {mult_ok}; local Weyl ratios torus {rt:.4}, sphere {rs:.4}, peanut pole {rp_pole:.4}, generic {rp_gen:.4}"
        ),
    ))
}

fn criterion_6(tables: &Tables) -> Outcome {
    let north = ChartPoint::ambient([0.0, 0.0, 1.0]);
    let sc = omega_bound_check(&tables.sphere, &north, TAU, 2, 0.2, 20..=40)?;
    let target = 1.0 / TAU;
    let sphere_dev = sc.rows.iter().map(|r| (r.scaled / target - 1.0).abs()).fold(0.0, f64::max);
    let mu_ok = sc.rows.iter().all(|r| (r.mu - (r.k as f64 + 0.5)).abs() < 1e-12);
    let pc = omega_bound_check(&tables.peanut, &ChartPoint::polar(0.0, 0.0), TAU, 2, 0.2, 10..=30)?;
    let ok = sphere_dev < 0.05 && mu_ok && pc.liminf >= PEANUT_OMEGA_FLOOR;
    Ok((
        ok,
        format!(
            "sphere scaled mass within {:.3}% of 1/2π over k ∈ [20, 40]; peanut pole min {:.6} (floor {PEANUT_OMEGA_FLOOR})",
            100.0 * sphere_dev,
            pc.liminf
        ),
    ))
}

/// `Σ` over lattice vectors `ξ ∈ Z²` with `||ξ| - λ| ≤ δ` of `1/(4π²)`.
fn lattice_window(lambda: f64, delta: f64) -> f64 {
    let r = (lambda + delta).ceil() as i64;
    let mut count = 0usize;
    for p in -r..=r {
        for q in -r..=r {
            let n = ((p * p + q * q) as f64).sqrt();
            if (n - lambda).abs() <= delta {
                count += 1;
            }
        }
    }
    count as f64 / (4.0 * PI * PI)
}

fn criterion_7(tables: &Tables) -> Outcome {
    let rho = make_rho();
    let y = ChartPoint::planar(0.7, 2.1);
    let mut mono = true;
    let mut sums = Vec::new();
    for lambda in [20.0, 30.0, 40.0] {
        let s: Vec<f64> = [1.0, 2.0, 4.0, 8.0]
            .iter()
            .map(|t| smoothed_sum(&tables.torus, &rho, *t, lambda, &y).map(|s| s.main))
            .collect::<Result<_, _>>()?;
        mono &= s.windows(2).all(|w| w[1] < w[0]);
        sums.push(s);
    }
    let deltas = [0.5, 1.0, 2.0];
    let mut oracle_dev = 0.0f64;
    let mut ratios = Vec::new();
    for d in deltas {
        let m = window_mass(&tables.torus, &y, 30.0, d)?;
        let o = lattice_window(30.0, d);
        oracle_dev = oracle_dev.max((m - o).abs());
        ratios.push(m / d);
    }
    let (rmin, rmax) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(*r), b.max(*r)));
    let linear_ok = rmax / rmin <= 1.15 && oracle_dev < 1e-9;

    let pole = ChartPoint::polar(0.0, 0.0);
    let generic = ChartPoint::polar(1.1, 0.7);
    let mut worst = 0.0f64;
    // pole cluster centres μ_k = k + 1/2 (ℓ = 2π, β = 2)
    for lambda in (20..40).map(|k| k as f64 + 0.5) {
        let pp = peak_value(&coherent_state(&tables.peanut, &rho, &pole, lambda, 8.0)?).value;
        let pg = peak_value(&coherent_state(&tables.peanut, &rho, &generic, lambda, 8.0)?).value;
        worst = worst.max(pg / pp);
    }
    let ok = mono && linear_ok && worst <= 0.1;
    Ok((
        ok,
        format!(
            "torus smoothed sums decreasing in T: {mono} (λ = 30: {:.3} → {:.3}); window mass/δ spread {:.3}, lattice deviation {oracle_dev:.1e}; peanut generic/pole peak at T = 8 over μ_k ∈ [20.5, 39.5]: max {worst:.3}",
            sums[1][0],
            sums[1][3],
            rmax / rmin
        ),
    ))
}

fn criterion_8(tables: &Tables) -> Outcome {
    let rho = make_rho();
    let pole = ChartPoint::polar(0.0, 0.0);
    let mut norm_ok = true;
    let mut tails_ok = true;
    let mut worst_tail = 0.0f64;
    let mut max_norm_ratio = 0.0f64;
    let mut band = Vec::new();
    for lambda in [20.5, 30.5] {
        for t in [2.0, 4.0, 8.0, 16.0] {
            let st = coherent_state(&tables.peanut, &rho, &pole, lambda, t)?;
            let nr = l2_and_residual(&st);
            let pk = peak_value(&st);
            let bound = (st.tails.weyl_constant * (1.0 + 1.0 / lambda) * 11.45).sqrt();
            norm_ok &= nr.l2_norm <= bound;
            max_norm_ratio = max_norm_ratio.max(nr.l2_norm / bound);
            for (tail, main) in [(nr.l2_tail, nr.l2_norm), (nr.residual_tail, nr.residual), (pk.tail, pk.value)] {
                worst_tail = worst_tail.max(tail / main);
                tails_ok &= tail < 0.05 * main;
            }
            if lambda == 30.5 {
                band.push(nr.residual * t / lambda);
            }
        }
    }
    let (bmin, bmax) = band.iter().fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(*r), b.max(*r)));
    let band_ok = bmax / bmin <= 2.0;
    let band_text: Vec<String> = band.iter().map(|b| format!("{b:.3}")).collect();
    Ok((
        norm_ok && tails_ok && band_ok,
        format!(
            "‖ψ‖ ≤ C: {norm_ok} (max ‖ψ‖/C = {max_norm_ratio:.3}); residual·T/λ at T = 2,4,8,16: [{}] spread {:.1}; worst tail fraction {worst_tail:.1e}",
            band_text.join(", "),
            bmax / bmin
        ),
    ))
}

fn configs() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut v: Vec<PathBuf> = std::fs::read_dir(&dir)
        .expect("configs directory")
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "cfg"))
        .collect();
    v.sort();
    v
}

fn run(path: &std::path::Path, cache: Option<PathBuf>) -> Result<Artifacts, Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::from_file(path)?;
    let opts = RunOptions {
        cache_dir: cache,
        ..Default::default()
    };
    Ok(execute_config(cfg, &opts)?)
}

fn criterion_9() -> Outcome {
    let cache = tempfile::tempdir()?;
    let mut failures = Vec::new();
    let list = configs();
    for path in &list {
        let name = path.file_stem().unwrap().to_string_lossy().to_string();
        let a = run(path, None)?;
        let b = run(path, None)?;
        let cold = run(path, Some(cache.path().to_path_buf()))?;
        let warm = run(path, Some(cache.path().to_path_buf()))?;
        if a.files != b.files {
            failures.push(format!("{name}: rerun differs"));
        }
        if cold.files != warm.files || cold.files != a.files {
            failures.push(format!("{name}: cache changes output"));
        }
    }
    Ok((
        failures.is_empty() && !list.is_empty(),
        if failures.is_empty() {
            format!("{} configs byte-identical across reruns and cache states", list.len())
        } else {
            failures.join("; ")
        },
    ))
}

fn report(n: usize, started: Instant, outcome: Outcome, failed: &mut usize) {
    let secs = started.elapsed().as_secs_f64();
    match outcome {
        Ok((true, msg)) => println!("criterion {n}: PASS  {msg}  [{secs:.1}s]"),
        Ok((false, msg)) => {
            *failed += 1;
            println!("criterion {n}: FAIL  {msg}  [{secs:.1}s]");
        }
        Err(e) => {
            *failed += 1;
            println!("criterion {n}: FAIL  error: {e}  [{secs:.1}s]");
        }
    }
}

fn main() {
    let mut failed = 0;
    let t = Instant::now();
    report(1, t, criterion_1(), &mut failed);
    let t = Instant::now();
    report(2, t, criterion_2(), &mut failed);

    let t = Instant::now();
    let maps = (|| -> Result<_, Box<dyn std::error::Error>> {
        let s = SurfaceModel::sphere(1.0)?;
        let sphere_map = extract_return_map(&s, s.ambient_point(1.1, 0.7)?, &ExtractOptions { n: 256, ..Default::default() })?;
        let p = SurfaceModel::revolution(peanut());
        let peanut_map = extract_return_map(&p, ChartPoint::polar(0.0, 0.0), &ExtractOptions { n: 256, ..Default::default() })?;
        Ok((umbilic_map()?, sphere_map, peanut_map))
    })();
    match maps {
        Ok((umbilic, sphere_map, peanut_map)) => {
            report(3, t, criterion_3(&umbilic), &mut failed);
            let t = Instant::now();
            report(4, t, criterion_4(&umbilic, &sphere_map, &peanut_map), &mut failed);
        }
        Err(e) => {
            let msg = e.to_string();
            report(3, t, Err(msg.clone().into()), &mut failed);
            report(4, t, Err(msg.into()), &mut failed);
        }
    }

    let t = Instant::now();
    let tables = (|| -> Result<_, Box<dyn std::error::Error>> {
        Ok(Tables {
            sphere: sphere_spectrum(50.0)?,
            torus: torus_spectrum(TAU, TAU, 50.0)?,
            peanut: revolution_spectrum(&peanut(), 50.0, None, RadialParams::default())?,
        })
    })();
    match tables {
        Ok(tables) => {
            report(5, t, criterion_5(&tables), &mut failed);
            for (n, f) in [(6, criterion_6 as fn(&Tables) -> Outcome), (7, criterion_7), (8, criterion_8)] {
                let t = Instant::now();
                report(n, t, f(&tables), &mut failed);
            }
        }
        Err(e) => {
            for n in 5..=8 {
                report(n, t, Err(e.to_string().into()), &mut failed);
            }
        }
    }
    let t = Instant::now();
    report(9, t, criterion_9(), &mut failed);
    println!("acceptance: {} of 9 criteria pass", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
