//! Experiment orchestration: configuration, cached spectra and return maps,
//! and the per-kind pipelines that emit `summary.json` plus CSV artifacts.

pub mod cache;
pub mod config;

use crate::focal::{classify_point, extract_return_map, scan_loops, ExtractOptions, FocalClass, ReturnMap, Thresholds, Verdict};
use crate::geoflow::{flow_recorded, maslov_index, write_trajectory_csv, DirectionFrame, StepPolicy};
use crate::quasimode::{coherent_state, l2_and_residual, make_rho, peak_value, write_synthesis_csv};
use crate::spectral::radial::RadialParams;
use crate::spectral::{
    local_weyl_check, omega_bound_check, projector_norm, revolution_spectrum, sphere_spectrum, sup_norm_scaling, torus_spectrum, window_mass,
    window_mass_one_sided, Mesh, ModeKind, SpectrumTable,
};
use crate::surfaces::{ChartPoint, SurfaceModel};
use crate::transfer::{dissipativity_verdict, ErgodicReport, ErgodicVerdict, VerdictThresholds};
use crate::fmt_float;
use cache::{Cache, CacheError, CACHE_ENV};
use config::{surface_name, AnalyticMap, ConfigError, ExperimentConfig, Kind};
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("{module}: {msg}")]
    Compute { module: &'static str, msg: String },
    #[error("cache: {0}")]
    Cache(#[from] CacheError),
    #[error("output {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            _ => 1,
        }
    }
}

fn compute<E: std::fmt::Display>(module: &'static str) -> impl Fn(E) -> HarnessError {
    move |e| HarnessError::Compute {
        module,
        msg: e.to_string(),
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

/// Command-line overrides applied on top of a configuration.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub kind: Option<Kind>,
    pub out_dir: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub dump_trajectories: bool,
}

/// Files produced by a run, in emission order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Artifacts {
    pub dir: PathBuf,
    pub files: Vec<(String, Vec<u8>)>,
    pub summary_text: String,
}

impl Artifacts {
    fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    fn add_csv<F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>>(&mut self, name: &str, f: F) {
        let mut buf = Vec::new();
        f(&mut buf).expect("in-memory write");
        self.add(name, buf);
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.summary_text.push_str(s.as_ref());
        self.summary_text.push('\n');
    }

    fn write(&self) -> Result<()> {
        let out = |path: &Path| {
            let path = path.to_path_buf();
            move |source| HarnessError::Output { path, source }
        };
        std::fs::create_dir_all(&self.dir).map_err(out(&self.dir))?;
        for (name, bytes) in &self.files {
            let path = self.dir.join(name);
            let tmp = self.dir.join(format!(".{name}.tmp"));
            std::fs::write(&tmp, bytes).map_err(out(&tmp))?;
            std::fs::rename(&tmp, &path).map_err(out(&path))?;
        }
        Ok(())
    }
}

/// Resolved, validated inputs of one experiment.
struct Plan {
    kind: Kind,
    cfg: ExperimentConfig,
    out_dir: PathBuf,
    cache: Option<Cache>,
    dump: bool,
}

fn plan(cfg: ExperimentConfig, opts: &RunOptions) -> Result<Plan> {
    let kind = match (opts.kind, cfg.kind) {
        (Some(a), Some(b)) if a != b => {
            return Err(ConfigError::Invalid {
                key: "run.kind".into(),
                msg: format!("config says {b}, command line says {a}"),
            }
            .into())
        }
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => return Err(ConfigError::Missing("run.kind".into()).into()),
    };
    let needs_surface = !(kind == Kind::Transfer && cfg.params.map.is_some());
    if needs_surface {
        let s = cfg.require_surface()?;
        let spectral = matches!(
            kind,
            Kind::Spectrum | Kind::WindowNorm | Kind::Quasimode | Kind::SupnormScaling | Kind::OmegaCheck
        );
        if spectral {
            match s {
                SurfaceModel::TriaxialEllipsoid { .. } => {
                    return Err(ConfigError::Invalid {
                        key: "surface.type".into(),
                        msg: "no spectral solver for the triaxial ellipsoid".into(),
                    }
                    .into())
                }
                SurfaceModel::RoundSphere { radius } if *radius != 1.0 => {
                    return Err(ConfigError::Invalid {
                        key: "surface.radius".into(),
                        msg: "spectral kinds use the unit sphere".into(),
                    }
                    .into())
                }
                _ => {}
            }
        }
        if kind == Kind::TheoremReport {
            cfg.report_points()?;
        } else {
            cfg.base_point()?;
        }
    }
    let cache_dir = opts
        .cache_dir
        .clone()
        .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
        .or_else(|| cfg.cache_dir.clone());
    let out_dir = opts
        .out_dir
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("focal-lab-out"));
    Ok(Plan {
        kind,
        dump: opts.dump_trajectories || cfg.dump_trajectories,
        cfg,
        out_dir,
        cache: cache_dir.map(Cache::new),
    })
}

/// Parses, validates and executes a configuration, writing artifacts.
pub fn run_file(path: &Path, opts: &RunOptions) -> Result<Artifacts> {
    let cfg = ExperimentConfig::from_file(path)?;
    run(cfg, opts)
}

pub fn run(cfg: ExperimentConfig, opts: &RunOptions) -> Result<Artifacts> {
    let plan = plan(cfg, opts)?;
    let artifacts = execute(&plan)?;
    artifacts.write()?;
    Ok(artifacts)
}

/// Runs the pipeline without touching the output directory.
pub fn execute_config(cfg: ExperimentConfig, opts: &RunOptions) -> Result<Artifacts> {
    execute(&plan(cfg, opts)?)
}

fn execute(plan: &Plan) -> Result<Artifacts> {
    let mut a = Artifacts {
        dir: plan.out_dir.clone(),
        ..Default::default()
    };
    let summary = match plan.kind {
        Kind::ScanFocal => scan_focal(plan, &mut a)?,
        Kind::ReturnMap => return_map(plan, &mut a)?,
        Kind::Transfer => transfer(plan, &mut a)?,
        Kind::Spectrum => spectrum(plan, &mut a)?,
        Kind::WindowNorm => window_norm(plan, &mut a)?,
        Kind::Quasimode => quasimode(plan, &mut a)?,
        Kind::SupnormScaling => supnorm(plan, &mut a)?,
        Kind::OmegaCheck => omega(plan, &mut a)?,
        Kind::TheoremReport => theorem_report(plan, &mut a)?,
    };
    let mut summary = summary;
    summary["kind"] = json!(plan.kind.name());
    if let Some(s) = &plan.cfg.surface {
        summary["surface"] = serde_json::to_value(s).expect("serializable");
    }
    let text = serde_json::to_string_pretty(&summary).expect("serializable");
    a.files.insert(0, ("summary.json".into(), text.into_bytes()));
    let txt = a.summary_text.clone().into_bytes();
    a.add("summary.txt", txt);
    Ok(a)
}

fn policy(plan: &Plan) -> StepPolicy {
    StepPolicy {
        h: plan.cfg.params.step,
        drift_tol: plan.cfg.params.drift_tol,
    }
}

fn extract_options(plan: &Plan) -> ExtractOptions {
    let p = &plan.cfg.params;
    ExtractOptions {
        n: p.directions,
        tol: p.tol,
        horizon: p.horizon,
        dispersion: p.dispersion,
        policy: policy(plan),
        ..Default::default()
    }
}

fn surface(plan: &Plan) -> &SurfaceModel {
    plan.cfg.surface.as_ref().expect("validated by plan")
}

fn point_json(p: &ChartPoint) -> Value {
    serde_json::to_value(p).expect("serializable")
}

fn point_coords(p: &ChartPoint) -> (&'static str, [f64; 3]) {
    match *p {
        ChartPoint::Planar { x, y } => ("planar", [x, y, 0.0]),
        ChartPoint::Polar { r, theta } => ("polar", [r, theta, 0.0]),
        ChartPoint::Ambient { p } => ("ambient", p),
    }
}

/// Return map at `x`, through the cache when one is configured.
fn cached_return_map(plan: &Plan, x: &ChartPoint) -> Result<ReturnMap> {
    let s = surface(plan);
    let opts = extract_options(plan);
    let key = crate::content_hash(&json!({
        "surface": s,
        "point": x,
        "n": opts.n,
        "tol": opts.tol,
        "horizon": opts.horizon,
        "dispersion": opts.dispersion,
        "self_focal": opts.self_focal,
        "policy": opts.policy,
    }));
    if let Some(cache) = &plan.cache {
        if let Some(e) = cache.lookup(&key, "return-map")? {
            let text = std::fs::read_to_string(e.path("return_map.json")).map_err(|source| HarnessError::Output {
                path: e.path("return_map.json"),
                source,
            })?;
            match ReturnMap::from_json(&text) {
                Ok(m) => {
                    log::info!("return map cache hit {key}");
                    return Ok(m);
                }
                Err(err) => log::warn!("unreadable cached return map {key}: {err}"),
            }
        }
    }
    let map = extract_return_map(s, *x, &opts).map_err(compute("focal"))?;
    if let Some(cache) = &plan.cache {
        cache.store(&key, "return-map", &[("return_map.json".into(), map.to_json().into_bytes())])?;
    }
    Ok(map)
}

/// Spectrum table of the configured surface, through the cache when one
/// is configured (surfaces of revolution only; exact tables are rebuilt).
fn cached_spectrum(plan: &Plan) -> Result<SpectrumTable> {
    let p = &plan.cfg.params;
    match *surface(plan) {
        SurfaceModel::FlatTorus { l1, l2 } => torus_spectrum(l1, l2, p.lambda_max).map_err(compute("spectral")),
        SurfaceModel::RoundSphere { .. } => sphere_spectrum(p.lambda_max).map_err(compute("spectral")),
        SurfaceModel::Revolution { profile } => {
            let radial = RadialParams { cells: p.radial_cells };
            let key = crate::content_hash(&json!({
                "surface": surface(plan),
                "lambda_max": p.lambda_max,
                "m_max": p.m_max,
                "radial": radial,
                "format": crate::spectral::store::FORMAT_VERSION,
            }));
            if let Some(cache) = &plan.cache {
                if let Some(e) = cache.lookup(&key, "spectrum")? {
                    match SpectrumTable::load(&e.path("table.json"), &e.path("modes.csv")) {
                        Ok(t) => {
                            log::info!("spectrum cache hit {key}");
                            return Ok(t);
                        }
                        Err(err) => log::warn!("unreadable cached spectrum {key}: {err}"),
                    }
                }
            }
            let table = revolution_spectrum(&profile, p.lambda_max, p.m_max, radial).map_err(compute("spectral"))?;
            if !table.certificate.passed {
                log::warn!("completeness certificate failed: {:?}", table.certificate);
            }
            if let Some(cache) = &plan.cache {
                let header = serde_json::to_string_pretty(&table.header()).expect("serializable");
                let mut csv = Vec::new();
                table.write_modes_csv(&mut csv).expect("in-memory write");
                cache.store(&key, "spectrum", &[("table.json".into(), header.into_bytes()), ("modes.csv".into(), csv)])?;
            }
            Ok(table)
        }
        SurfaceModel::TriaxialEllipsoid { .. } => Err(HarnessError::Compute {
            module: "spectral",
            msg: "no spectral solver for the triaxial ellipsoid".into(),
        }),
    }
}

/// Pole candidates used for mesh refinement.
fn focal_candidates(s: &SurfaceModel) -> Vec<ChartPoint> {
    match s {
        SurfaceModel::Revolution { profile } => vec![ChartPoint::polar(0.0, 0.0), ChartPoint::polar(profile.length(), 0.0)],
        SurfaceModel::RoundSphere { .. } => vec![ChartPoint::polar(0.0, 0.0), ChartPoint::polar(std::f64::consts::PI, 0.0)],
        _ => Vec::new(),
    }
}

fn classify(plan: &Plan, x: &ChartPoint) -> Result<(FocalClass, Option<ReturnMap>, crate::focal::LoopScan)> {
    let p = &plan.cfg.params;
    let th = Thresholds::default();
    let scan = scan_loops(surface(plan), *x, p.horizon, p.directions, p.tol, policy(plan)).map_err(compute("focal"))?;
    let map = if scan.loop_fraction >= th.self_focal {
        match cached_return_map(plan, x) {
            Ok(m) => Some(m),
            Err(HarnessError::Compute { msg, .. }) => {
                log::warn!("return map unavailable: {msg}");
                None
            }
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    Ok((classify_point(&scan, map.as_ref(), &th), map, scan))
}

fn dump_trajectories(plan: &Plan, x: &ChartPoint, t: f64, a: &mut Artifacts) -> Result<()> {
    let frame = DirectionFrame::new(surface(plan), *x, policy(plan)).map_err(compute("geoflow"))?;
    for (i, omega) in crate::focal::direction_grid(64).into_iter().step_by(8).enumerate() {
        let r = flow_recorded(surface(plan), &frame.phase_point(omega), t, policy(plan)).map_err(compute("geoflow"))?;
        let samples = r.trajectory.unwrap_or_default();
        a.add_csv(&format!("trajectory_{i}.csv"), |w| write_trajectory_csv(w, &samples));
    }
    Ok(())
}

fn scan_focal(plan: &Plan, a: &mut Artifacts) -> Result<Value> {
    let x = plan.cfg.base_point()?;
    let (class, map, scan) = classify(plan, &x)?;
    a.add_csv("loops.csv", |w| {
        writeln!(w, "omega,first_loop")?;
        for (o, t) in scan.omega.iter().zip(&scan.first_loop) {
            writeln!(w, "{},{}", fmt_float(*o), t.map(fmt_float).unwrap_or_default())?;
        }
        Ok(())
    });
    if plan.dump {
        let t = map.as_ref().map(|m| m.ell * 1.05).unwrap_or(plan.cfg.params.horizon);
        dump_trajectories(plan, &x, t, a)?;
    }
    a.line(format!(
        "{} point {:?}: {:?}, loop fraction {:.4}",
        surface_name(surface(plan)),
        x,
        class.verdict,
        class.loop_fraction
    ));
    Ok(json!({
        "point": point_json(&x),
        "verdict": class.verdict,
        "loop_fraction": class.loop_fraction,
        "sup_deviation": class.sup_deviation,
        "ell": map.as_ref().map(|m| m.ell),
        "horizon": scan.horizon,
        "directions": scan.n,
    }))
}

fn map_summary(m: &ReturnMap) -> Value {
    json!({
        "ell": m.ell,
        "n": m.n,
        "dispersion": m.dispersion,
        "sub_focal": m.sub_focal.len(),
        "fd_max_rel_diff": m.fd_max_rel_diff,
        "sup_deviation": m.sup_deviation(),
        "jacobian_min": m.jacobian.iter().copied().fold(f64::INFINITY, f64::min),
        "jacobian_max": m.jacobian.iter().copied().fold(0.0, f64::max),
    })
}

fn write_map_csv(m: &ReturnMap, a: &mut Artifacts) {
    a.add_csv("return_map.csv", |w| {
        writeln!(w, "omega,eta,J")?;
        for i in 0..m.n {
            writeln!(w, "{},{},{}", fmt_float(m.omega[i]), fmt_float(m.eta[i]), fmt_float(m.jacobian[i]))?;
        }
        Ok(())
    });
}

fn return_map(plan: &Plan, a: &mut Artifacts) -> Result<Value> {
    let x = plan.cfg.base_point()?;
    let m = cached_return_map(plan, &x)?;
    a.add("return_map.json", m.to_json().into_bytes());
    write_map_csv(&m, a);
    if plan.dump {
        dump_trajectories(plan, &x, m.ell * 1.05, a)?;
    }
    a.line(format!("return map at {:?}: ℓ = {:.10}, sup|η - Id| = {:.3e}", x, m.ell, m.sup_deviation()));
    let mut v = map_summary(&m);
    v["point"] = point_json(&x);
    Ok(v)
}

fn ergodic_summary(r: &ErgodicReport) -> Value {
    let last = r.t.len() - 1;
    json!({
        "verdict": r.verdict,
        "t_max": r.t[last],
        "b_t_max": r.b[last],
        "s_norm_t_max": r.s_norm[last],
        "trend": r.trend,
        "identity": r.identity,
        "fixed_points": r.fixed_points,
        "dissipative_mass": r.dissipative_mass,
    })
}

fn transfer(plan: &Plan, a: &mut Artifacts) -> Result<Value> {
    let p = &plan.cfg.params;
    let (map, source) = match p.map {
        Some(AnalyticMap::Test(eps)) => (ReturnMap::sine_map(p.directions, eps), json!({ "analytic": "test", "epsilon": eps })),
        Some(AnalyticMap::Identity) => (ReturnMap::identity(p.directions), json!({ "analytic": "identity" })),
        Some(AnalyticMap::Rotation(al)) => (ReturnMap::rotation(p.directions, al), json!({ "analytic": "rotation", "alpha": al })),
        None => {
            let x = plan.cfg.base_point()?;
            (cached_return_map(plan, &x)?, json!({ "point": point_json(&x) }))
        }
    };
    let th = VerdictThresholds {
        decay: p.decay,
        presence: p.presence,
        ..Default::default()
    };
    let report = dissipativity_verdict(&map, p.t_max, &th).map_err(compute("transfer"))?;
    a.add("ergodic.json", report.to_json().into_bytes());
    a.add_csv("ergodic.csv", |w| report.write_csv(w));
    a.add_csv("fixed_points.csv", |w| {
        writeln!(w, "angle,multiplier,type")?;
        for f in &report.fixed_points {
            writeln!(w, "{},{},{:?}", fmt_float(f.angle), fmt_float(f.multiplier), f.kind)?;
        }
        Ok(())
    });
    let last = report.t.len() - 1;
    a.line(format!(
        "transfer verdict {:?}: B({}) = {:.6}, ‖S_T 1‖ = {:.6}, trend {:.3e}",
        report.verdict, report.t[last], report.b[last], report.s_norm[last], report.trend
    ));
    let mut v = ergodic_summary(&report);
    v["map"] = source;
    Ok(v)
}

fn spectrum(plan: &Plan, a: &mut Artifacts) -> Result<Value> {
    let t = cached_spectrum(plan)?;
    let x = plan.cfg.base_point()?;
    a.add_csv("spectrum.csv", |w| {
        writeln!(w, "index,lambda,family,a,b,trig")?;
        for (j, m) in t.modes.iter().enumerate() {
            let (fam, x, y, trig) = match m.kind {
                ModeKind::Torus { p, q, trig } => ("torus", p, q, format!("{trig:?}")),
                ModeKind::Sphere { l, m } => ("sphere", l as i64, m as i64, "Const".into()),
                ModeKind::Revolution { m, k, trig, .. } => ("revolution", m as i64, k as i64, format!("{trig:?}")),
            };
            writeln!(w, "{j},{},{fam},{x},{y},{}", fmt_float(m.lambda), trig.to_lowercase())?;
        }
        Ok(())
    });
    let lw = (0.9 * t.lambda_max).min(40.0);
    let weyl = local_weyl_check(&t, &x, lw).map_err(compute("spectral"))?;
    a.line(format!(
        "{} modes up to λ = {}, Weyl deviation {:.3}% ({}), local Weyl ratio at λ = {lw}: {weyl:.4}",
        t.len(),
        t.lambda_max,
        100.0 * t.certificate.relative_deviation,
        if t.certificate.passed { "certified" } else { "flagged" }
    ));
    Ok(json!({
        "lambda_max": t.lambda_max,
        "modes": t.len(),
        "certificate": t.certificate,
        "point": point_json(&x),
        "local_weyl": { "lambda": lw, "ratio": weyl },
    }))
}

fn window_norm(plan: &Plan, a: &mut Artifacts) -> Result<Value> {
    let p = &plan.cfg.params;
    let t = cached_spectrum(plan)?;
    let x = plan.cfg.base_point()?;
    let mut rows = Vec::new();
    let mut csv = String::from("lambda,delta,mass,one_sided,projector,argmax_chart,argmax_c1,argmax_c2,argmax_c3\n");
    for &lam in &p.lambdas {
        let mesh = Mesh::focal(surface(plan), p.mesh_spacing, &focal_candidates(surface(plan)), lam).map_err(compute("spectral"))?;
        for &d in &p.deltas {
            let sym = window_mass(&t, &x, lam, d).map_err(compute("spectral"))?;
            let one = window_mass_one_sided(&t, &x, lam, d).map_err(compute("spectral"))?;
            let pn = projector_norm(&t, lam, d, &mesh).map_err(compute("spectral"))?;
            let (chart, c) = point_coords(&pn.argmax);
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{chart},{},{},{}",
                fmt_float(lam),
                fmt_float(d),
                fmt_float(sym),
                fmt_float(one),
                fmt_float(pn.value),
                fmt_float(c[0]),
                fmt_float(c[1]),
                fmt_float(c[2])
            );
            a.line(format!("λ = {lam}, δ = {d}: window mass {sym:.6e}, projector norm² {:.6e}", pn.value));
            rows.push(json!({ "lambda": lam, "delta": d, "mass": sym, "one_sided": one, "projector": pn.value, "argmax": pn.argmax }));
        }
    }
    a.add("window.csv", csv.into_bytes());
    Ok(json!({ "point": point_json(&x), "rows": rows }))
}

fn quasimode(plan: &Plan, a: &mut Artifacts) -> Result<Value> {
    let p = &plan.cfg.params;
    let t = cached_spectrum(plan)?;
    let x = plan.cfg.base_point()?;
    let rho = make_rho();
    let mesh = Mesh::covering(surface(plan), p.mesh_spacing).map_err(compute("quasimode"))?;
    let mut rows = Vec::new();
    let mut csv = String::from("lambda,t,l2,residual,peak,l2_tail,residual_tail,peak_tail\n");
    let mut idx = 0;
    for &lam in &p.lambdas {
        for &tt in &p.t_values {
            let st = coherent_state(&t, &rho, &x, lam, tt).map_err(compute("quasimode"))?;
            let nr = l2_and_residual(&st);
            let pk = peak_value(&st);
            let values = st.synthesize(&t, &mesh).map_err(compute("quasimode"))?;
            a.add_csv(&format!("psi_{idx}.csv"), |w| write_synthesis_csv(&mesh, &values, w));
            idx += 1;
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{}",
                fmt_float(lam),
                fmt_float(tt),
                fmt_float(nr.l2_norm),
                fmt_float(nr.residual),
                fmt_float(pk.value),
                fmt_float(nr.l2_tail),
                fmt_float(nr.residual_tail),
                fmt_float(pk.tail)
            );
            a.line(format!(
                "λ = {lam}, T = {tt}: ‖ψ‖ = {:.6}, residual = {:.6}, peak = {:.6}",
                nr.l2_norm, nr.residual, pk.value
            ));
            rows.push(json!({
                "lambda": lam, "t": tt, "l2": nr.l2_norm, "residual": nr.residual, "peak": pk.value,
                "tails": { "l2": nr.l2_tail, "residual": nr.residual_tail, "peak": pk.tail },
                "decay_sane": st.decay_sane(),
            }));
        }
    }
    a.add("quasimode.csv", csv.into_bytes());
    Ok(json!({ "point": point_json(&x), "states": rows }))
}

fn supnorm(plan: &Plan, a: &mut Artifacts) -> Result<Value> {
    let p = &plan.cfg.params;
    let t = cached_spectrum(plan)?;
    let top = p.lambdas.iter().copied().fold(0.0, f64::max);
    let mesh = Mesh::focal(surface(plan), p.mesh_spacing, &focal_candidates(surface(plan)), top).map_err(compute("spectral"))?;
    let zonal = p.zonal_only;
    let recs = sup_norm_scaling(&t, &mesh, |_, m| {
        m.lambda <= top
            && (!zonal
                || matches!(m.kind, ModeKind::Revolution { m: 0, .. } | ModeKind::Sphere { m: 0, .. } | ModeKind::Torus { p: 0, q: 0, .. }))
    })
    .map_err(compute("spectral"))?;
    let mut csv = String::from("index,lambda,scaled,argmax_chart,argmax_c1,argmax_c2,argmax_c3\n");
    for r in &recs {
        let (chart, c) = point_coords(&r.argmax);
        let _ = writeln!(
            csv,
            "{},{},{},{chart},{},{},{}",
            r.index,
            fmt_float(r.lambda),
            fmt_float(r.scaled),
            fmt_float(c[0]),
            fmt_float(c[1]),
            fmt_float(c[2])
        );
    }
    a.add("supnorm.csv", csv.into_bytes());
    let max = recs.iter().map(|r| r.scaled).fold(0.0, f64::max);
    a.line(format!("{} modes up to λ = {top}: max λ^(-1/2) sup|e| = {max:.6}", recs.len()));
    Ok(json!({ "modes": recs.len(), "lambda_top": top, "max_scaled": max, "mesh_points": mesh.len() }))
}

fn beta_and_ell(plan: &Plan, x: &ChartPoint) -> Result<(f64, u32)> {
    let p = &plan.cfg.params;
    let ell = match p.ell {
        Some(l) => l,
        None => cached_return_map(plan, x)?.ell,
    };
    let beta = match p.beta {
        Some(b) => b,
        None => maslov_index(surface(plan), *x, ell, 16, policy(plan)).map_err(compute("geoflow"))? as u32,
    };
    Ok((ell, beta))
}

fn omega(plan: &Plan, a: &mut Artifacts) -> Result<Value> {
    let p = &plan.cfg.params;
    let t = cached_spectrum(plan)?;
    let x = plan.cfg.base_point()?;
    let (ell, beta) = beta_and_ell(plan, &x)?;
    let chk = omega_bound_check(&t, &x, ell, beta, p.deltas[0], p.k_min..=p.k_max).map_err(compute("spectral"))?;
    a.add_csv("omega.csv", |w| chk.write_csv(w));
    a.line(format!(
        "ℓ = {ell:.10}, β = {beta}, δ = {}: min scaled window mass over k ∈ [{}, {}] = {:.6}",
        p.deltas[0], p.k_min, p.k_max, chk.liminf
    ));
    Ok(json!({ "point": point_json(&x), "ell": ell, "beta": beta, "delta": p.deltas[0], "liminf": chk.liminf, "rows": chk.rows }))
}

fn theorem_report(plan: &Plan, a: &mut Artifacts) -> Result<Value> {
    let p = &plan.cfg.params;
    let s = surface(plan);
    let has_spectrum = !matches!(s, SurfaceModel::TriaxialEllipsoid { .. }) && !matches!(s, SurfaceModel::RoundSphere { radius } if *radius != 1.0);
    let table = if has_spectrum { Some(cached_spectrum(plan)?) } else { None };
    let th = VerdictThresholds {
        decay: p.decay,
        presence: p.presence,
        ..Default::default()
    };
    let mut points = Vec::new();
    let mut csv = String::from("point,verdict,loop_fraction,ell,ergodic,omega_min,window_shrinks\n");
    let mut growth_points = Vec::new();
    for (label, x) in plan.cfg.report_points()? {
        let (class, map, _) = classify(plan, &x)?;
        let mut entry = json!({ "label": label, "point": point_json(&x), "verdict": class.verdict, "loop_fraction": class.loop_fraction });
        let mut line = format!("{label}: {:?} (loop fraction {:.4})", class.verdict, class.loop_fraction);
        let mut ergodic = None;
        let mut omega_min = None;
        let mut shrinks = None;
        if let (Some(m), Verdict::Pole | Verdict::Twisted) = (&map, class.verdict) {
            entry["ell"] = json!(m.ell);
            let r = dissipativity_verdict(m, p.t_max, &th).map_err(compute("transfer"))?;
            let _ = write!(line, ", ℓ = {:.8}, ergodic {:?}", m.ell, r.verdict);
            entry["ergodic"] = ergodic_summary(&r);
            ergodic = Some(r.verdict);
            if let Some(t) = &table {
                let beta = maslov_index(s, x, m.ell, 16, policy(plan)).map_err(compute("geoflow"))? as u32;
                let delta = p.deltas[0];
                let mu = |k: u32| std::f64::consts::TAU / m.ell * (k as f64 + beta as f64 / 4.0);
                let k_hi = (p.k_min..=p.k_max).rev().find(|k| mu(*k) + delta <= t.lambda_max);
                if let Some(k_hi) = k_hi {
                    let chk = omega_bound_check(t, &x, m.ell, beta, delta, p.k_min..=k_hi).map_err(compute("spectral"))?;
                    let _ = write!(line, ", β = {beta}, Ω-bound min scaled mass {:.6}", chk.liminf);
                    entry["omega"] = json!({ "beta": beta, "delta": delta, "liminf": chk.liminf, "rows": chk.rows });
                    omega_min = Some(chk.liminf);
                }
            }
            if r.verdict == ErgodicVerdict::InvariantMassPresent {
                growth_points.push(label.clone());
            }
        } else if let Some(t) = &table {
            let lam = p.lambdas[0];
            let mut ds: Vec<f64> = if p.deltas.len() > 1 { p.deltas.clone() } else { vec![0.4, 0.2, 0.1, 0.05] };
            ds.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
            let masses: Vec<f64> = ds.iter().map(|d| window_mass(t, &x, lam, *d)).collect::<std::result::Result<_, _>>().map_err(compute("spectral"))?;
            let ok = masses.windows(2).all(|w| w[1] <= w[0]);
            let _ = write!(line, ", window masses at λ = {lam} shrink with δ: {ok}");
            entry["window"] = json!({ "lambda": lam, "deltas": ds, "masses": masses, "shrinks": ok });
            shrinks = Some(ok);
        }
        let _ = writeln!(
            csv,
            "{label},{:?},{},{},{},{},{}",
            class.verdict,
            fmt_float(class.loop_fraction),
            entry.get("ell").and_then(Value::as_f64).map(fmt_float).unwrap_or_default(),
            ergodic.map(|e| format!("{e:?}")).unwrap_or_default(),
            omega_min.map(fmt_float).unwrap_or_default(),
            shrinks.map(|b| b.to_string()).unwrap_or_default()
        );
        a.line(line);
        points.push(entry);
    }
    let conclusion = if growth_points.is_empty() {
        "no self-focal point with invariant mass found: sup norms expected o(λ^(1/2))".to_string()
    } else {
        format!("maximal sup-norm growth expected at: {}", growth_points.join(", "))
    };
    a.line(&conclusion);
    a.add("report.csv", csv.into_bytes());
    Ok(json!({ "points": points, "conclusion": conclusion }))
}
