use std::path::Path;
use std::process::{Command, Output};

fn focal_lab(args: &[&str], cache_env: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_focal-lab"));
    cmd.args(args).env_remove("FOCAL_LAB_CACHE");
    if let Some(c) = cache_env {
        cmd.env("FOCAL_LAB_CACHE", c);
    }
    cmd.output().expect("spawn focal-lab")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

const TRANSFER: &str = "run.kind = transfer\nrun.map = test\nrun.directions = 512\nrun.t_max = 20\n";

#[test]
fn config_errors_exit_2_without_outputs() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("out");
    let cases = [
        ("unknown.cfg", "run.kind = transfer\nrun.map = test\nrun.bogus = 1\n"),
        ("syntax.cfg", "run.kind transfer\n"),
        ("range.cfg", "surface.type = sphere\nrun.kind = spectrum\nrun.lambda_max = -3\n"),
        ("surface.cfg", "run.kind = spectrum\n"),
        ("ellipsoid.cfg", "surface.type = ellipsoid\nsurface.a = 2\nsurface.b = 1.5\nsurface.c = 1\nrun.kind = spectrum\n"),
        ("dup.cfg", "run.kind = transfer\nrun.map = test\nrun.map = identity\n"),
    ];
    for (name, text) in cases {
        let cfg = write(d.path(), name, text);
        let kind = if text.contains("spectrum") { "spectrum" } else { "transfer" };
        let o = focal_lab(&[kind, "--config", &cfg, "--out", out.to_str().unwrap()], None);
        assert_eq!(o.status.code(), Some(2), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!out.exists(), "{name} produced output");
    }
    let o = focal_lab(&["transfer", "--config", d.path().join("missing.cfg").to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn computation_errors_exit_1() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(
        d.path(),
        "w.cfg",
        "surface.type = sphere\nrun.kind = window-norm\nrun.point = pole\nrun.lambda_max = 20\nrun.lambda = 19.9\nrun.delta = 0.5\n",
    );
    let o = focal_lab(&["window-norm", "--config", &cfg, "--out", d.path().join("o").to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn runs_are_byte_identical() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "t.cfg", TRANSFER);
    let (a, b) = (d.path().join("a"), d.path().join("b"));
    for out in [&a, &b] {
        let o = focal_lab(&["transfer", "--config", &cfg, "--out", out.to_str().unwrap()], None);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let fa = read_dir_sorted(&a);
    assert!(fa.iter().any(|(n, _)| n == "summary.json"));
    assert!(fa.iter().any(|(n, _)| n == "ergodic.csv"));
    assert_eq!(fa, read_dir_sorted(&b));
}

#[test]
fn cache_from_environment_and_flag_agree_with_cold_runs() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(
        d.path(),
        "s.cfg",
        "surface.type = revolution\nsurface.profile = peanut\nrun.kind = spectrum\nrun.point = pole\nrun.lambda_max = 20\nrun.lambda = 10,15\n",
    );
    let cache = d.path().join("cache");
    let cache_arg = cache.to_string_lossy().into_owned();
    let run = |out: &str, flag: bool, env: bool| {
        let out = d.path().join(out);
        let mut args = vec!["spectrum", "--config", cfg.as_str(), "--out", out.to_str().unwrap()];
        if flag {
            args.extend(["--cache", cache_arg.as_str()]);
        }
        let o = focal_lab(&args, if env { Some(cache.as_path()) } else { None });
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        read_dir_sorted(&out)
    };
    let cold = run("cold", false, false);
    assert!(!cache.exists());
    let env_first = run("env", false, true);
    assert!(std::fs::read_dir(&cache).unwrap().count() >= 1);
    let warm = run("warm", true, false);
    assert_eq!(cold, env_first);
    assert_eq!(cold, warm);
}

#[test]
fn dump_trajectories_writes_csv() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "s.cfg", "surface.type = sphere\nrun.kind = scan-focal\nrun.point = generic\nrun.directions = 64\n");
    let out = d.path().join("o");
    let o = focal_lab(&["scan-focal", "--config", &cfg, "--out", out.to_str().unwrap(), "--dump-trajectories", "--threads", "1"], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let files = read_dir_sorted(&out);
    let traj: Vec<_> = files.iter().filter(|(n, _)| n.starts_with("trajectory_")).collect();
    assert!(!traj.is_empty());
    let text = String::from_utf8_lossy(&traj[0].1);
    assert!(text.starts_with("t,"));
    assert!(text.lines().count() > 100);
}
