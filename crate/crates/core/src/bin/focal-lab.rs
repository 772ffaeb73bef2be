use clap::Parser;
use focal_lab::harness::config::Kind;
use focal_lab::harness::{run_file, RunOptions};
use std::path::PathBuf;
use std::process::ExitCode;

/// Self-focal points, return maps and eigenfunction sup-norm experiments.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// Experiment kind: scan-focal, return-map, transfer, spectrum,
    /// window-norm, quasimode, supnorm-scaling, omega-check, theorem-report.
    kind: Kind,
    /// Flat key = value configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides out.dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cache directory (overrides FOCAL_LAB_CACHE and out.cache).
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Write sample geodesics as CSV.
    #[arg(long)]
    dump_trajectories: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let opts = RunOptions {
        kind: Some(cli.kind),
        out_dir: cli.out,
        cache_dir: cli.cache,
        dump_trajectories: cli.dump_trajectories,
    };
    match run_file(&cli.config, &opts) {
        Ok(a) => {
            print!("{}", a.summary_text);
            println!("wrote {} files to {}", a.files.len(), a.dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
